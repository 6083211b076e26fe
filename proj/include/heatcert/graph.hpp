#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace heatcert {

/// How the vertex measure m is chosen at construction time.
enum class MeasureMode { normalizing, counting, custom };

std::string to_string(MeasureMode mode);
MeasureMode measure_mode_from_string(const std::string& s);

struct Edge {
  int u = -1;
  int v = -1;
  double b = 0.0;  // symmetric weight, stored once per unordered pair
};

/// Finite connected weighted graph b over (X, m).
///
/// Vertex ids are arbitrary strings mapped to dense indices; all numeric
/// routines work on indices, reports translate back to ids. Immutable after
/// construction and safe to share across threads.
class WeightedGraph {
 public:
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(int x) const { return ids_.at(x); }
  /// Dense index of a vertex id; throws std::out_of_range for unknown ids.
  int index_of(const std::string& id) const;
  bool has_vertex(const std::string& id) const { return index_.count(id) > 0; }

  double measure(int x) const { return m_.at(x); }
  const std::vector<double>& measures() const { return m_; }
  double total_measure() const { return total_measure_; }

  /// deg_x = sum_y b(x,y)
  double degree(int x) const { return deg_.at(x); }
  /// Deg_x = deg_x / m(x)
  double weighted_degree(int x) const { return deg_.at(x) / m_.at(x); }

  const std::vector<Edge>& edges() const { return edges_; }
  /// Adjacency of x as (neighbor index, b(x,y)) pairs.
  const std::vector<std::pair<int, double>>& neighbors(int x) const {
    return adj_.at(x);
  }

  MeasureMode mode() const { return mode_; }

  /// Exact equality of ids, weights and measures (bitwise on the doubles).
  bool identical_to(const WeightedGraph& other) const;

  friend WeightedGraph build_graph(
      const std::vector<std::tuple<std::string, std::string, double>>& edges,
      MeasureMode mode, const std::map<std::string, double>& custom_measure);
  friend WeightedGraph single_vertex_graph(const std::string& id, double m);
  friend WeightedGraph graph_from_string(const std::string& text,
                                         const std::string& origin);

 private:
  WeightedGraph() = default;
  void finalize(MeasureMode mode,
                const std::map<std::string, double>& custom_measure);

  std::vector<std::string> ids_;
  std::map<std::string, int> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
  std::vector<double> m_;
  std::vector<double> deg_;
  double total_measure_ = 0.0;
  MeasureMode mode_ = MeasureMode::counting;
};

/// Builds a validated graph from an edge list.
///
/// Rejects self-loops, nonpositive weights, duplicate edges with conflicting
/// weights, disconnected inputs (naming two unreachable vertices) and, in
/// custom mode, nonpositive or missing measures.
WeightedGraph build_graph(
    const std::vector<std::tuple<std::string, std::string, double>>& edges,
    MeasureMode mode,
    const std::map<std::string, double>& custom_measure = {});

/// The one legal edgeless graph: a single vertex with measure m > 0.
WeightedGraph single_vertex_graph(const std::string& id, double m);

/// Deterministic generator families. Accepted specs:
///   path_N, cycle_N, grid_AxB, binary_tree_depth_D, star_N, polyline_N_ALPHA
/// Vertex orderings are documented in docs/formats.md.
WeightedGraph generate_family(const std::string& spec, MeasureMode mode);

/// Text persistence ("graph v1" format); load(save(g)) is bit-exact.
void save_graph(const WeightedGraph& g, const std::string& path);
WeightedGraph load_graph(const std::string& path);
std::string graph_to_string(const WeightedGraph& g);
WeightedGraph graph_from_string(const std::string& text,
                                const std::string& origin = "<string>");

}  // namespace heatcert
