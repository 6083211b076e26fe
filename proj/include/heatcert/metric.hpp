#pragma once

#include <string>
#include <vector>

#include "heatcert/graph.hpp"

namespace heatcert {

/// Edge weights w for a path metric, aligned with WeightedGraph::edges().
/// Finite exactly on edges; off-edge pairs are implicitly infinite.
struct EdgeWeights {
  std::vector<double> w;
};

/// w(x,y) = (Deg_x v Deg_y)^(-1/2) on edges; yields an intrinsic path metric.
EdgeWeights default_intrinsic_weights(const WeightedGraph& g);
/// w = 1 on every edge (combinatorial distance).
EdgeWeights combinatorial_weights(const WeightedGraph& g);
/// "metric v1" override file with one "w <id> <id> <value>" line per edge.
EdgeWeights load_metric_weights(const WeightedGraph& g, const std::string& path);

/// Intrinsic path metric rho plus the derived ball/jump machinery.
///
/// Holds the full distance table, per-vertex sorted ball breakpoints with
/// measure prefix sums, the global jump size S and the diameter. Immutable.
class MetricStructure {
 public:
  static MetricStructure all_pairs_distances(const WeightedGraph& g,
                                             const EdgeWeights& w);

  int size() const { return n_; }
  double distance(int x, int y) const { return dist_[idx(x, y)]; }
  const double* row(int x) const { return dist_.data() + static_cast<size_t>(x) * n_; }
  const EdgeWeights& weights() const { return w_; }

  /// Sorted distinct distances from x (starts at 0).
  const std::vector<double>& breakpoints(int x) const { return breaks_[x]; }
  double diameter() const { return diameter_; }
  /// S = sup_{x,r} s_x(r); equals the largest metric edge length.
  double global_jump_size() const { return global_jump_; }

  /// Closed ball B_x(r) as vertex indices; r >= 0.
  std::vector<int> ball(int x, double r) const;
  int ball_size(int x, double r) const;
  double ball_measure(int x, double r) const;
  /// m(B_x(r-)) -- the measure just below radius r.
  double ball_measure_below(int x, double r) const;

  /// Local jump size s_x(r): largest rho(y,z) over edges leaving B_x(r) or
  /// incident to x.
  double jump_size(int x, double r) const;
  /// ||s_x||_[a,b]; exact via breakpoint reduction.
  double annulus_jump_sup(int x, double a, double b) const;
  /// sup over x in ball_set of s_x(r).
  double jump_sup_over_set(const std::vector<int>& ball_set, double r) const;

  void export_distances_csv(const WeightedGraph& g, const std::string& path) const;

 private:
  MetricStructure() = default;
  size_t idx(int x, int y) const {
    return static_cast<size_t>(x) * n_ + y;
  }
  int n_ = 0;
  const WeightedGraph* g_ = nullptr;
  EdgeWeights w_;
  std::vector<double> dist_;              // n*n row-major
  std::vector<std::vector<double>> breaks_;
  std::vector<std::vector<int>> order_;   // vertices sorted by distance from x
  std::vector<std::vector<double>> prefix_m_;  // prefix sums of m in that order
  double diameter_ = 0.0;
  double global_jump_ = 0.0;
};

struct IntrinsicReport {
  bool pass = false;
  int worst_vertex = -1;
  double worst_slack = 0.0;  // m(x) - sum_y b(x,y) rho^2(x,y), minimal over x
  std::vector<double> quadratic_sums;
};

/// Checks sum_y b(x,y) rho^2(x,y) <= m(x) at every vertex.
/// rho is a full n*n table (row-major); a relative slack of 1e-12 absorbs
/// floating-point rounding in the sums.
IntrinsicReport verify_intrinsic(const WeightedGraph& g,
                                 const std::vector<double>& rho);
IntrinsicReport verify_intrinsic(const WeightedGraph& g,
                                 const MetricStructure& metric);

}  // namespace heatcert
