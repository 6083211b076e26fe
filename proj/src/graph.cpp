#include "heatcert/graph.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace heatcert {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument(msg);
}

}  // namespace

std::string to_string(MeasureMode mode) {
  switch (mode) {
    case MeasureMode::normalizing: return "normalizing";
    case MeasureMode::counting: return "counting";
    case MeasureMode::custom: return "custom";
  }
  return "?";
}

MeasureMode measure_mode_from_string(const std::string& s) {
  if (s == "normalizing") return MeasureMode::normalizing;
  if (s == "counting") return MeasureMode::counting;
  if (s == "custom") return MeasureMode::custom;
  fail("unknown measure mode '" + s + "'");
}

int WeightedGraph::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end())
    throw std::out_of_range("unknown vertex id '" + id + "'");
  return it->second;
}

bool WeightedGraph::identical_to(const WeightedGraph& other) const {
  if (ids_ != other.ids_) return false;
  if (m_ != other.m_) return false;
  if (edges_.size() != other.edges_.size()) return false;
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (edges_[i].u != other.edges_[i].u || edges_[i].v != other.edges_[i].v ||
        edges_[i].b != other.edges_[i].b)
      return false;
  }
  return true;
}

void WeightedGraph::finalize(MeasureMode mode,
                             const std::map<std::string, double>& custom) {
  mode_ = mode;
  const int n = size();
  adj_.assign(n, {});
  deg_.assign(n, 0.0);
  for (const Edge& e : edges_) {
    adj_[e.u].emplace_back(e.v, e.b);
    adj_[e.v].emplace_back(e.u, e.b);
    deg_[e.u] += e.b;
    deg_[e.v] += e.b;
  }
  for (int x = 0; x < n; ++x)
    std::sort(adj_[x].begin(), adj_[x].end());

  if (n > 1) {
    for (int x = 0; x < n; ++x) {
      if (!(deg_[x] > 0.0))
        fail("vertex '" + ids_[x] + "' is isolated (deg = 0)");
    }
    // connectivity via BFS
    std::vector<char> seen(n, 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    int reached = 1;
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (auto [y, b] : adj_[x]) {
        if (!seen[y]) {
          seen[y] = 1;
          ++reached;
          queue.push_back(y);
        }
      }
    }
    if (reached != n) {
      int stranded = 0;
      while (seen[stranded]) ++stranded;
      fail("graph is disconnected: vertex '" + ids_[0] +
           "' cannot reach vertex '" + ids_[stranded] + "'");
    }
  }

  m_.assign(n, 1.0);
  switch (mode) {
    case MeasureMode::counting:
      break;
    case MeasureMode::normalizing:
      for (int x = 0; x < n; ++x) m_[x] = deg_[x];
      if (n == 1) fail("normalizing measure needs at least one edge");
      break;
    case MeasureMode::custom:
      for (int x = 0; x < n; ++x) {
        auto it = custom.find(ids_[x]);
        if (it == custom.end())
          fail("custom measure missing vertex '" + ids_[x] + "'");
        if (!(it->second > 0.0) || !std::isfinite(it->second))
          fail("nonpositive measure " + format_double(it->second) +
               " at vertex '" + ids_[x] + "'");
        m_[x] = it->second;
      }
      break;
  }
  total_measure_ = 0.0;
  for (double v : m_) total_measure_ += v;
}

WeightedGraph build_graph(
    const std::vector<std::tuple<std::string, std::string, double>>& edges,
    MeasureMode mode, const std::map<std::string, double>& custom_measure) {
  if (edges.empty()) fail("empty edge list (use single_vertex_graph)");
  WeightedGraph g;
  std::map<std::pair<int, int>, double> seen;
  auto intern = [&g](const std::string& id) {
    if (id.empty()) fail("empty vertex id");
    auto it = g.index_.find(id);
    if (it != g.index_.end()) return it->second;
    int idx = g.size();
    g.index_[id] = idx;
    g.ids_.push_back(id);
    return idx;
  };
  for (const auto& [su, sv, b] : edges) {
    if (su == sv) fail("self-loop at vertex '" + su + "'");
    if (!(b > 0.0) || !std::isfinite(b))
      fail("nonpositive weight " + format_double(b) + " on edge (" + su +
           ", " + sv + ")");
    int u = intern(su), v = intern(sv);
    std::pair<int, int> key = std::minmax(u, v);
    auto it = seen.find(key);
    if (it != seen.end()) {
      if (it->second != b)
        fail("duplicate edge (" + su + ", " + sv + ") with conflicting weights " +
             format_double(it->second) + " and " + format_double(b));
      continue;
    }
    seen[key] = b;
    g.edges_.push_back({key.first, key.second, b});
  }
  g.finalize(mode, custom_measure);
  return g;
}

WeightedGraph single_vertex_graph(const std::string& id, double m) {
  if (!(m > 0.0) || !std::isfinite(m))
    fail("nonpositive measure " + format_double(m) + " at vertex '" + id + "'");
  WeightedGraph g;
  g.ids_.push_back(id);
  g.index_[id] = 0;
  g.finalize(MeasureMode::custom, {{id, m}});
  return g;
}

namespace {

using EdgeList = std::vector<std::tuple<std::string, std::string, double>>;

std::string num_id(long long k) { return std::to_string(k); }

EdgeList family_edges(const std::string& spec) {
  auto starts_with = [&spec](const char* p) {
    return spec.rfind(p, 0) == 0;
  };
  auto parse_tail_int = [&](size_t off, const char* what) {
    long long n = 0;
    try {
      size_t used = 0;
      n = std::stoll(spec.substr(off), &used);
      if (off + used != spec.size()) throw std::invalid_argument("");
    } catch (...) {
      fail("malformed " + std::string(what) + " spec '" + spec + "'");
    }
    return n;
  };

  EdgeList edges;
  if (starts_with("path_")) {
    long long n = parse_tail_int(5, "path");
    if (n < 2) fail("path_N needs N >= 2, got '" + spec + "'");
    for (long long k = 0; k + 1 < n; ++k)
      edges.emplace_back(num_id(k), num_id(k + 1), 1.0);
  } else if (starts_with("cycle_")) {
    long long n = parse_tail_int(6, "cycle");
    if (n < 3) fail("cycle_N needs N >= 3, got '" + spec + "'");
    for (long long k = 0; k < n; ++k)
      edges.emplace_back(num_id(k), num_id((k + 1) % n), 1.0);
  } else if (starts_with("grid_")) {
    size_t xpos = spec.find('x', 5);
    if (xpos == std::string::npos) fail("malformed grid spec '" + spec + "'");
    long long a = 0, b = 0;
    try {
      a = std::stoll(spec.substr(5, xpos - 5));
      size_t used = 0;
      b = std::stoll(spec.substr(xpos + 1), &used);
      if (xpos + 1 + used != spec.size()) throw std::invalid_argument("");
    } catch (...) {
      fail("malformed grid spec '" + spec + "'");
    }
    if (a < 2 || b < 2) fail("grid_AxB needs A,B >= 2, got '" + spec + "'");
    auto vid = [b](long long i, long long j) {
      return std::to_string(i) + "_" + std::to_string(j);
    };
    for (long long i = 0; i < a; ++i)
      for (long long j = 0; j < b; ++j) {
        if (i + 1 < a) edges.emplace_back(vid(i, j), vid(i + 1, j), 1.0);
        if (j + 1 < b) edges.emplace_back(vid(i, j), vid(i, j + 1), 1.0);
      }
  } else if (starts_with("binary_tree_depth_")) {
    long long d = parse_tail_int(18, "binary tree");
    if (d < 1) fail("binary_tree_depth_D needs D >= 1, got '" + spec + "'");
    long long last_internal = (1LL << d) - 1;
    for (long long k = 1; k <= last_internal; ++k) {
      edges.emplace_back(num_id(k), num_id(2 * k), 1.0);
      edges.emplace_back(num_id(k), num_id(2 * k + 1), 1.0);
    }
  } else if (starts_with("star_")) {
    long long n = parse_tail_int(5, "star");
    if (n < 2) fail("star_N needs N >= 2, got '" + spec + "'");
    for (long long k = 1; k <= n; ++k)
      edges.emplace_back(num_id(0), num_id(k), 1.0);
  } else if (starts_with("polyline_")) {
    size_t sep = spec.find('_', 9);
    if (sep == std::string::npos) fail("malformed polyline spec '" + spec + "'");
    long long n = 0;
    double alpha = 0.0;
    try {
      n = std::stoll(spec.substr(9, sep - 9));
      size_t used = 0;
      alpha = std::stod(spec.substr(sep + 1), &used);
      if (sep + 1 + used != spec.size()) throw std::invalid_argument("");
    } catch (...) {
      fail("malformed polyline spec '" + spec + "'");
    }
    if (n < 2) fail("polyline_N_alpha needs N >= 2, got '" + spec + "'");
    for (long long k = 0; k + 1 < n; ++k) {
      double w = std::pow(static_cast<double>(k + 1), alpha);
      if (!std::isfinite(w) || !(w > 0.0))
        fail("polyline weight (k+1)^alpha overflows at k = " +
             std::to_string(k) + " for '" + spec + "'");
      edges.emplace_back(num_id(k), num_id(k + 1), w);
    }
  } else {
    fail("unknown family spec '" + spec + "'");
  }
  return edges;
}

}  // namespace

WeightedGraph generate_family(const std::string& spec, MeasureMode mode) {
  if (mode == MeasureMode::custom)
    fail("generators support counting and normalizing measures only");
  return build_graph(family_edges(spec), mode);
}

std::string graph_to_string(const WeightedGraph& g) {
  std::ostringstream out;
  out << "graph v1\n";
  for (int x = 0; x < g.size(); ++x)
    out << "vertex " << g.id(x) << " " << format_double(g.measure(x)) << "\n";
  for (const Edge& e : g.edges())
    out << "edge " << g.id(e.u) << " " << g.id(e.v) << " " << format_double(e.b)
        << "\n";
  return out.str();
}

void save_graph(const WeightedGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot open '" + path + "' for writing");
  out << graph_to_string(g);
  if (!out) fail("write failed on '" + path + "'");
}

WeightedGraph graph_from_string(const std::string& text,
                                const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto parse_fail = [&](const std::string& msg) {
    fail(origin + ":" + std::to_string(lineno) + ": " + msg);
  };

  std::vector<std::string> vertex_order;
  std::map<std::string, double> measures;
  std::map<std::pair<std::string, std::string>, double> edge_weights;
  EdgeList edges;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (!header_seen) {
      std::string ver;
      if (tok != "graph" || !(ls >> ver) || ver != "v1")
        parse_fail("expected header 'graph v1'");
      header_seen = true;
      continue;
    }
    if (tok == "vertex") {
      std::string id, mstr;
      if (!(ls >> id >> mstr)) parse_fail("vertex line needs '<id> <m>'");
      char* end = nullptr;
      double m = std::strtod(mstr.c_str(), &end);
      if (end == mstr.c_str() || *end != '\0')
        parse_fail("bad measure field '" + mstr + "'");
      if (!(m > 0.0) || !std::isfinite(m))
        parse_fail("nonpositive measure " + mstr + " at vertex '" + id + "'");
      if (measures.count(id)) parse_fail("duplicate vertex '" + id + "'");
      measures[id] = m;
      vertex_order.push_back(id);
    } else if (tok == "edge") {
      std::string a, b, wstr;
      if (!(ls >> a >> b >> wstr)) parse_fail("edge line needs '<id> <id> <b>'");
      char* end = nullptr;
      double w = std::strtod(wstr.c_str(), &end);
      if (end == wstr.c_str() || *end != '\0')
        parse_fail("bad weight field '" + wstr + "'");
      if (!(w > 0.0) || !std::isfinite(w))
        parse_fail("nonpositive weight " + wstr + " on edge (" + a + ", " + b +
                   ")");
      if (a == b) parse_fail("self-loop at vertex '" + a + "'");
      if (!measures.count(a) || !measures.count(b))
        parse_fail("edge references undeclared vertex '" +
                   (measures.count(a) ? b : a) + "'");
      auto key = std::minmax(a, b);
      auto it = edge_weights.find(key);
      if (it != edge_weights.end()) {
        if (it->second != w)
          parse_fail("asymmetric weights for edge (" + a + ", " + b + "): " +
                     format_double(it->second) + " vs " + wstr);
        continue;
      }
      edge_weights[key] = w;
      edges.emplace_back(a, b, w);
    } else {
      parse_fail("unknown record '" + tok + "'");
    }
  }
  if (!header_seen) fail(origin + ": empty file, expected 'graph v1' header");
  if (vertex_order.empty()) fail(origin + ": no vertices");
  if (vertex_order.size() == 1 && edges.empty())
    return single_vertex_graph(vertex_order[0], measures[vertex_order[0]]);

  // Intern in declared order so the loaded graph preserves vertex order.
  WeightedGraph g;
  for (const auto& id : vertex_order) {
    int idx = g.size();
    g.index_[id] = idx;
    g.ids_.push_back(id);
  }
  for (const auto& [a, b, w] : edges) {
    std::pair<int, int> key = std::minmax(g.index_.at(a), g.index_.at(b));
    g.edges_.push_back({key.first, key.second, w});
  }
  g.finalize(MeasureMode::custom, measures);
  return g;
}

WeightedGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return graph_from_string(ss.str(), path);
}

}  // namespace heatcert
