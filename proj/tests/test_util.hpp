#pragma once

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "heatcert/graph.hpp"
#include "heatcert/spectral.hpp"

namespace heatcert::testutil {

/// Independent all-pairs oracle: Bellman-Ford style relaxation sweeps until
/// fixpoint. Shares no code with the Dijkstra production path.
inline std::vector<double> relaxation_distances(const WeightedGraph& g,
                                                const std::vector<double>& w) {
  const int n = g.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(static_cast<size_t>(n) * n, inf);
  for (int s = 0; s < n; ++s) d[static_cast<size_t>(s) * n + s] = 0.0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < n; ++s) {
      double* row = d.data() + static_cast<size_t>(s) * n;
      for (size_t i = 0; i < g.edges().size(); ++i) {
        const Edge& e = g.edges()[i];
        double via_u = row[e.u] + w[i];
        if (via_u < row[e.v]) {
          row[e.v] = via_u;
          changed = true;
        }
        double via_v = row[e.v] + w[i];
        if (via_v < row[e.u]) {
          row[e.u] = via_v;
          changed = true;
        }
      }
    }
  }
  // same symmetrization rule as the production path: the smaller realized
  // sum of the two sweep directions
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double v = std::min(d[static_cast<size_t>(x) * n + y],
                          d[static_cast<size_t>(y) * n + x]);
      d[static_cast<size_t>(x) * n + y] = v;
      d[static_cast<size_t>(y) * n + x] = v;
    }
  return d;
}

/// Independent double-sum oracle for <Delta f, f>_m.
inline double energy_double_sum(const WeightedGraph& g, const Vector& f) {
  double acc = 0.0;
  for (int x = 0; x < g.size(); ++x)
    for (auto [y, b] : g.neighbors(x)) {
      double diff = f(x) - f(y);
      acc += b * diff * diff;
    }
  return 0.5 * acc;
}

inline Vector random_vector(int n, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = unif(rng);
  return v;
}

/// Random connected graph on n vertices: a random spanning tree plus extra
/// edges, weights uniform in [wlo, whi].
inline WeightedGraph random_connected_graph(int n, int extra_edges,
                                            std::mt19937_64& rng,
                                            double wlo = 0.5, double whi = 2.0,
                                            MeasureMode mode = MeasureMode::counting) {
  std::uniform_real_distribution<double> wdist(wlo, whi);
  std::vector<std::tuple<std::string, std::string, double>> edges;
  std::set<std::pair<int, int>> used;
  for (int v = 1; v < n; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    int u = pick(rng);
    used.insert({u, v});
    edges.emplace_back(std::to_string(u), std::to_string(v), wdist(rng));
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int k = 0; k < extra_edges; ++k) {
    int u = pick(rng), v = pick(rng);
    if (u == v) continue;
    auto key = std::minmax(u, v);
    if (!used.insert(key).second) continue;
    edges.emplace_back(std::to_string(key.first), std::to_string(key.second),
                       wdist(rng));
  }
  return build_graph(edges, mode);
}

}  // namespace heatcert::testutil
