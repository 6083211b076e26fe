#include "heatcert/metric.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace heatcert {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EdgeWeights default_intrinsic_weights(const WeightedGraph& g) {
  EdgeWeights ew;
  ew.w.reserve(g.edges().size());
  for (const Edge& e : g.edges()) {
    double d = std::max(g.weighted_degree(e.u), g.weighted_degree(e.v));
    ew.w.push_back(1.0 / std::sqrt(d));
  }
  return ew;
}

EdgeWeights combinatorial_weights(const WeightedGraph& g) {
  EdgeWeights ew;
  ew.w.assign(g.edges().size(), 1.0);
  return ew;
}

EdgeWeights load_metric_weights(const WeightedGraph& g, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<double> w(g.edges().size(), -1.0);
  // edge lookup map (u,v) -> index
  std::map<std::pair<int, int>, int> pos;
  for (size_t i = 0; i < g.edges().size(); ++i)
    pos[{g.edges()[i].u, g.edges()[i].v}] = static_cast<int>(i);
  auto parse_fail = [&](const std::string& msg) {
    throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (!header) {
      std::string ver;
      if (tok != "metric" || !(ls >> ver) || ver != "v1")
        parse_fail("expected header 'metric v1'");
      header = true;
      continue;
    }
    if (tok != "w") parse_fail("unknown record '" + tok + "'");
    std::string a, b;
    double val;
    if (!(ls >> a >> b >> val)) parse_fail("w line needs '<id> <id> <value>'");
    if (!(val > 0.0) || !std::isfinite(val))
      parse_fail("nonpositive metric weight on edge (" + a + ", " + b + ")");
    std::pair<int, int> key = std::minmax(g.index_of(a), g.index_of(b));
    auto it = pos.find(key);
    if (it == pos.end()) parse_fail("(" + a + ", " + b + ") is not an edge");
    w[it->second] = val;
  }
  if (!header) throw std::invalid_argument(path + ": missing 'metric v1' header");
  for (size_t i = 0; i < w.size(); ++i)
    if (w[i] < 0.0)
      throw std::invalid_argument(path + ": no weight given for edge (" +
                                  g.id(g.edges()[i].u) + ", " +
                                  g.id(g.edges()[i].v) + ")");
  return {std::move(w)};
}

MetricStructure MetricStructure::all_pairs_distances(const WeightedGraph& g,
                                                     const EdgeWeights& ew) {
  if (ew.w.size() != g.edges().size())
    throw std::invalid_argument("edge weight table does not match the graph");
  for (size_t i = 0; i < ew.w.size(); ++i)
    if (!(ew.w[i] > 0.0) || !std::isfinite(ew.w[i]))
      throw std::invalid_argument("nonpositive metric weight on edge (" +
                                  g.id(g.edges()[i].u) + ", " +
                                  g.id(g.edges()[i].v) + ")");

  MetricStructure ms;
  const int n = g.size();
  ms.n_ = n;
  ms.g_ = &g;
  ms.w_ = ew;
  ms.dist_.assign(static_cast<size_t>(n) * n, kInf);

  // weighted adjacency of metric lengths
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (size_t i = 0; i < g.edges().size(); ++i) {
    const Edge& e = g.edges()[i];
    adj[e.u].emplace_back(e.v, ew.w[i]);
    adj[e.v].emplace_back(e.u, ew.w[i]);
  }

  using Item = std::pair<double, int>;
  std::vector<double> d(n);
  for (int s = 0; s < n; ++s) {
    std::fill(d.begin(), d.end(), kInf);
    d[s] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.emplace(0.0, s);
    while (!pq.empty()) {
      auto [du, u] = pq.top();
      pq.pop();
      if (du > d[u]) continue;
      for (auto [v, len] : adj[u]) {
        double cand = du + len;
        if (cand < d[v]) {
          d[v] = cand;
          pq.emplace(cand, v);
        }
      }
    }
    std::copy(d.begin(), d.end(), ms.dist_.begin() + static_cast<size_t>(s) * n);
  }

  // rounding can differ between the two sweep directions of a pair; take the
  // smaller realized path sum so rho is exactly symmetric
  for (int x = 0; x < n; ++x)
    for (int y = x + 1; y < n; ++y) {
      double v = std::min(ms.dist_[ms.idx(x, y)], ms.dist_[ms.idx(y, x)]);
      ms.dist_[ms.idx(x, y)] = v;
      ms.dist_[ms.idx(y, x)] = v;
    }

  ms.breaks_.resize(n);
  ms.order_.resize(n);
  ms.prefix_m_.resize(n);
  double diam = 0.0;
  for (int s = 0; s < n; ++s) {
    const double* row = ms.row(s);
    std::vector<int>& ord = ms.order_[s];
    ord.resize(n);
    for (int i = 0; i < n; ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [row](int a, int b) {
      return row[a] != row[b] ? row[a] < row[b] : a < b;
    });
    std::vector<double>& pm = ms.prefix_m_[s];
    pm.resize(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += g.measure(ord[i]);
      pm[i] = acc;
    }
    std::vector<double>& bp = ms.breaks_[s];
    bp.clear();
    for (int i = 0; i < n; ++i)
      if (i == 0 || row[ord[i]] != row[ord[i - 1]]) bp.push_back(row[ord[i]]);
    diam = std::max(diam, row[ord[n - 1]]);
  }
  ms.diameter_ = diam;

  // S equals the largest metric length of an edge: every edge either leaves
  // some ball or is incident to one of its endpoints.
  double s_max = 0.0;
  for (const Edge& e : g.edges())
    s_max = std::max(s_max, ms.distance(e.u, e.v));
  ms.global_jump_ = s_max;
  return ms;
}

std::vector<int> MetricStructure::ball(int x, double r) const {
  if (r < 0.0) throw std::invalid_argument("negative ball radius");
  std::vector<int> out;
  const double* rw = row(x);
  for (int y = 0; y < n_; ++y)
    if (rw[y] <= r) out.push_back(y);
  return out;
}

int MetricStructure::ball_size(int x, double r) const {
  if (r < 0.0) throw std::invalid_argument("negative ball radius");
  const double* rw = row(x);
  const std::vector<int>& ord = order_[x];
  int lo = 0, hi = n_;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (rw[ord[mid]] <= r)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

double MetricStructure::ball_measure(int x, double r) const {
  int k = ball_size(x, r);
  return k == 0 ? 0.0 : prefix_m_[x][k - 1];
}

double MetricStructure::ball_measure_below(int x, double r) const {
  if (r < 0.0) throw std::invalid_argument("negative ball radius");
  const double* rw = row(x);
  const std::vector<int>& ord = order_[x];
  int lo = 0, hi = n_;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (rw[ord[mid]] < r)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo == 0 ? 0.0 : prefix_m_[x][lo - 1];
}

double MetricStructure::jump_size(int x, double r) const {
  if (r < 0.0) throw std::invalid_argument("negative radius");
  const double* rw = row(x);
  double s = 0.0;
  for (const Edge& e : g_->edges()) {
    bool in_u = rw[e.u] <= r, in_v = rw[e.v] <= r;
    if (in_u != in_v) s = std::max(s, distance(e.u, e.v));
    if (e.u == x || e.v == x) s = std::max(s, distance(e.u, e.v));
  }
  return s;
}

double MetricStructure::annulus_jump_sup(int x, double a, double b) const {
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("negative radius");
  if (a > b) throw std::invalid_argument("annulus with a > b");
  // s_x is a right-continuous step function whose jumps occur at the ball
  // breakpoints, so the sup over [a,b] is attained on breakpoints plus a.
  double s = jump_size(x, a);
  const std::vector<double>& bp = breaks_[x];
  auto lo = std::upper_bound(bp.begin(), bp.end(), a);
  for (auto it = lo; it != bp.end() && *it <= b; ++it)
    s = std::max(s, jump_size(x, *it));
  return s;
}

double MetricStructure::jump_sup_over_set(const std::vector<int>& ball_set,
                                          double r) const {
  double s = 0.0;
  for (int x : ball_set) s = std::max(s, jump_size(x, r));
  return s;
}

void MetricStructure::export_distances_csv(const WeightedGraph& g,
                                           const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open '" + path + "' for writing");
  out << "source,target,rho\n";
  char buf[40];
  for (int x = 0; x < n_; ++x)
    for (int y = 0; y < n_; ++y) {
      std::snprintf(buf, sizeof(buf), "%.17g", distance(x, y));
      out << g.id(x) << "," << g.id(y) << "," << buf << "\n";
    }
}

IntrinsicReport verify_intrinsic(const WeightedGraph& g,
                                 const std::vector<double>& rho) {
  const int n = g.size();
  if (rho.size() != static_cast<size_t>(n) * n)
    throw std::invalid_argument("rho table shape mismatch: expected " +
                                std::to_string(n) + "x" + std::to_string(n));
  IntrinsicReport rep;
  rep.quadratic_sums.resize(n, 0.0);
  rep.pass = true;
  rep.worst_slack = kInf;
  for (int x = 0; x < n; ++x) {
    double sum = 0.0;
    for (auto [y, b] : g.neighbors(x)) {
      double d = rho[static_cast<size_t>(x) * n + y];
      sum += b * d * d;
    }
    rep.quadratic_sums[x] = sum;
    double slack = g.measure(x) - sum;
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_vertex = x;
    }
    if (sum > g.measure(x) * (1.0 + 1e-12)) rep.pass = false;
  }
  return rep;
}

IntrinsicReport verify_intrinsic(const WeightedGraph& g,
                                 const MetricStructure& metric) {
  if (metric.size() != g.size())
    throw std::invalid_argument("rho table shape mismatch");
  const int n = g.size();
  std::vector<double> rho(static_cast<size_t>(n) * n);
  for (int x = 0; x < n; ++x)
    std::copy(metric.row(x), metric.row(x) + n,
              rho.begin() + static_cast<size_t>(x) * n);
  return verify_intrinsic(g, rho);
}

}  // namespace heatcert
