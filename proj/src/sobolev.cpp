#include "heatcert/sobolev.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace heatcert {

namespace {

// Internal flattened view: u restricted to ball coordinates, with the
// boundary-edge contribution folded into a per-vertex quadratic term.
struct BallQuadratic {
  const WeightedGraph* g;
  std::vector<int> verts;           // ball vertex indices
  std::vector<int> slot;            // graph index -> ball slot (-1 outside)
  std::vector<std::array<double, 3>> inner_edges;  // (slot_u, slot_v, b)
  std::vector<double> boundary;     // sum of b over edges leaving the ball
  std::vector<double> m;            // measures on the ball
  double ball_measure = 0.0;

  explicit BallQuadratic(const SobolevProblem& p) {
    g = p.g;
    verts = p.ball;
    slot.assign(g->size(), -1);
    for (size_t i = 0; i < verts.size(); ++i) slot[verts[i]] = (int)i;
    boundary.assign(verts.size(), 0.0);
    m.resize(verts.size());
    for (size_t i = 0; i < verts.size(); ++i) {
      m[i] = g->measure(verts[i]);
      ball_measure += m[i];
    }
    for (const Edge& e : g->edges()) {
      int su = slot[e.u], sv = slot[e.v];
      if (su >= 0 && sv >= 0)
        inner_edges.push_back({(double)su, (double)sv, e.b});
      else if (su >= 0)
        boundary[su] += e.b;
      else if (sv >= 0)
        boundary[sv] += e.b;
    }
  }

  // |||grad u|||_2^2 for u given in ball coordinates (zero outside)
  double energy(const std::vector<double>& u) const {
    double acc = 0.0;
    for (const auto& e : inner_edges) {
      double d = u[(size_t)e[0]] - u[(size_t)e[1]];
      acc += e[2] * d * d;
    }
    for (size_t i = 0; i < u.size(); ++i) acc += boundary[i] * u[i] * u[i];
    return 2.0 * acc;
  }

  double norm2_sq(const std::vector<double>& u) const {
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i) acc += m[i] * u[i] * u[i];
    return acc;
  }

  double norm_q_sq(const std::vector<double>& u, double q) const {
    double acc = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
      acc += m[i] * std::pow(std::abs(u[i]), q);
    return std::pow(acc, 2.0 / q);
  }

  double ratio(const std::vector<double>& u, double r, double n) const {
    double den = r * r * energy(u) + norm2_sq(u);
    double num = std::pow(ball_measure, 2.0 / n) * norm_q_sq(u, 2.0 * n / (n - 2.0));
    return num / den;
  }
};

}  // namespace

void SobolevProblem::validate() const {
  if (g == nullptr) throw std::invalid_argument("problem has no graph");
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  if (ball.empty()) throw std::invalid_argument("empty support set");
  std::set<int> seen;
  for (int v : ball) {
    if (v < 0 || v >= g->size())
      throw std::invalid_argument("support vertex out of range");
    if (!seen.insert(v).second)
      throw std::invalid_argument("duplicate vertex in support set");
  }
}

double sobolev_ratio(const SobolevProblem& p, const Vector& u) {
  p.validate();
  if (u.size() != p.g->size())
    throw std::invalid_argument("function length does not match vertex count");
  std::vector<char> in_ball(p.g->size(), 0);
  for (int v : p.ball) in_ball[v] = 1;
  bool nonzero = false;
  for (int x = 0; x < p.g->size(); ++x) {
    if (u(x) != 0.0) {
      if (!in_ball[x])
        throw std::invalid_argument("support violation: u is nonzero at '" +
                                    p.g->id(x) + "' outside the ball");
      nonzero = true;
    }
  }
  if (!nonzero) throw std::invalid_argument("zero function");

  BallQuadratic bq(p);
  std::vector<double> ub(p.ball.size());
  for (size_t i = 0; i < p.ball.size(); ++i) ub[i] = u(p.ball[i]);
  return bq.ratio(ub, p.r, p.n);
}

namespace {

void project_and_normalize(const BallQuadratic& bq, std::vector<double>& u) {
  double nrm = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0) u[i] = 0.0;
    nrm += bq.m[i] * u[i] * u[i];
  }
  if (nrm == 0.0) return;
  nrm = std::sqrt(nrm);
  for (double& v : u) v /= nrm;
}

// One projected-gradient ascent run; returns the best ratio reached.
double ascend(const BallQuadratic& bq, double r, double n,
              std::vector<double>& u, int max_iters, double tol,
              long long* iterations, bool* stationary) {
  const double q = 2.0 * n / (n - 2.0);
  project_and_normalize(bq, u);
  double nrm2 = bq.norm2_sq(u);
  if (nrm2 == 0.0) {
    u.assign(u.size(), 0.0);
    u[0] = 1.0;
    project_and_normalize(bq, u);
  }
  double best = bq.ratio(u, r, n);
  double step = 1.0;
  *stationary = false;
  for (int it = 0; it < max_iters; ++it) {
    ++*iterations;
    // natural gradient of log ratio: d/du [log ||u||_q^2 - log den]
    double qs = 0.0;
    for (size_t i = 0; i < u.size(); ++i)
      qs += bq.m[i] * std::pow(u[i], q);
    double den = r * r * bq.energy(u) + bq.norm2_sq(u);
    std::vector<double> grad(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
      double gq = 2.0 * std::pow(u[i], q - 1.0) / qs;
      double gden = 2.0 * u[i] / den;
      grad[i] = gq - gden;
    }
    // energy part of the denominator gradient: 4 b (u_i - u_j) terms
    for (const auto& e : bq.inner_edges) {
      size_t a = (size_t)e[0], b = (size_t)e[1];
      double d = u[a] - u[b];
      double c = 4.0 * r * r * e[2] * d / den;
      grad[a] -= c / bq.m[a];
      grad[b] += c / bq.m[b];
    }
    for (size_t i = 0; i < u.size(); ++i)
      grad[i] -= 4.0 * r * r * bq.boundary[i] * u[i] / (den * bq.m[i]);

    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      std::vector<double> cand = u;
      for (size_t i = 0; i < u.size(); ++i) cand[i] += step * grad[i];
      project_and_normalize(bq, cand);
      if (bq.norm2_sq(cand) == 0.0) {
        step *= 0.5;
        continue;
      }
      double val = bq.ratio(cand, r, n);
      if (val > best) {
        double gain = val - best;
        u = std::move(cand);
        best = val;
        improved = true;
        step *= 1.5;
        if (gain < tol * std::max(1.0, best)) {
          *stationary = true;
          return best;
        }
        break;
      }
      step *= 0.5;
    }
    if (!improved) {
      *stationary = true;
      return best;
    }
  }
  return best;
}

}  // namespace

OptimizationResult minimal_sobolev_constant(const SobolevProblem& p,
                                            const OptimizerBudget& budget,
                                            const MetricStructure* metric,
                                            const std::vector<Vector>* extra) {
  p.validate();
  if (budget.restarts < 1) throw std::invalid_argument("budget needs restarts >= 1");
  BallQuadratic bq(p);
  const size_t k = p.ball.size();

  std::vector<std::vector<double>> seeds;
  // structured seeds: vertex indicators and cutoff profiles around each
  // ball vertex (the shapes the proofs use as test functions)
  for (size_t i = 0; i < k; ++i) {
    std::vector<double> s(k, 0.0);
    s[i] = 1.0;
    seeds.push_back(std::move(s));
  }
  seeds.emplace_back(k, 1.0);  // constant profile
  if (metric != nullptr) {
    for (size_t i = 0; i < std::min<size_t>(k, 8); ++i) {
      for (double scale : {0.5, 1.0}) {
        std::vector<double> s(k);
        bool nonzero = false;
        for (size_t j = 0; j < k; ++j) {
          double v = scale * p.r - metric->distance(p.ball[i], p.ball[j]);
          s[j] = std::max(v, 0.0);
          nonzero |= s[j] > 0.0;
        }
        if (nonzero) seeds.push_back(std::move(s));
      }
    }
  }
  if (extra != nullptr) {
    for (const Vector& e : *extra) {
      if (e.size() != p.g->size()) continue;
      std::vector<double> s(k);
      for (size_t i = 0; i < k; ++i) s[i] = std::max(e(p.ball[i]), 0.0);
      seeds.push_back(std::move(s));
    }
  }

  std::mt19937_64 rng(budget.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  OptimizationResult res;
  res.tolerance = budget.tolerance;
  res.phi_star = -1.0;
  bool all_stationary = true;
  std::vector<double> u(k), best_u;
  for (int restart = 0; restart < budget.restarts; ++restart) {
    if (restart < (int)seeds.size()) {
      u = seeds[restart];
    } else {
      for (size_t i = 0; i < k; ++i) u[i] = std::abs(gauss(rng));
    }
    bool stationary = false;
    double val = ascend(bq, p.r, p.n, u, budget.max_iterations,
                        budget.tolerance, &res.total_iterations, &stationary);
    all_stationary = all_stationary && stationary;
    if (val > res.phi_star) {
      res.phi_star = val;
      best_u = u;
    }
    ++res.restarts_used;
  }
  res.stationary = all_stationary;
  res.maximizer = Vector::Zero(p.g->size());
  for (size_t i = 0; i < k; ++i) res.maximizer(p.ball[i]) = best_u[i];
  res.certification = all_stationary ? "heuristic-multistart"
                                     : "heuristic-multistart-nonstationary";
  return res;
}

bool certify_with_grid(OptimizationResult& result, const SobolevProblem& p,
                       double resolution) {
  if (p.ball.size() > 4) return false;
  GridOracleResult oracle = grid_oracle_constant(p, resolution);
  if (std::abs(result.phi_star - oracle.value) > 0.01 * oracle.value)
    return false;
  if (oracle.value > result.phi_star) {
    result.phi_star = oracle.value;
    result.maximizer = oracle.argmax;
  }
  result.certification = "grid-certified";
  result.grid_resolution = resolution;
  return true;
}

GridOracleResult grid_oracle_constant(const SobolevProblem& p,
                                      double resolution) {
  p.validate();
  if (p.ball.size() > 4)
    throw std::invalid_argument("grid oracle handles balls of at most 4 vertices");
  if (!(resolution > 0.0) || resolution > 1.0)
    throw std::invalid_argument("resolution must lie in (0, 1]");
  BallQuadratic bq(p);
  const size_t k = p.ball.size();

  GridOracleResult out;
  out.resolution = resolution;
  const long long steps = std::llround(1.0 / resolution);
  // angle tables over one quarter turn
  std::vector<double> cs(steps + 1), sn(steps + 1);
  for (long long i = 0; i <= steps; ++i) {
    double th = (M_PI / 2.0) * static_cast<double>(i) / steps;
    cs[i] = std::cos(th);
    sn[i] = std::sin(th);
  }

  std::vector<double> best_u;
  double best = -1.0;
  std::vector<double> u(k);
  auto consider = [&](const std::vector<double>& v) {
    ++out.points;
    double val = bq.ratio(v, p.r, p.n);
    if (val > best) {
      best = val;
      best_u = v;
    }
  };

  // u = M^{-1/2} v with v on the nonnegative Euclidean unit sphere
  auto unscale = [&](std::vector<double>& v) {
    for (size_t i = 0; i < k; ++i) v[i] /= std::sqrt(bq.m[i]);
  };
  if (k == 1) {
    u = {1.0};
    unscale(u);
    consider(u);
  } else if (k == 2) {
    for (long long i = 0; i <= steps; ++i) {
      u = {cs[i], sn[i]};
      if (u[0] == 0.0 && u[1] == 0.0) continue;
      unscale(u);
      consider(u);
    }
  } else if (k == 3) {
    for (long long i = 0; i <= steps; ++i)
      for (long long j = 0; j <= steps; ++j) {
        u = {cs[i], sn[i] * cs[j], sn[i] * sn[j]};
        if (u[0] == 0.0 && u[1] == 0.0 && u[2] == 0.0) continue;
        unscale(u);
        consider(u);
      }
  } else {
    for (long long i = 0; i <= steps; ++i)
      for (long long j = 0; j <= steps; ++j)
        for (long long l = 0; l <= steps; ++l) {
          u = {cs[i], sn[i] * cs[j], sn[i] * sn[j] * cs[l],
               sn[i] * sn[j] * sn[l]};
          if (u[0] == 0.0 && u[1] == 0.0 && u[2] == 0.0 && u[3] == 0.0) continue;
          unscale(u);
          consider(u);
        }
  }

  out.value = best;
  out.argmax = Vector::Zero(p.g->size());
  for (size_t i = 0; i < k; ++i) out.argmax(p.ball[i]) = best_u[i];
  return out;
}

NashReport nash_check(const SobolevProblem& p, double C, int samples,
                      uint64_t seed) {
  p.validate();
  if (samples < 1) throw std::invalid_argument("nash check needs samples >= 1");
  BallQuadratic bq(p);
  const size_t k = p.ball.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  NashReport rep;
  rep.samples = samples;
  rep.pass = true;
  rep.min_log_margin = std::numeric_limits<double>::infinity();
  std::vector<double> u(k);
  for (int s = 0; s < samples; ++s) {
    double sum = 0.0;
    for (size_t i = 0; i < k; ++i) {
      u[i] = unif(rng);
      sum += u[i];
    }
    if (sum == 0.0) u[0] = 1.0;
    double n2 = bq.norm2_sq(u);
    double n1 = 0.0;
    for (size_t i = 0; i < k; ++i) n1 += bq.m[i] * u[i];
    double lhs_log = (1.0 + 2.0 / p.n) * std::log(n2);
    double den = bq.energy(u) + n2 / (p.r * p.r);
    double rhs_log = (C > 0.0 ? std::log(C) : -std::numeric_limits<double>::infinity()) +
                     std::log(den) + (4.0 / p.n) * std::log(n1);
    double margin = rhs_log - lhs_log;
    if (margin < rep.min_log_margin) {
      rep.min_log_margin = margin;
      rep.worst_sample = s;
    }
    if (margin < -1e-9) rep.pass = false;
  }
  return rep;
}

}  // namespace heatcert
