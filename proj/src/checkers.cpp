#include "heatcert/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace heatcert {

namespace {

constexpr double kKernelFloor = 1e-300;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> breakpoints_in(const MetricStructure& metric, int x,
                                   double lo, double hi, bool include_lo) {
  std::vector<double> out;
  if (include_lo) out.push_back(lo);
  for (double d : metric.breakpoints(x))
    if (d > lo && d <= hi) out.push_back(d);
  return out;
}

// trapezoid integral of fn over [a, b] on `nodes` points plus a Richardson
// error estimate from the half-resolution rule
struct Quadrature {
  double value = 0.0;
  double error_estimate = 0.0;
};

Quadrature trapezoid_with_estimate(const std::function<double(double)>& fn,
                                   double a, double b, int nodes) {
  if (nodes < 5 || nodes % 2 == 0)
    throw std::invalid_argument("quadrature needs an odd node count >= 5");
  const double h = (b - a) / (nodes - 1);
  std::vector<double> vals(nodes);
  for (int i = 0; i < nodes; ++i) vals[i] = fn(a + h * i);
  double fine = 0.5 * (vals.front() + vals.back());
  for (int i = 1; i + 1 < nodes; ++i) fine += vals[i];
  fine *= h;
  double coarse = 0.5 * (vals.front() + vals.back());
  for (int i = 2; i + 1 < nodes; i += 2) coarse += vals[i];
  coarse *= 2.0 * h;
  Quadrature q;
  q.value = fine;
  q.error_estimate = std::abs(fine - coarse) / 3.0;
  return q;
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -kInf; }

}  // namespace

void Certificate::add_flag(const std::string& f) {
  if (!has_flag(f)) flags.push_back(f);
}

bool Certificate::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void Certificate::offer(double margin, Json witness_candidate) {
  if (margin < min_log_margin) {
    min_log_margin = margin;
    witness = std::move(witness_candidate);
  }
}

Json Certificate::to_json() const {
  Json j;
  j["condition"] = condition;
  j["params"] = params;
  j["grid"] = grid;
  j["min_log_margin"] = min_log_margin;
  j["witness"] = witness;
  j["pass"] = pass;
  j["flags"] = flags;
  return j;
}

std::vector<double> TimeGrid::points() const {
  if (!(t_min > 0.0) || t_max < t_min)
    throw std::invalid_argument("time grid needs 0 < t_min <= t_max");
  if (per_decade < 1) throw std::invalid_argument("per_decade must be >= 1");
  std::vector<double> pts;
  double log10_min = std::log10(t_min);
  double log10_max = std::log10(t_max);
  long long i = 0;
  while (true) {
    double lg = log10_min + static_cast<double>(i) / per_decade;
    if (lg >= log10_max) break;
    pts.push_back(std::pow(10.0, lg));
    ++i;
  }
  pts.push_back(t_max);
  return pts;
}

// ---------------------------------------------------------------------------
// (V)

double volume_doubling_point_margin(const WeightedGraph& g,
                                    const MetricStructure& metric,
                                    const DimFn& n, const LogPhiFn& log_phi,
                                    int x, double r1, double r2,
                                    bool r1_left_limit) {
  (void)g;
  double m1 = r1_left_limit ? metric.ball_measure_below(x, r1)
                            : metric.ball_measure(x, r1);
  if (m1 <= 0.0) return kInf;  // empty left-limit ball: no continuum point
  double m2 = metric.ball_measure(x, r2);
  return log_phi(x, r1, r2) + n(x, r2) * (std::log(r2) - std::log(r1)) +
         std::log(m1) - std::log(m2);
}

Certificate check_volume_doubling(const WeightedGraph& g,
                                  const MetricStructure& metric,
                                  const std::vector<int>& B, const DimFn& n,
                                  const LogPhiFn& log_phi, double R1,
                                  double R2) {
  if (!(R1 > 0.0) || R2 < R1)
    throw std::invalid_argument("volume doubling needs 0 < R1 <= R2");
  if (B.empty()) throw std::invalid_argument("empty radius range or ball set");
  Certificate cert;
  cert.condition = "V";
  cert.params = {{"R1", R1}, {"R2", R2}, {"ball_size", B.size()}};
  long long pts = 0;
  for (int x : B) {
    std::vector<double> r2s = breakpoints_in(metric, x, R1, R2, true);
    if (std::find(r2s.begin(), r2s.end(), R2) == r2s.end()) r2s.push_back(R2);
    for (double r2 : r2s) {
      std::vector<double> r1s = breakpoints_in(metric, x, R1, r2, true);
      for (double r1 : r1s) {
        ++pts;
        double at = volume_doubling_point_margin(g, metric, n, log_phi, x, r1,
                                                 r2, false);
        if (at < cert.min_log_margin)
          cert.offer(at, Json{{"x", g.id(x)},
                              {"r1", r1},
                              {"r2", r2},
                              {"r1_left_limit", false}});
        if (r1 > R1) {
          ++pts;
          double below = volume_doubling_point_margin(g, metric, n, log_phi, x,
                                                      r1, r2, true);
          if (below < cert.min_log_margin)
            cert.offer(below, Json{{"x", g.id(x)},
                                   {"r1", r1},
                                   {"r2", r2},
                                   {"r1_left_limit", true}});
        }
      }
    }
  }
  cert.grid = {{"type", "breakpoint-pairs-with-left-limits"}, {"points", pts}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// (G)

double gaussian_point_margin(const WeightedGraph& g,
                             const SpectralDecomposition& dec,
                             const MetricStructure& metric, const DimFn& n,
                             const LogPsiFn& log_psi, double R2, double Lambda,
                             int x, int y, double t, bool* underflow) {
  (void)g;
  if (underflow != nullptr) *underflow = false;
  double p = heat_kernel(dec, t, x, y);
  if (p < -1e-12)
    throw std::runtime_error("heat kernel evaluated significantly negative: " +
                             std::to_string(p));
  double S = metric.global_jump_size();
  double rho = metric.distance(x, y);
  double tau = std::min(std::sqrt(t), R2);
  double nxy = 0.5 * (n(x, tau) + n(y, tau));
  double a = rho * S;
  double hyp = std::hypot(t, a);
  double u = rho * rho / (t + hyp);  // S^{-2} (sqrt(t^2 + rho^2 S^2) - t)
  double log_rhs = log_psi(x, tau) + log_psi(y, tau) +
                   0.5 * nxy * std::max(0.0, std::log(u)) -
                   0.5 * (std::log(metric.ball_measure(x, tau)) +
                          std::log(metric.ball_measure(y, tau))) -
                   Lambda * (t - std::min(t, R2 * R2)) - zeta(rho, t, S);
  if (p < kKernelFloor) {
    if (underflow != nullptr) *underflow = true;
    return kInf;
  }
  return log_rhs - std::log(p);
}

Certificate check_gaussian(const WeightedGraph& g,
                           const SpectralDecomposition& dec,
                           const MetricStructure& metric,
                           const std::vector<int>& B,
                           const std::vector<int>& centers, const DimFn& n,
                           const LogPsiFn& log_psi, double R1, double R2,
                           const TimeGrid& grid, double Lambda,
                           const GaussianRowSink& row_sink) {
  if (!(R1 > 0.0) || R2 < R1)
    throw std::invalid_argument("gaussian check needs 0 < R1 <= R2");
  if (grid.t_min < R1 * R1 * (1.0 - 1e-12))
    throw std::invalid_argument("time grid starts below R1^2");
  Certificate cert;
  cert.condition = "G";
  cert.params = {{"R1", R1},
                 {"R2", R2},
                 {"Lambda", Lambda},
                 {"S", metric.global_jump_size()},
                 {"ball_size", B.size()},
                 {"centers", centers.size()}};
  if (centers.size() < B.size()) cert.add_flag("centers_sampled");
  std::vector<double> ts = grid.points();
  const double S = metric.global_jump_size();
  long long pts = 0;
  long long underflows = 0;
  std::vector<double> lpsi(g.size()), lmb(g.size()), nv(g.size());
  for (double t : ts) {
    double tau = std::min(std::sqrt(t), R2);
    // Psi, ball measures and the dimension depend on (vertex, tau) only
    for (int y : B) {
      lpsi[y] = log_psi(y, tau);
      lmb[y] = std::log(metric.ball_measure(y, tau));
      nv[y] = n(y, tau);
    }
    double decay = Lambda * (t - std::min(t, R2 * R2));
    for (int x : centers) {
      Vector row = heat_kernel_row(dec, t, x);
      for (int y : B) {
        ++pts;
        double p = row(y);
        if (p < -1e-12)
          throw std::runtime_error("heat kernel evaluated significantly negative");
        double rho = metric.distance(x, y);
        double nxy = 0.5 * (nv[x] + nv[y]);
        double a = rho * S;
        double hyp = std::hypot(t, a);
        double u = rho * rho / (t + hyp);
        double log_rhs = lpsi[x] + lpsi[y] +
                         0.5 * nxy * std::max(0.0, std::log(u)) -
                         0.5 * (lmb[x] + lmb[y]) - decay - zeta(rho, t, S);
        if (row_sink)
          row_sink(x, y, t, std::log(std::max(p, kKernelFloor)), log_rhs);
        if (p < kKernelFloor) {
          ++underflows;
          continue;  // pass at this point, flagged below
        }
        double margin = log_rhs - std::log(p);
        if (margin < cert.min_log_margin)
          cert.offer(margin, Json{{"x", g.id(x)}, {"y", g.id(y)}, {"t", t}});
      }
    }
  }
  if (underflows > 0) cert.add_flag("kernel_underflow");
  cert.grid = {{"type", "geometric-time-grid"},
               {"t_min", grid.t_min},
               {"t_max", grid.t_max},
               {"per_decade", grid.per_decade},
               {"time_points", ts.size()},
               {"points", pts},
               {"underflow_points", underflows}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// (L)

double local_regularity_point_margin(const WeightedGraph& g,
                                     const MetricStructure& metric,
                                     const DimFn& n, double phi, int x,
                                     double r) {
  double lhs = std::log(metric.ball_measure(x, r)) - std::log(g.measure(x));
  double rhs = 0.5 * n(x, r) *
               (std::log(2.0 * phi) + std::log1p(r * r * g.weighted_degree(x)));
  return rhs - lhs;
}

Certificate check_local_regularity(const WeightedGraph& g,
                                   const MetricStructure& metric,
                                   const std::vector<int>& B, const DimFn& n,
                                   double phi, double R1, double R2) {
  if (!(phi >= 1.0)) throw std::invalid_argument("phi must be >= 1");
  if (!(R1 >= 0.0) || R2 < R1)
    throw std::invalid_argument("local regularity needs 0 <= R1 <= R2");
  Certificate cert;
  cert.condition = "L";
  cert.params = {{"R1", R1}, {"R2", R2}, {"phi", phi}, {"ball_size", B.size()}};
  long long pts = 0;
  for (int x : B) {
    for (double r : breakpoints_in(metric, x, R1, R2, true)) {
      ++pts;
      cert.offer(local_regularity_point_margin(g, metric, n, phi, x, r),
                 Json{{"x", g.id(x)}, {"r", r}});
    }
  }
  cert.grid = {{"type", "breakpoints"}, {"points", pts}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// (O)

double on_diagonal_point_margin(const WeightedGraph& g,
                                const SpectralDecomposition& dec,
                                const MetricStructure& metric,
                                const LogPsiFn& log_psi, int x, double rho) {
  (void)g;
  double p = heat_kernel(dec, rho * rho, x, x);
  double log_rhs = 2.0 * log_psi(x, rho) - std::log(metric.ball_measure(x, rho));
  if (p < kKernelFloor) return kInf;
  return log_rhs - std::log(p);
}

Certificate check_on_diagonal(const WeightedGraph& g,
                              const SpectralDecomposition& dec,
                              const MetricStructure& metric,
                              const std::vector<int>& B,
                              const LogPsiFn& log_psi, double r1, double r2,
                              int per_decade) {
  if (!(r1 > 0.0) || r2 < r1)
    throw std::invalid_argument("on-diagonal check needs 0 < r1 <= r2");
  Certificate cert;
  cert.condition = "O";
  cert.params = {{"r1", r1}, {"r2", r2}, {"ball_size", B.size()}};
  TimeGrid rho_grid{r1, r2, per_decade};
  std::vector<double> common = rho_grid.points();
  long long pts = 0;
  for (int x : B) {
    std::vector<double> rhos = common;
    for (double bp : metric.breakpoints(x))
      if (bp >= r1 && bp <= r2) rhos.push_back(bp);
    std::sort(rhos.begin(), rhos.end());
    rhos.erase(std::unique(rhos.begin(), rhos.end()), rhos.end());
    for (double rho : rhos) {
      ++pts;
      double margin = on_diagonal_point_margin(g, dec, metric, log_psi, x, rho);
      if (margin < cert.min_log_margin)
        cert.offer(margin, Json{{"x", g.id(x)}, {"rho", rho}});
    }
  }
  cert.grid = {{"type", "breakpoints-plus-geometric"},
               {"per_decade", per_decade},
               {"points", pts}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// non-collapsing

Certificate check_noncollapsing(const WeightedGraph& g,
                                const MetricStructure& metric, int x, double R,
                                double n, double C) {
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  double s0 = metric.jump_size(x, 0.0);
  if (R < 2.0 * s0)
    throw GuardViolation("radius guard violated: R >= 2 s_x(0) (R = " +
                         std::to_string(R) + ", s_x(0) = " + std::to_string(s0) +
                         ")");
  if (R > metric.diameter() / 2.0 && g.size() > 1)
    throw GuardViolation("radius guard violated: R <= diam(X)/2");
  // jump guard s_x(r) <= r on [s_x(0), R/2]; s_x is a right-continuous step
  // function, so its left piece values decide
  {
    std::vector<double> probes = breakpoints_in(metric, x, s0, R / 2.0, true);
    for (double r : probes)
      if (metric.jump_size(x, r) > r * (1.0 + 1e-12))
        throw GuardViolation(
            "jump guard violated: s_x(r) <= r fails at r = " + std::to_string(r));
  }

  Certificate cert;
  cert.condition = "non-collapse";
  cert.params = {{"x", g.id(x)}, {"R", R}, {"n", n}, {"C", C}};
  const double q = (n + 2.0) / (n + 4.0);
  const double lo = 2.0 * s0;

  // critical radii: breakpoints, theta~ floor jumps, interval ends
  std::set<double> crit{lo, R};
  for (double bp : metric.breakpoints(x))
    if (bp > lo && bp < R) crit.insert(bp);
  // eta~ jumps at r = 2 s_x * 4^j within each constancy piece of s_x
  {
    std::vector<double> pieces(crit.begin(), crit.end());
    for (double a : pieces) {
      double s = metric.jump_size(x, a);
      if (s <= 0.0) continue;
      for (double r = 2.0 * s; r < R; r *= 4.0)
        if (r > lo) crit.insert(r);
    }
  }

  auto margin_at = [&](double r, double theta, double mB) {
    double log_lhs = -6.0 * n * n * kLn2 - 0.5 * n * std::log(C) +
                     theta * (0.5 * n * std::log(C) + std::log(g.measure(x)) -
                              n * std::log(r));
    double log_rhs = std::log(mB) - n * std::log(r);
    return log_rhs - log_lhs;
  };
  auto theta_at = [&](double r) {
    double s = metric.jump_size(x, r);
    FloorResult fl = floor_half_log2(r, 2.0 * s);
    return fl.infinite ? 0.0 : std::exp(static_cast<double>(fl.k) * std::log(q));
  };

  std::vector<double> cs(crit.begin(), crit.end());
  long long pts = 0;
  for (size_t i = 0; i < cs.size(); ++i) {
    double r = cs[i];
    // the point itself
    ++pts;
    cert.offer(margin_at(r, theta_at(r), metric.ball_measure(x, r)),
               Json{{"r", r}, {"limit", "at"}});
    // supremum of the piece ending here (left-piece values, radius r)
    if (i > 0) {
      double a = cs[i - 1];
      ++pts;
      cert.offer(margin_at(r, theta_at(a), metric.ball_measure(x, a)),
                 Json{{"r", r}, {"limit", "left-piece"}});
    }
  }
  cert.grid = {{"type", "breakpoints-plus-floor-jumps"}, {"points", pts}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// ball comparison

Certificate check_ball_comparison(const WeightedGraph& g,
                                  const MetricStructure& metric, int o,
                                  double r, double d, double log_phi_const,
                                  const Certificate& doubling_hypothesis) {
  if (!(d > 0.0)) throw std::invalid_argument("d must be positive");
  if (doubling_hypothesis.condition != "V" || !doubling_hypothesis.pass)
    throw std::invalid_argument(
        "ball comparison refused: the doubling hypothesis certificate is "
        "missing or failed");
  std::vector<int> ballo = metric.ball(o, r);
  double s = metric.jump_sup_over_set(ballo, r / 4.0);
  if (r < 8.0 * s)
    throw GuardViolation(
        "radius guard violated: r >= 8 ||s(r/4)||_{B_o(r)} (r = " +
        std::to_string(r) + ", ||s|| = " + std::to_string(s) + ")");

  Certificate cert;
  cert.condition = "ball-compare";
  cert.params = {{"o", g.id(o)},
                 {"r", r},
                 {"d", d},
                 {"log_Phi", log_phi_const},
                 {"hypothesis", doubling_hypothesis.params}};
  int xmax = ballo.front(), ymin = ballo.front();
  double mmax = -kInf, mmin = kInf;
  for (int x : ballo) {
    double m = metric.ball_measure(x, r);
    if (m > mmax) {
      mmax = m;
      xmax = x;
    }
    if (m < mmin) {
      mmin = m;
      ymin = x;
    }
  }
  double margin = 18.0 * d * kLn2 + 9.0 * log_phi_const + std::log(mmin) -
                  std::log(mmax);
  cert.offer(margin, Json{{"x", g.id(xmax)}, {"y", g.id(ymin)}});
  cert.grid = {{"type", "all-pairs"},
               {"points", static_cast<long long>(ballo.size()) *
                              static_cast<long long>(ballo.size())}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// mean value

Certificate check_mean_value(const WeightedGraph& g,
                             const SpectralDecomposition& dec,
                             const MetricStructure& metric, int x, double r,
                             double n, double phi, double Phi, double tau,
                             double T, const Vector& omega, int samples,
                             uint64_t seed, int quadrature_nodes,
                             const std::vector<Vector>* explicit_f) {
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  if (!(tau > 0.0) || tau > 1.0)
    throw std::invalid_argument("tau must lie in (0, 1]");
  if (T < r * r)
    throw GuardViolation("time guard violated: T >= r^2 so the window stays "
                         "nonnegative");
  double s = metric.annulus_jump_sup(x, r / 2.0, r);
  if (r < 128.0 * s)
    throw GuardViolation(
        "radius guard violated: r >= 128 ||s_x||_[r/2,r] (r = " +
        std::to_string(r) + ", ||s_x|| = " + std::to_string(s) + ")");
  double doubling_ratio =
      metric.ball_measure(x, r) / metric.ball_measure(x, r / 2.0);
  if (Phi < doubling_ratio * (1.0 - 1e-12))
    throw GuardViolation("doubling hypothesis violated: Phi = " +
                         std::to_string(Phi) + " < m(B_x(r))/m(B_x(r/2)) = " +
                         std::to_string(doubling_ratio));

  OmegaContext om = make_omega_context(g, omega);
  double log_gamma = log_gamma_tilde(g, metric, x, r / 2.0, n, phi, Phi);

  Certificate cert;
  cert.condition = "mean-value";
  cert.params = {{"x", g.id(x)}, {"r", r},     {"n", n},
                 {"phi", phi},   {"Phi", Phi}, {"tau", tau},
                 {"T", T},       {"h_omega", om.h},
                 {"sobolev_hypothesis", "attested by caller"}};
  std::vector<int> ball = metric.ball(x, r);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double window = tau * r * r;
  double log_front = 2.0 * log_gamma +
                     (0.5 * n + 1.0) * std::log1p(tau * r * r * om.h) -
                     (0.5 * n + 1.0) * std::log(tau) - 2.0 * std::log(r) -
                     std::log(metric.ball_measure(x, r));
  int total = samples + (explicit_f ? (int)explicit_f->size() : 0);
  for (int smp = 0; smp < total; ++smp) {
    Vector f(g.size());
    if (explicit_f && smp >= samples) {
      f = (*explicit_f)[smp - samples];
      if (f.minCoeff() < 0.0)
        throw std::invalid_argument("explicit mean-value f must be >= 0");
    } else {
      for (int v = 0; v < g.size(); ++v) f(v) = unif(rng);
    }
    auto integrand = [&](double t) {
      Vector vt = sandwiched_semigroup(g, dec, om, t, f);
      double acc = 0.0;
      for (int v : ball) acc += g.measure(v) * vt(v) * vt(v);
      return acc;
    };
    Quadrature quad = trapezoid_with_estimate(integrand, T - window, T + window,
                                              quadrature_nodes);
    double integral_lower = quad.value - quad.error_estimate;
    Vector vT = sandwiched_semigroup(g, dec, om, T, f);
    double lhs = vT(x) * vT(x);
    double margin = (integral_lower > 0.0 && lhs > 0.0)
                        ? log_front + std::log(integral_lower) - std::log(lhs)
                        : (lhs == 0.0 ? kInf : -kInf);
    cert.offer(margin, Json{{"sample", smp},
                            {"quadrature_error", quad.error_estimate}});
  }
  cert.grid = {{"type", "sampled-f"},
               {"samples", samples},
               {"quadrature_nodes", quadrature_nodes},
               {"seed", seed}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// chi hypothesis (Davies window)

Certificate check_chi_hypothesis(
    const WeightedGraph& g, const SpectralDecomposition& dec,
    const std::vector<double>& a, const std::vector<double>& b,
    const LogChiFn& log_chi, double T, int samples, uint64_t seed,
    int quadrature_nodes,
    const std::vector<std::pair<Vector, Vector>>* explicit_fw) {
  const int nv = g.size();
  if (a.size() != static_cast<size_t>(nv) || b.size() != static_cast<size_t>(nv))
    throw std::invalid_argument("window tables must cover every vertex");
  for (int v = 0; v < nv; ++v) {
    if (a[v] < 0.0 || b[v] < a[v])
      throw std::invalid_argument("window inversion at vertex '" + g.id(v) +
                                  "'");
  }
  Certificate cert;
  cert.condition = "chi-hypothesis";
  cert.params = {{"T", T}, {"samples", samples}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_real_distribution<double> omdist(-1.0, 1.0);

  int total = samples + (explicit_fw ? (int)explicit_fw->size() : 0);
  for (int smp = 0; smp < total; ++smp) {
    Vector f(nv), w(nv);
    if (explicit_fw && smp >= samples) {
      f = (*explicit_fw)[smp - samples].first;
      w = (*explicit_fw)[smp - samples].second;
    } else {
      for (int v = 0; v < nv; ++v) {
        f(v) = unif(rng);
        w(v) = omdist(rng);
      }
    }
    OmegaContext om = make_omega_context(g, w);
    Vector pT = sandwiched_semigroup(g, dec, om, T, f);
    for (int v = 0; v < nv; ++v) {
      if (b[v] == a[v]) continue;
      auto integrand = [&](double t) {
        Vector pt = sandwiched_semigroup(g, dec, om, t, f);
        return inner_m(g, pt, pt);
      };
      Quadrature quad =
          trapezoid_with_estimate(integrand, a[v], b[v], quadrature_nodes);
      double rhs_lower = quad.value - quad.error_estimate;
      double lhs_log = 2.0 * log_chi(v, om.h) + 2.0 * safe_log(std::abs(pT(v)));
      double margin =
          lhs_log == -kInf ? kInf : safe_log(rhs_lower) - lhs_log;
      cert.offer(margin, Json{{"sample", smp}, {"x", g.id(v)}});
    }
  }
  cert.grid = {{"type", "sampled-f-omega"},
               {"samples", samples},
               {"quadrature_nodes", quadrature_nodes},
               {"seed", seed}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// semigroup regularization

Certificate check_semigroup_regularization(const WeightedGraph& g,
                                           const SpectralDecomposition& dec,
                                           const std::vector<int>& B, double C,
                                           double n,
                                           const std::vector<double>& r_grid,
                                           int samples, uint64_t seed) {
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (r_grid.empty()) throw std::invalid_argument("empty radius grid");
  Certificate cert;
  cert.condition = "semigroup-reg";
  cert.params = {{"C", C}, {"n", n}, {"ball_size", B.size()}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (double r : r_grid) {
    if (!(r > 0.0)) throw std::invalid_argument("radius grid must be positive");
    // operator norm l1(B) -> linf(B) is the sup of the kernel over B x B
    double opnorm = 0.0;
    int wx = B.front(), wy = B.front();
    for (int x : B) {
      Vector row = heat_kernel_row(dec, r * r, x);
      for (int y : B)
        if (row(y) > opnorm) {
          opnorm = row(y);
          wx = x;
          wy = y;
        }
    }
    cert.offer(std::log(C) - n * std::log(r) - safe_log(opnorm),
               Json{{"part", "l1-linf"}, {"r", r}, {"x", g.id(wx)}, {"y", g.id(wy)}});

    for (int smp = 0; smp < samples; ++smp) {
      Vector f = Vector::Zero(g.size());
      for (int v : B) f(v) = unif(rng);
      Vector pf = heat_semigroup_apply(g, dec, r * r, f);
      Vector diff = f - pf;
      double lhs = inner_m(g, diff, diff);
      double rhs = r * r * dirichlet_energy(g, f);
      // an lhs at the level of squared roundoff on f is numerically zero
      double margin = lhs <= 1e-22 * inner_m(g, f, f)
                          ? kInf
                          : safe_log(rhs) - std::log(lhs);
      cert.offer(margin, Json{{"part", "contraction"}, {"r", r}, {"sample", smp}});
    }
  }
  cert.grid = {{"type", "radius-grid-plus-samples"},
               {"radii", r_grid.size()},
               {"samples", samples},
               {"seed", seed}};
  cert.finalize();
  return cert;
}

// ---------------------------------------------------------------------------
// weak Sobolev

Certificate check_weak_sobolev(const WeightedGraph& g,
                               const MetricStructure& metric, int o, double n,
                               double C1, double C2, double r1, double r2,
                               int samples, uint64_t seed,
                               const Certificate* semigroup_hypothesis,
                               const std::vector<Vector>* explicit_f) {
  if (!(n > 0.0)) throw std::invalid_argument("n must be positive");
  if (semigroup_hypothesis == nullptr || !semigroup_hypothesis->pass ||
      semigroup_hypothesis->condition != "semigroup-reg")
    throw std::invalid_argument(
        "weak Sobolev refused: semigroup regularization hypothesis not "
        "verified");
  Certificate cert;
  cert.condition = "weak-sobolev";
  cert.params = {{"o", g.id(o)}, {"n", n},   {"C1", C1},
                 {"C2", C2},     {"r1", r1}, {"r2", r2}};
  std::vector<int> ball = metric.ball(o, r2);
  double inv_m_sup = 0.0;
  for (int v : ball) inv_m_sup = std::max(inv_m_sup, 1.0 / g.measure(v));
  double front = 12.0 * C2 * C2 *
                 std::pow(std::max(C1, std::pow(r1, n) * inv_m_sup), 2.0 / n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int total = samples + (explicit_f ? (int)explicit_f->size() : 0);
  for (int smp = 0; smp < total; ++smp) {
    Vector f = Vector::Zero(g.size());
    if (explicit_f && smp >= samples) {
      f = (*explicit_f)[smp - samples];
    } else {
      for (int v : ball) f(v) = unif(rng);
    }
    // exact lambda-supremum over the level-set breakpoints of f
    std::vector<double> levels;
    for (int v : ball)
      if (f(v) > 0.0) levels.push_back(f(v));
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double lhs = 0.0;
    double lam_star = 0.0;
    for (double lev : levels) {
      double mass = 0.0;
      for (int v : ball)
        if (f(v) >= lev) mass += g.measure(v);
      double val = std::pow(lev, 2.0 * (1.0 + 1.0 / n)) * mass;
      if (val > lhs) {
        lhs = val;
        lam_star = lev;
      }
    }
    double l1 = 0.0, l2sq = 0.0;
    for (int v : ball) {
      l1 += g.measure(v) * f(v);
      l2sq += g.measure(v) * f(v) * f(v);
    }
    double rhs = front * (dirichlet_energy(g, f) + l2sq / (r2 * r2)) *
                 std::pow(l1, 2.0 / n);
    double margin = lhs == 0.0 ? kInf : std::log(rhs) - std::log(lhs);
    cert.offer(margin, Json{{"sample", smp}, {"lambda", lam_star}});
  }
  cert.grid = {{"type", "sampled-f"}, {"samples", samples}, {"seed", seed}};
  cert.finalize();
  return cert;
}

}  // namespace heatcert
