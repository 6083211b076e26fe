#include "heatcert/corrections.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace heatcert {

namespace {

[[noreturn]] void guard_fail(const std::string& inequality,
                             const std::string& detail) {
  throw GuardViolation("radius guard violated: " + inequality + " (" + detail +
                       ")");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double q_of(double n) { return (n + 2.0) / (n + 4.0); }

// theta = q^k for integer k (k may be negative in relaxed evaluations)
double theta_pow(double q, long long k) {
  return std::exp(static_cast<double>(k) * std::log(q));
}

}  // namespace

FloorResult nudged_floor(double x) {
  FloorResult res;
  if (std::isinf(x)) {
    res.infinite = true;
    res.k = x > 0 ? std::numeric_limits<long long>::max()
                  : std::numeric_limits<long long>::min();
    return res;
  }
  res.near_integer = std::abs(x - std::round(x)) < 1e-9;
  res.k = static_cast<long long>(std::floor(x + 1e-12));
  return res;
}

FloorResult floor_half_log2(double num, double den) {
  if (num <= 0.0)
    throw std::domain_error("floor_half_log2 needs a positive numerator");
  if (den == 0.0) {
    FloorResult res;
    res.infinite = true;
    res.k = std::numeric_limits<long long>::max();
    return res;
  }
  return nudged_floor(0.5 * (std::log2(num) - std::log2(den)));
}

double zeta(double r, double t, double S) {
  if (!(t > 0.0)) throw std::invalid_argument("zeta needs t > 0");
  if (!(S > 0.0)) throw std::invalid_argument("zeta needs S > 0");
  if (r < 0.0) throw std::invalid_argument("zeta needs r >= 0");
  double a = r * S;
  if (a == 0.0) return 0.0;
  double hyp = std::hypot(t, a);
  // t - sqrt(t^2+a^2) = -a^2/(t + hyp) avoids the cancellation for a << t
  return (a * std::asinh(a / t) - a * a / (t + hyp)) / (S * S);
}

double nu_correction(double r, double t, double S) {
  if (!(t > 0.0)) throw std::invalid_argument("nu needs t > 0");
  if (!(S > 0.0)) throw std::invalid_argument("nu needs S > 0");
  if (r < 0.0) throw std::invalid_argument("nu needs r >= 0");
  double a = r * S;
  double hyp = std::hypot(t, a);
  return 2.0 * r * r / (t * t + t * hyp);
}

DimensionSpec DimensionSpec::constant(double n) {
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  DimensionSpec d;
  d.thresholds_ = {0.0};
  d.values_ = {n};
  return d;
}

DimensionSpec DimensionSpec::step(std::vector<double> thresholds,
                                  std::vector<double> values) {
  if (thresholds.empty() || thresholds.size() != values.size())
    throw std::invalid_argument("step dimension needs matching tables");
  if (thresholds.front() != 0.0)
    throw std::invalid_argument("step dimension must start at radius 0");
  for (size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw std::invalid_argument("step dimension thresholds must increase");
  for (double v : values)
    if (!(v > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  DimensionSpec d;
  d.thresholds_ = std::move(thresholds);
  d.values_ = std::move(values);
  return d;
}

double DimensionSpec::at(double r) const {
  auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), r);
  size_t i = static_cast<size_t>(it - thresholds_.begin());
  return values_[i == 0 ? 0 : i - 1];
}

double DimensionSpec::sup(double a, double b) const {
  if (a > b) throw std::invalid_argument("dimension sup over empty interval");
  double best = at(a);
  for (size_t i = 0; i < thresholds_.size(); ++i)
    if (thresholds_[i] > a && thresholds_[i] <= b)
      best = std::max(best, values_[i]);
  return best;
}

CountingCorrections counting_corrections(double r, double R, double deg_x,
                                         double n, double S,
                                         bool allow_negative_floor) {
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  if (!(S > 0.0)) throw std::invalid_argument("jump size must be positive");
  if (!(r > 0.0) || R < r)
    throw std::invalid_argument("counting corrections need 0 < r <= R");
  if (deg_x < 0.0) throw std::invalid_argument("negative degree");

  CountingCorrections out;
  if (r < 2.0 * S && !allow_negative_floor)
    guard_fail("r >= 2S", "r = " + fmt(r) + ", S = " + fmt(S));
  if (r / 16.0 < 2.0 * S && !allow_negative_floor)
    guard_fail("r/16 >= 2S (Psi evaluates Phi at r/16)",
               "r = " + fmt(r) + ", S = " + fmt(S));

  double q = q_of(n);
  FloorResult kap = floor_half_log2(r, 2.0 * S);
  out.kappa = kap.k;
  out.near_integer_floor = kap.near_integer;
  out.negative_floor = kap.k < 0;
  out.theta = theta_pow(q, kap.k);
  out.Phi = SignedLog::from_log(3.0 * n * n * out.theta *
                                std::log1p(r * r * deg_x));

  FloorResult kap16 = floor_half_log2(r / 16.0, 2.0 * S);
  out.near_integer_floor |= kap16.near_integer;
  out.negative_floor |= kap16.k < 0;
  double theta16 = theta_pow(q, kap16.k);
  double r16 = r / 16.0;
  out.Psi = SignedLog::from_log(3.0 * n * n * theta16 *
                                std::log1p(r16 * r16 * deg_x));
  return out;
}

GeneralCorrections general_corrections(int x, double r, double R,
                                       const WeightedGraph& g,
                                       const MetricStructure& metric,
                                       const DimensionSpec& dim, double phi,
                                       bool allow_negative_floor) {
  if (!(r > 0.0) || R < r)
    throw std::invalid_argument("general corrections need 0 < r <= R");
  if (!(phi >= 1.0)) throw std::invalid_argument("phi must be >= 1");

  GeneralCorrections out;
  out.N_r = dim.sup(r / 4.0, r);
  out.N_R = dim.sup(R / 4.0, R);
  double deg = g.weighted_degree(x);

  double s_half = metric.annulus_jump_sup(x, r / 2.0, r);
  if (r < 2.0 * s_half && !allow_negative_floor)
    guard_fail("r >= 2 ||s_x||_[r/2,r]",
               "r = " + fmt(r) + ", ||s_x|| = " + fmt(s_half));
  FloorResult eta = floor_half_log2(r, 2.0 * s_half);
  out.eta = eta.k;
  out.near_integer_floor = eta.near_integer;
  out.negative_floor = !eta.infinite && eta.k < 0;
  double qR = q_of(out.N_R);
  out.theta = eta.infinite ? 0.0 : theta_pow(qR, eta.k);
  out.Phi = SignedLog::from_log(3.0 * out.N_R * out.N_R * out.theta *
                                std::log1p(r * r * deg));

  // Psi_x(r) = Phi_x^r(r/16): the inner radius is r/16, the outer is r.
  double r16 = r / 16.0;
  double s16 = metric.annulus_jump_sup(x, r16 / 2.0, r16);
  if (r16 < 2.0 * s16 && !allow_negative_floor)
    guard_fail("r/16 >= 2 ||s_x||_[r/32,r/16] (Psi evaluates Phi at r/16)",
               "r = " + fmt(r) + ", ||s_x|| = " + fmt(s16));
  FloorResult eta16 = floor_half_log2(r16, 2.0 * s16);
  out.near_integer_floor |= eta16.near_integer;
  out.negative_floor |= !eta16.infinite && eta16.k < 0;
  double qr = q_of(out.N_r);
  double theta16 = eta16.infinite ? 0.0 : theta_pow(qr, eta16.k);
  out.Psi = SignedLog::from_log(3.0 * out.N_r * out.N_r * theta16 *
                                std::log1p(r16 * r16 * deg));

  double n3 = out.N_r * out.N_r * out.N_r;
  double n2 = out.N_r * out.N_r;
  out.A = SignedLog::from_log(43.0 * n3 * kLn2 + 8.0 * n2 * std::log(phi));
  out.Aprime = SignedLog::from_log(41.0 * n3 * kLn2 + 2.0 * n2 * std::log(phi));

  double s_quarter = metric.annulus_jump_sup(x, r / 4.0, r);
  if (r < 32.0 * s_quarter && !allow_negative_floor)
    guard_fail("r >= 32 ||s_x||_[r/4,r]",
               "r = " + fmt(r) + ", ||s_x|| = " + fmt(s_quarter));
  FloorResult kz = floor_half_log2(r, 32.0 * s_quarter);
  out.kappa_z = kz.k;
  out.near_integer_floor |= kz.near_integer;
  out.negative_floor |= !kz.infinite && kz.k < 0;
  out.Theta = 3.0 * out.N_r * (kz.infinite ? 0.0 : theta_pow(qr, kz.k));

  double s_r = metric.jump_size(x, r);
  FloorResult et = floor_half_log2(r, 2.0 * s_r);
  if (!et.infinite && et.k < 0 && !allow_negative_floor)
    guard_fail("r >= 2 s_x(r)", "r = " + fmt(r) + ", s_x(r) = " + fmt(s_r));
  out.eta_tilde = et.k;
  out.near_integer_floor |= et.near_integer;
  out.negative_floor |= !et.infinite && et.k < 0;
  out.theta_tilde = et.infinite ? 0.0 : theta_pow(q_of(out.N_R), et.k);
  return out;
}

namespace {

VariableDimension variable_dimension_impl(double r, double R1, double n,
                                          double theta_floor_num_scale,
                                          double jump, double deg_sup,
                                          bool allow_negative_floor) {
  if (!(n > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  if (R1 < 0.0) throw std::invalid_argument("negative R1");
  if (r < 4.0 * R1)
    guard_fail("r >= 4 R1", "r = " + fmt(r) + ", R1 = " + fmt(R1));
  if (deg_sup < 0.0) throw std::invalid_argument("negative degree supremum");

  VariableDimension out;
  out.p = 2.0 / std::log1p(2.0 / (n + 2.0));
  double branch_split = std::exp(std::max(4.0, 4.0 * R1));
  if (r < branch_split) {
    out.branch = 1;
    out.r_prime = r / 4.0;
  } else {
    out.branch = 2;
    out.r_prime = 0.25 * std::pow(std::log(r), out.p);
    if (4.0 * out.r_prime > r)
      guard_fail("4 r' <= r on the second branch",
                 "r = " + fmt(r) + ", r' = " + fmt(out.r_prime) +
                     "; r is below this dimension's second-branch domain");
  }

  FloorResult fl = floor_half_log2(out.r_prime, theta_floor_num_scale * jump);
  if (!fl.infinite && fl.k < 0 && !allow_negative_floor)
    guard_fail("r' >= " + fmt(theta_floor_num_scale) + " * jump",
               "r' = " + fmt(out.r_prime) + ", jump = " + fmt(jump));
  out.negative_floor = !fl.infinite && fl.k < 0;
  out.near_integer_floor = fl.near_integer;
  double theta = fl.infinite ? 0.0 : theta_pow(q_of(n), fl.k);
  out.theta_term = 54.0 * n * theta;
  out.nu = 0.5 / std::log(r / out.r_prime) + out.theta_term;
  out.n_prime = n * std::max(1.0, out.nu * std::log1p(r * r * deg_sup));
  return out;
}

}  // namespace

VariableDimension variable_dimension_counting(double r, double R1, double n,
                                              double S, double deg_sup,
                                              bool allow_negative_floor) {
  if (!(S > 0.0)) throw std::invalid_argument("jump size must be positive");
  return variable_dimension_impl(r, R1, n, 2.0, S, deg_sup,
                                 allow_negative_floor);
}

VariableDimension variable_dimension_general(double r, double R1,
                                             double n_tilde, double s_tilde,
                                             double deg_sup,
                                             bool allow_negative_floor) {
  if (!(s_tilde >= 0.0)) throw std::invalid_argument("negative jump supremum");
  return variable_dimension_impl(r, R1, n_tilde, 32.0, s_tilde, deg_sup,
                                 allow_negative_floor);
}

double log_gamma_tilde(const WeightedGraph& g, const MetricStructure& metric,
                       int x, double rho, double n, double phi,
                       double Phi_doubling, bool allow_negative_floor) {
  if (!(phi >= 1.0) || !(Phi_doubling >= 1.0))
    throw std::invalid_argument("gamma~ needs phi, Phi >= 1");
  double s = metric.annulus_jump_sup(x, rho, 2.0 * rho);
  if (rho < 8.0 * s && !allow_negative_floor)
    guard_fail("rho >= 8 ||s_x||_[rho,2rho]",
               "rho = " + fmt(rho) + ", ||s_x|| = " + fmt(s));
  FloorResult eta = floor_half_log2(rho, 8.0 * s);
  double theta = eta.infinite ? 0.0 : theta_pow(q_of(n), eta.k);
  double M = metric.ball_measure(x, rho) / g.measure(x);
  double base_log =
      std::log1p(rho * rho * g.weighted_degree(x)) + std::log(M);
  return 62.0 * n * n * kLn2 + n * (std::log(phi) + std::log(Phi_doubling)) +
         0.5 * theta * base_log;
}

double log_psi_normalizing(double tau, double M_z, double n, double phi,
                           bool allow_negative_floor) {
  if (tau < 32.0 && !allow_negative_floor)
    guard_fail("tau >= 32 (normalizing Psi exponent count)", "tau = " + fmt(tau));
  FloorResult kap = floor_half_log2(tau, 32.0);
  double Theta = 3.0 * n * theta_pow(q_of(n), kap.k);
  return 41.0 * n * n * n * kLn2 + 2.0 * n * n * std::log(phi) +
         Theta * (std::log1p(tau * tau) + std::log(M_z));
}

double log_phi_prime(double n_tilde, double phi) {
  if (!(n_tilde > 2.0)) throw std::invalid_argument("dimension must exceed 2");
  return (796.0 * n_tilde * n_tilde + 2.0 * n_tilde / (n_tilde - 2.0)) * kLn2 +
         145.0 * n_tilde * std::log(phi);
}

double log_gamma_theorem_choice(double n_tilde, double phi) {
  double logA = 43.0 * n_tilde * n_tilde * n_tilde * kLn2 +
                8.0 * n_tilde * n_tilde * std::log(phi);
  return 19.0 * n_tilde * kLn2 + 9.0 * logA + 0.5 * n_tilde * std::log(phi);
}

}  // namespace heatcert
