#include "heatcert/spectral.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heatcert {

namespace {
constexpr int kMaxDenseVertices = 4096;
// e^{-x} underflows past this point; dropping those modes is exact in double
// precision and avoids denormal stalls in the kernel products
constexpr double kExpUnderflow = 745.0;

int live_modes(const Vector& eigenvalues, double t) {
  int n = static_cast<int>(eigenvalues.size());
  if (t == 0.0) return n;
  int keep = n;
  while (keep > 0 && eigenvalues(keep - 1) * t > kExpUnderflow) --keep;
  return keep;
}
}

Vector laplacian_apply(const WeightedGraph& g, const Vector& f) {
  if (f.size() != g.size())
    throw std::invalid_argument("function length does not match vertex count");
  Vector out = Vector::Zero(g.size());
  for (int x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (auto [y, b] : g.neighbors(x)) acc += b * (f(x) - f(y));
    out(x) = acc / g.measure(x);
  }
  return out;
}

SpectralDecomposition decompose(const WeightedGraph& g) {
  const int n = g.size();
  if (n > kMaxDenseVertices)
    throw std::runtime_error(
        "graph has " + std::to_string(n) + " vertices; dense decomposition is "
        "limited to " + std::to_string(kMaxDenseVertices));

  // Conjugate to the symmetric matrix H = M^{1/2} Delta M^{-1/2}:
  //   H(x,x) = deg_x / m(x),  H(x,y) = -b(x,y)/sqrt(m(x) m(y)).
  Matrix h = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) h(x, x) = g.degree(x) / g.measure(x);
  for (const Edge& e : g.edges()) {
    double v = -e.b / std::sqrt(g.measure(e.u) * g.measure(e.v));
    h(e.u, e.v) = v;
    h(e.v, e.u) = v;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigensolver failed to converge");

  SpectralDecomposition dec;
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenfunctions = solver.eigenvectors();
  for (int x = 0; x < n; ++x)
    dec.eigenfunctions.row(x) /= std::sqrt(g.measure(x));

  // invariant checks: eigen residuals and the m-weighted Gram matrix
  double lam_scale = std::max(1.0, std::abs(dec.lambda_top()));
  double worst_res = 0.0;
  for (int k = 0; k < n; ++k) {
    Vector phi = dec.eigenfunctions.col(k);
    Vector res = laplacian_apply(g, phi) - dec.eigenvalues(k) * phi;
    worst_res = std::max(worst_res, std::sqrt(inner_m(g, res, res)));
  }
  dec.max_residual = worst_res;
  double gram_err = 0.0;
  Matrix mw = dec.eigenfunctions;
  for (int x = 0; x < n; ++x) mw.row(x) *= g.measure(x);
  Matrix gram = dec.eigenfunctions.transpose() * mw;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      gram_err = std::max(gram_err, std::abs(gram(j, k) - (j == k ? 1.0 : 0.0)));
  dec.gram_error = gram_err;
  if (worst_res > 1e-10 * lam_scale || gram_err > 1e-10)
    throw std::runtime_error(
        "eigendecomposition failed its residual invariants: residual = " +
        std::to_string(worst_res) + ", gram error = " + std::to_string(gram_err));
  return dec;
}

double heat_kernel(const SpectralDecomposition& dec, double t, int x, int y) {
  if (t < 0.0) throw std::invalid_argument("negative time in heat kernel");
  double acc = 0.0;
  for (int k = live_modes(dec.eigenvalues, t) - 1; k >= 0; --k)
    acc += std::exp(-dec.eigenvalues(k) * t) * dec.eigenfunctions(x, k) *
           dec.eigenfunctions(y, k);
  return acc;
}

Matrix heat_kernel_matrix(const SpectralDecomposition& dec, double t) {
  if (t < 0.0) throw std::invalid_argument("negative time in heat kernel");
  int keep = live_modes(dec.eigenvalues, t);
  if (keep == 0) return Matrix::Zero(dec.size(), dec.size());
  Vector decay = (-dec.eigenvalues.head(keep).array() * t).exp();
  return dec.eigenfunctions.leftCols(keep) * decay.asDiagonal() *
         dec.eigenfunctions.leftCols(keep).transpose();
}

Vector heat_kernel_row(const SpectralDecomposition& dec, double t, int x) {
  if (t < 0.0) throw std::invalid_argument("negative time in heat kernel");
  int keep = live_modes(dec.eigenvalues, t);
  if (keep == 0) return Vector::Zero(dec.size());
  Vector decay = (-dec.eigenvalues.head(keep).array() * t).exp();
  Vector coeff =
      decay.cwiseProduct(dec.eigenfunctions.row(x).head(keep).transpose());
  return dec.eigenfunctions.leftCols(keep) * coeff;
}

Vector heat_semigroup_apply(const WeightedGraph& g,
                            const SpectralDecomposition& dec, double t,
                            const Vector& f) {
  if (f.size() != g.size())
    throw std::invalid_argument("function length does not match vertex count");
  // P_t f = Phi e^{-lambda t} Phi^T M f
  Vector mf = f;
  for (int x = 0; x < g.size(); ++x) mf(x) *= g.measure(x);
  int keep = live_modes(dec.eigenvalues, t);
  if (keep == 0) return Vector::Zero(g.size());
  Vector coeff = dec.eigenfunctions.leftCols(keep).transpose() * mf;
  coeff.array() *= (-dec.eigenvalues.head(keep).array() * t).exp();
  return dec.eigenfunctions.leftCols(keep) * coeff;
}

namespace {

// One TR-BDF2 stage pair with gamma = 2 - sqrt(2); returns the embedded
// third-order error estimate.
struct TrBdf2 {
  const WeightedGraph& g;
  Eigen::SparseMatrix<double> laplacian;
  double factored_h = -1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  static constexpr double gamma = 2.0 - 1.4142135623730951;

  explicit TrBdf2(const WeightedGraph& graph) : g(graph) {
    const int n = g.size();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.edges().size() * 2 + n);
    for (int x = 0; x < n; ++x)
      trip.emplace_back(x, x, g.degree(x) / g.measure(x));
    for (const Edge& e : g.edges()) {
      trip.emplace_back(e.u, e.v, -e.b / g.measure(e.u));
      trip.emplace_back(e.v, e.u, -e.b / g.measure(e.v));
    }
    laplacian.resize(n, n);
    laplacian.setFromTriplets(trip.begin(), trip.end());
  }

  void factor(double h) {
    if (h == factored_h) return;
    Eigen::SparseMatrix<double> a = laplacian * (gamma * h / 2.0);
    for (int i = 0; i < a.rows(); ++i) a.coeffRef(i, i) += 1.0;
    a.makeCompressed();
    lu.compute(a);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("TR-BDF2 factorization failed");
    factored_h = h;
  }

  // advances u by h; fills err with the embedded error estimate
  Vector step(const Vector& u, double h, double* err) {
    factor(h);
    Vector fu = -(laplacian * u);
    // trapezoidal half-stage to t + gamma h
    Vector rhs = u + (gamma * h / 2.0) * fu;
    Vector ug = lu.solve(rhs);
    // BDF2 stage to t + h
    double c1 = 1.0 / (gamma * (2.0 - gamma));
    double c2 = (1.0 - gamma) * (1.0 - gamma) / (gamma * (2.0 - gamma));
    rhs = c1 * ug - c2 * u;
    Vector u1 = lu.solve(rhs);
    // standard TR-BDF2 error estimate (Bank et al. / Hosea-Shampine)
    Vector fug = -(laplacian * ug);
    Vector fu1 = -(laplacian * u1);
    double k = (-3.0 * gamma * gamma + 4.0 * gamma - 2.0) / (12.0 * (2.0 - gamma));
    Vector e = (2.0 * k * h) * (fu / gamma - fug / (gamma * (1.0 - gamma)) +
                                fu1 / (1.0 - gamma));
    // smooth the estimate through the implicit operator
    e = lu.solve(e);
    *err = e.lpNorm<Eigen::Infinity>();
    return u1;
  }
};

}  // namespace

Vector heat_evolve_ode(const WeightedGraph& g, const Vector& f, double t,
                       double rtol, double atol) {
  if (t < 0.0) throw std::invalid_argument("negative evolution time");
  if (f.size() != g.size())
    throw std::invalid_argument("function length does not match vertex count");
  if (t == 0.0) return f;

  TrBdf2 stepper(g);
  Vector u = f;
  double scale = std::max(f.lpNorm<Eigen::Infinity>(), 1e-300);
  double time = 0.0;
  double h = t / 16.0;
  int rejected_in_a_row = 0;
  long long steps = 0;
  const long long max_steps = 2000000;
  while (time < t) {
    h = std::min(h, t - time);
    double err = 0.0;
    Vector cand = stepper.step(u, h, &err);
    double tol = rtol * scale + atol;
    if (err <= tol || h <= t * 1e-14) {
      u = cand;
      time += h;
      rejected_in_a_row = 0;
      double grow = 0.9 * std::pow(tol / std::max(err, 1e-300), 1.0 / 3.0);
      h *= std::clamp(grow, 0.2, 4.0);
    } else {
      h *= std::clamp(0.9 * std::pow(tol / err, 1.0 / 3.0), 0.1, 0.5);
      if (++rejected_in_a_row > 60)
        throw std::runtime_error("heat ODE integrator cannot meet tolerance");
    }
    if (++steps > max_steps)
      throw std::runtime_error("heat ODE integrator exceeded step budget");
  }
  return u;
}

double gradient_norm(const WeightedGraph& g, const Vector& f, int x) {
  double acc = 0.0;
  for (auto [y, b] : g.neighbors(x)) {
    double d = f(x) - f(y);
    acc += b * d * d;
  }
  return std::sqrt(acc / g.measure(x));
}

double dirichlet_energy(const WeightedGraph& g, const Vector& f) {
  double acc = 0.0;
  for (const Edge& e : g.edges()) {
    double d = f(e.u) - f(e.v);
    acc += e.b * d * d;
  }
  return 2.0 * acc;  // both orientations of each pair
}

double inner_m(const WeightedGraph& g, const Vector& f, const Vector& h) {
  double acc = 0.0;
  for (int x = 0; x < g.size(); ++x) acc += g.measure(x) * f(x) * h(x);
  return acc;
}

double norm2_m(const WeightedGraph& g, const Vector& f) {
  return std::sqrt(inner_m(g, f, f));
}

OmegaContext make_omega_context(const WeightedGraph& g, const Vector& omega) {
  if (omega.size() != g.size())
    throw std::invalid_argument("omega length does not match vertex count");
  OmegaContext om;
  om.omega = omega;
  om.exp_plus.resize(g.size());
  om.exp_minus.resize(g.size());
  for (int x = 0; x < g.size(); ++x) {
    double ep = std::exp(omega(x));
    double em = std::exp(-omega(x));
    if (!std::isfinite(ep) || !std::isfinite(em))
      throw std::invalid_argument("e^{+-omega} overflows at vertex '" +
                                  g.id(x) + "' (omega = " +
                                  std::to_string(omega(x)) + ")");
    om.exp_plus(x) = ep;
    om.exp_minus(x) = em;
  }
  om.h = h_omega(g, omega);
  return om;
}

double h_omega(const WeightedGraph& g, const Vector& omega) {
  double h = 0.0;
  for (int x = 0; x < g.size(); ++x) {
    double acc = 0.0;
    for (auto [y, b] : g.neighbors(x)) {
      double dp = std::exp(omega(x)) - std::exp(omega(y));
      double dm = std::exp(-omega(x)) - std::exp(-omega(y));
      acc += b * std::abs(dp * dm);
    }
    h = std::max(h, acc / g.measure(x));
  }
  return h;
}

Vector sandwiched_semigroup(const WeightedGraph& g,
                            const SpectralDecomposition& dec,
                            const OmegaContext& om, double t, const Vector& f) {
  Vector inner = f.cwiseProduct(om.exp_minus);
  Vector evolved = heat_semigroup_apply(g, dec, t, inner);
  return evolved.cwiseProduct(om.exp_plus);
}

Vector omega_laplacian_apply(const WeightedGraph& g, const OmegaContext& om,
                             const Vector& f) {
  Vector inner = f.cwiseProduct(om.exp_minus);
  Vector lap = laplacian_apply(g, inner);
  return lap.cwiseProduct(om.exp_plus);
}

double omega_heat_residual(const WeightedGraph& g,
                           const SpectralDecomposition& dec,
                           const OmegaContext& om, double t, const Vector& f,
                           double dt) {
  if (t <= dt) throw std::invalid_argument("residual check needs t > dt");
  Vector fwd = sandwiched_semigroup(g, dec, om, t + dt, f);
  Vector bwd = sandwiched_semigroup(g, dec, om, t - dt, f);
  Vector mid = sandwiched_semigroup(g, dec, om, t, f);
  Vector ddt = (fwd - bwd) / (2.0 * dt);
  Vector res = ddt + omega_laplacian_apply(g, om, mid);
  return res.lpNorm<Eigen::Infinity>();
}

}  // namespace heatcert
