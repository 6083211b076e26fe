#pragma once

#include <Eigen/Dense>

#include "heatcert/graph.hpp"

namespace heatcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// m-orthonormal eigensystem of the graph Laplacian.
///
/// Eigenvalues ascend; column k of eigenfunctions is phi_k with
/// <phi_j, phi_k>_m = delta_jk. Lambda = lambda_0 (zero on connected graphs).
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenfunctions;
  double max_residual = 0.0;  // max_k ||Delta phi_k - lambda_k phi_k||_2,m
  double gram_error = 0.0;    // max |<phi_j,phi_k>_m - delta_jk|

  int size() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_bottom() const { return eigenvalues(0); }
  double lambda_top() const { return eigenvalues(size() - 1); }
};

/// (Delta f)(x) = (1/m(x)) sum_y b(x,y) (f(x) - f(y))
Vector laplacian_apply(const WeightedGraph& g, const Vector& f);

/// Dense symmetric eigendecomposition via conjugation with sqrt(m).
/// Refuses graphs above 4096 vertices; throws on solver failure or when the
/// residual/Gram invariants are violated.
SpectralDecomposition decompose(const WeightedGraph& g);

/// p_t(x,y) = sum_k e^{-lambda_k t} phi_k(x) phi_k(y); t >= 0.
double heat_kernel(const SpectralDecomposition& dec, double t, int x, int y);
/// Full kernel matrix for one t.
Matrix heat_kernel_matrix(const SpectralDecomposition& dec, double t);
/// One kernel row p_t(x, .).
Vector heat_kernel_row(const SpectralDecomposition& dec, double t, int x);

/// (P_t f)(x) = sum_y m(y) p_t(x,y) f(y), evaluated spectrally.
Vector heat_semigroup_apply(const WeightedGraph& g,
                            const SpectralDecomposition& dec, double t,
                            const Vector& f);

/// P_t f by adaptive TR-BDF2 integration of u' = -Delta u (stiff-safe).
/// Agrees with the spectral route to ~rtol; throws if the controller cannot
/// reach the requested tolerance.
Vector heat_evolve_ode(const WeightedGraph& g, const Vector& f, double t,
                       double rtol = 1e-12, double atol = 1e-15);

/// |grad f|(x) = ((1/m(x)) sum_y b(x,y)(f(x)-f(y))^2)^{1/2}
double gradient_norm(const WeightedGraph& g, const Vector& f, int x);
/// || |grad f| ||_2^2 = sum_{x,y} b(x,y)(f(x)-f(y))^2 = 2 <Delta f, f>_m
double dirichlet_energy(const WeightedGraph& g, const Vector& f);

double inner_m(const WeightedGraph& g, const Vector& f, const Vector& h);
double norm2_m(const WeightedGraph& g, const Vector& f);

/// Per-vertex weight omega with cached exponentials and h(omega).
struct OmegaContext {
  Vector omega;
  Vector exp_plus;   // e^{omega}
  Vector exp_minus;  // e^{-omega}
  double h = 0.0;    // displacement functional h(omega)
};

/// Validates omega (rejects entries whose exponential overflows, naming the
/// vertex) and caches e^{+-omega} and h(omega).
OmegaContext make_omega_context(const WeightedGraph& g, const Vector& omega);

/// h(omega) = sup_x (1/m(x)) sum_y b(x,y) |grad_xy e^omega * grad_xy e^-omega|
double h_omega(const WeightedGraph& g, const Vector& omega);

/// P_t^omega f = e^omega P_t (e^-omega f)
Vector sandwiched_semigroup(const WeightedGraph& g,
                            const SpectralDecomposition& dec,
                            const OmegaContext& om, double t, const Vector& f);

/// Delta_omega f = e^omega Delta (e^-omega f)
Vector omega_laplacian_apply(const WeightedGraph& g, const OmegaContext& om,
                             const Vector& f);

/// max-norm residual of (d/dt) P_t^omega f + Delta_omega P_t^omega f at time t,
/// with the derivative taken by centered differences of step dt.
double omega_heat_residual(const WeightedGraph& g,
                           const SpectralDecomposition& dec,
                           const OmegaContext& om, double t, const Vector& f,
                           double dt = 1e-4);

}  // namespace heatcert
