#pragma once

#include <optional>
#include <string>
#include <vector>

#include "heatcert/graph.hpp"
#include "heatcert/logspace.hpp"
#include "heatcert/metric.hpp"

namespace heatcert {

/// zeta(r,t) = S^{-2} ( rS arsinh(rS/t) + t - sqrt(t^2 + r^2 S^2) ),
/// evaluated with a cancellation-safe rearrangement for r << t.
double zeta(double r, double t, double S);

/// nu(r,t) = 2 S^{-2} ( sqrt(1 + r^2 S^2 / t^2) - 1 )
double nu_correction(double r, double t, double S);

/// Dimension input: a constant n > 2 or a right-continuous step function of
/// the radius (global, shared by all vertices). Suprema over radius intervals
/// are exact for step functions.
class DimensionSpec {
 public:
  static DimensionSpec constant(double n);
  /// value(r) = values[i] for r in [thresholds[i], thresholds[i+1]);
  /// thresholds[0] must be 0.
  static DimensionSpec step(std::vector<double> thresholds,
                            std::vector<double> values);
  double at(double r) const;
  double sup(double a, double b) const;
  bool is_constant() const { return thresholds_.size() == 1; }

 private:
  std::vector<double> thresholds_;
  std::vector<double> values_;
};

/// Thrown when a correction formula's radius guard fails and relaxed
/// evaluation was not requested.
struct GuardViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Counting-measure correction block (constant dimension, global jump size):
///   kappa(r) = floor( (1/2) log2( r / 2S ) )
///   theta^n(r) = ((n+2)/(n+4))^{kappa(r)}
///   Phi_x^R(r) = (1 + r^2 deg_x)^{3 n^2 theta^n(r)}   (independent of R)
///   Psi_x(r)   = Phi_x^r(r/16)
struct CountingCorrections {
  long long kappa = 0;       // kappa(r)
  double theta = 0.0;        // theta^n(r)
  SignedLog Phi;             // Phi_x^R(r)
  SignedLog Psi;             // Psi_x(r)
  bool negative_floor = false;   // some floor argument was negative (relaxed)
  bool near_integer_floor = false;
};

CountingCorrections counting_corrections(double r, double R, double deg_x,
                                         double n, double S,
                                         bool allow_negative_floor = false);

/// General-measure correction block for one vertex.
struct GeneralCorrections {
  double N_r = 0.0;          // N_x(r) = ||n_x||_{[r/4, r]}
  double N_R = 0.0;          // N_x(R)
  long long eta = 0;         // eta(r) with annulus jump over [r/2, r]
  double theta = 0.0;        // theta^N_x(r, R)
  SignedLog Phi;             // (1 + r^2 Deg_x)^{3 N_x(R)^2 theta^N_x(r,R)}
  SignedLog Psi;             // Phi_x^r(r/16)
  SignedLog A;               // 2^{43 N^3} phi^{8 N^2}
  SignedLog Aprime;          // 2^{41 N^3} phi^{2 N^2}
  double Theta = 0.0;        // 3 N_x(r) ((N+2)/(N+4))^{kappa_x(r)}
  long long kappa_z = 0;     // floor((1/2) log2( r / 32 ||s_x||_{[r/4,r]} ))
  long long eta_tilde = 0;   // floor((1/2) log2( r / 2 s_x(r) ))
  double theta_tilde = 0.0;  // ((n_x(R)+2)/(n_x(R)+4))^{eta_tilde(r)}
  bool negative_floor = false;
  bool near_integer_floor = false;
};

GeneralCorrections general_corrections(int x, double r, double R,
                                       const WeightedGraph& g,
                                       const MetricStructure& metric,
                                       const DimensionSpec& dim, double phi,
                                       bool allow_negative_floor = false);

/// Variable Sobolev dimension n'_o(r) and its companions.
struct VariableDimension {
  double r_prime = 0.0;
  double p = 0.0;
  double nu = 0.0;       // (1/2)/ln(r/r') + 54 n theta
  double n_prime = 0.0;  // n [ 1 v nu ln(1 + r^2 ||Deg||) ]
  int branch = 0;        // 1: r' = r/4, 2: r' = (ln r)^p / 4
  double theta_term = 0.0;
  bool negative_floor = false;
  bool near_integer_floor = false;
};

/// Counting parameterization: theta in nu is theta^n(r') with the global
/// jump size S.
VariableDimension variable_dimension_counting(double r, double R1, double n,
                                              double S, double deg_sup,
                                              bool allow_negative_floor = false);

/// General parameterization (constant-reduced): theta in nu uses the cylinder
/// jump supremum s_tilde with the 32-denominator exponent count.
VariableDimension variable_dimension_general(double r, double R1,
                                             double n_tilde, double s_tilde,
                                             double deg_sup,
                                             bool allow_negative_floor = false);

/// log of the mean-value error function
///   Gamma~_x(rho) = 2^{62 n^2} (phi Phi)^n
///                   [ (1 + rho^2 Deg_x) m(B_x(rho))/m(x) ]^{ (1/2) q^{eta} },
/// with q = (n+2)/(n+4) and eta = floor((1/2) log2(rho / 8 ||s_x||_[rho,2rho])).
double log_gamma_tilde(const WeightedGraph& g, const MetricStructure& metric,
                       int x, double rho, double n, double phi,
                       double Phi_doubling, bool allow_negative_floor = false);

/// log Psi_z(tau) for the normalizing pipeline (S = 1, combinatorial metric):
///   Psi_z(tau) = 2^{41 n^3} phi^{2 n^2} [ (1+tau^2) M_z(tau) ]^{Theta(tau)},
///   Theta(tau) = 3 n ((n+2)/(n+4))^{ floor((1/2) log2(tau/32)) }.
double log_psi_normalizing(double tau, double M_z, double n, double phi,
                           bool allow_negative_floor = false);

/// Sobolev constant of the counting/general reverse direction:
///   phi'(r) = 2^{796 N~^2 + 2 N~/(N~-2)} phi^{145 N~}
double log_phi_prime(double n_tilde, double phi);

/// gamma(r) = 2^{19 N~} A~^9 phi^{N~/2} with A~ = 2^{43 N~^3} phi^{8 N~^2}
double log_gamma_theorem_choice(double n_tilde, double phi);

}  // namespace heatcert
