#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatcert/corrections.hpp"
#include "heatcert/graph.hpp"
#include "heatcert/metric.hpp"
#include "heatcert/sobolev.hpp"
#include "heatcert/spectral.hpp"

namespace heatcert {

using Json = nlohmann::ordered_json;

/// pass <=> min_log_margin >= -kPassSlack
constexpr double kPassSlack = 1e-9;

/// Outcome of one condition check: parameters, evaluation grid, the minimal
/// log-margin (log RHS - log LHS at the worst point) and its witness.
struct Certificate {
  std::string condition;
  Json params = Json::object();
  Json grid = Json::object();
  double min_log_margin = std::numeric_limits<double>::infinity();
  Json witness = Json::object();
  bool pass = false;
  std::vector<std::string> flags;

  void add_flag(const std::string& f);
  bool has_flag(const std::string& f) const;
  /// Keeps the smallest margin seen, with its witness.
  void offer(double margin, Json witness_candidate);
  void finalize() { pass = min_log_margin >= -kPassSlack; }
  Json to_json() const;
};

/// n_x(r)
using DimFn = std::function<double(int, double)>;
/// log Phi_x^{r2}(r1), with any multiplicative A folded in by the caller
using LogPhiFn = std::function<double(int, double, double)>;
/// log Psi_x(tau), with any multiplicative A folded in by the caller
using LogPsiFn = std::function<double(int, double)>;
/// log chi(x, h)
using LogChiFn = std::function<double(int, double)>;

/// Geometric time grid over [t_min, t_max] with a fixed point count per
/// decade. Doubling per_decade refines the grid (the coarser grid nests).
struct TimeGrid {
  double t_min = 1.0;
  double t_max = 1.0;
  int per_decade = 64;
  std::vector<double> points() const;
};

/// (V): m(B_x(r2)) <= Phi_x^{r2}(r1) (r2/r1)^{n_x(r2)} m(B_x(r1)) for all
/// x in B and R1 <= r1 <= r2 <= R2. Radii quantifiers are reduced to ball
/// breakpoints plus left-limits at breakpoints, where the step function
/// m(B_x(.)) is extremal while the continuous factors vary.
Certificate check_volume_doubling(const WeightedGraph& g,
                                  const MetricStructure& metric,
                                  const std::vector<int>& B, const DimFn& n,
                                  const LogPhiFn& log_phi, double R1, double R2);
double volume_doubling_point_margin(const WeightedGraph& g,
                                    const MetricStructure& metric,
                                    const DimFn& n, const LogPhiFn& log_phi,
                                    int x, double r1, double r2,
                                    bool r1_left_limit);

/// Receives (x, y, t, log_p, log_bound) for every evaluated grid point.
using GaussianRowSink = std::function<void(int, int, double, double, double)>;

/// (G): heat kernel upper bound with the zeta profile, checked on a geometric
/// time grid for pairs centers x B.
Certificate check_gaussian(const WeightedGraph& g,
                           const SpectralDecomposition& dec,
                           const MetricStructure& metric,
                           const std::vector<int>& B,
                           const std::vector<int>& centers, const DimFn& n,
                           const LogPsiFn& log_psi, double R1, double R2,
                           const TimeGrid& grid, double Lambda,
                           const GaussianRowSink& row_sink = {});
/// Margin at one (x, y, t); +inf with *underflow=true when the kernel value
/// lies below the representable floor.
double gaussian_point_margin(const WeightedGraph& g,
                             const SpectralDecomposition& dec,
                             const MetricStructure& metric, const DimFn& n,
                             const LogPsiFn& log_psi, double R2, double Lambda,
                             int x, int y, double t, bool* underflow = nullptr);

/// (L): m(B_x(r))/m(x) <= [2 phi (1 + r^2 Deg_x)]^{n_x(r)/2} on breakpoints.
Certificate check_local_regularity(const WeightedGraph& g,
                                   const MetricStructure& metric,
                                   const std::vector<int>& B, const DimFn& n,
                                   double phi, double R1, double R2);
double local_regularity_point_margin(const WeightedGraph& g,
                                     const MetricStructure& metric,
                                     const DimFn& n, double phi, int x,
                                     double r);

/// (O): p_{rho^2}(x,x) <= Psi(x,rho)^2 / m(B_x(rho)) over breakpoints plus a
/// geometric rho grid.
Certificate check_on_diagonal(const WeightedGraph& g,
                              const SpectralDecomposition& dec,
                              const MetricStructure& metric,
                              const std::vector<int>& B,
                              const LogPsiFn& log_psi, double r1, double r2,
                              int per_decade = 16);
double on_diagonal_point_margin(const WeightedGraph& g,
                                const SpectralDecomposition& dec,
                                const MetricStructure& metric,
                                const LogPsiFn& log_psi, int x, double rho);

/// Non-collapsing lower volume bound with C from a verified Sobolev-type
/// hypothesis: 2^{-6n^2} C^{-n/2} [C^{n/2} m(x)/r^n]^{theta~} <= m(B_x(r))/r^n
/// over r in [2 s_x(0), R].
Certificate check_noncollapsing(const WeightedGraph& g,
                                const MetricStructure& metric, int x, double R,
                                double n, double C);

/// Ball comparison m(B_x(r)) <= 2^{18 d} Phi^9 m(B_y(r)) over x,y in B_o(r);
/// refuses unless the doubling hypothesis certificate is a pass.
Certificate check_ball_comparison(const WeightedGraph& g,
                                  const MetricStructure& metric, int o,
                                  double r, double d, double log_phi_const,
                                  const Certificate& doubling_hypothesis);

/// l2-mean-value inequality for v = P^omega f with sampled nonnegative f.
/// The doubling hypothesis (Phi) is re-verified inline; phi is the attested
/// Sobolev constant of the caller.
Certificate check_mean_value(const WeightedGraph& g,
                             const SpectralDecomposition& dec,
                             const MetricStructure& metric, int x, double r,
                             double n, double phi, double Phi, double tau,
                             double T, const Vector& omega, int samples,
                             uint64_t seed, int quadrature_nodes = 1025,
                             const std::vector<Vector>* explicit_f = nullptr);

/// Davies window hypothesis: chi(x,h(omega))^2 (P_T^omega f)^2(x) <=
/// int_a(x)^b(x) ||P_t^omega f||_2^2 dt over sampled (f, omega).
Certificate check_chi_hypothesis(
    const WeightedGraph& g, const SpectralDecomposition& dec,
    const std::vector<double>& a, const std::vector<double>& b,
    const LogChiFn& log_chi, double T, int samples, uint64_t seed,
    int quadrature_nodes = 1025,
    const std::vector<std::pair<Vector, Vector>>* explicit_fw = nullptr);

/// Semigroup regularization hypotheses of the weak-Sobolev machinery:
/// sup_{x,y in B} p_{r^2}(x,y) <= C r^{-n} on the given radii and
/// ||f - P_{r^2} f||_2^2 <= r^2 |||grad f|||_2^2 on sampled f in C(B).
Certificate check_semigroup_regularization(const WeightedGraph& g,
                                           const SpectralDecomposition& dec,
                                           const std::vector<int>& B, double C,
                                           double n,
                                           const std::vector<double>& r_grid,
                                           int samples, uint64_t seed);

/// Weak Sobolev inequality on sampled nonnegative f supported in B(r2); the
/// lambda-supremum is exact over the level-set breakpoints of f.
Certificate check_weak_sobolev(const WeightedGraph& g,
                               const MetricStructure& metric, int o, double n,
                               double C1, double C2, double r1, double r2,
                               int samples, uint64_t seed,
                               const Certificate* semigroup_hypothesis,
                               const std::vector<Vector>* explicit_f = nullptr);

}  // namespace heatcert
