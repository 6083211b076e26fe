#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "heatcert/graph.hpp"
#include "heatcert/metric.hpp"
#include "heatcert/spectral.hpp"

namespace heatcert {

/// Constrained ratio problem behind the Sobolev inequality on one ball.
/// Candidate functions live on B_x(r); the energy sums over the whole graph,
/// so boundary edges of the ball contribute.
struct SobolevProblem {
  const WeightedGraph* g = nullptr;
  std::vector<int> ball;  // support set B_x(r)
  double r = 0.0;
  double n = 0.0;  // dimension, > 2

  double q() const { return 2.0 * n / (n - 2.0); }
  void validate() const;
};

/// m(B)^{2/n} ||u||_q^2 / ( r^2 ( |||grad u|||_2^2 + r^{-2} ||u||_2^2 ) )
/// for u supported in the ball; the smallest phi admissible for this u.
double sobolev_ratio(const SobolevProblem& p, const Vector& u);

struct OptimizerBudget {
  int restarts = 100;
  int max_iterations = 400;
  double tolerance = 1e-10;
  uint64_t seed = 1;
};

struct OptimizationResult {
  double phi_star = 0.0;
  Vector maximizer;  // m-normalized, nonnegative, supported in the ball
  std::string certification = "heuristic-multistart";
  int restarts_used = 0;
  double tolerance = 0.0;
  long long total_iterations = 0;
  bool stationary = false;
  double grid_resolution = 0.0;  // set when grid-certified
};

/// Multistart projected-gradient ascent over the nonnegative m-unit sphere.
/// The returned phi_star is a lower bound on the true optimal constant
/// (restricting to u >= 0 is lossless: replacing u by |u| never decreases the
/// ratio). Structured seeds use indicators and cutoff profiles when a metric
/// is supplied; extra_seeds are tried verbatim.
OptimizationResult minimal_sobolev_constant(
    const SobolevProblem& p, const OptimizerBudget& budget,
    const MetricStructure* metric = nullptr,
    const std::vector<Vector>* extra_seeds = nullptr);

/// Upgrades a multistart result to "grid-certified" when the ball admits the
/// exhaustive oracle and the oracle confirms the optimum within 1%.
bool certify_with_grid(OptimizationResult& result, const SobolevProblem& p,
                       double resolution = 1e-3);

struct GridOracleResult {
  double value = 0.0;
  Vector argmax;
  long long points = 0;
  double resolution = 0.0;
};

/// Exhaustive angular-grid search over the nonnegative m-unit sphere for
/// balls of at most 4 vertices. resolution is the angle step as a fraction
/// of the quarter turn.
GridOracleResult grid_oracle_constant(const SobolevProblem& p,
                                      double resolution = 1e-3);

struct NashReport {
  bool pass = false;
  double min_log_margin = 0.0;
  int samples = 0;
  int worst_sample = -1;
};

/// Samples nonnegative u supported in the ball and checks the Nash form
///   ||u||_2^{2+4/n} <= C ( |||grad u|||_2^2 + r^{-2}||u||_2^2 ) ||u||_1^{4/n}.
NashReport nash_check(const SobolevProblem& p, double C, int samples,
                      uint64_t seed);

}  // namespace heatcert
