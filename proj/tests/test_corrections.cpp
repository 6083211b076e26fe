#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatcert/corrections.hpp"
#include "test_util.hpp"

using namespace heatcert;

namespace {

// independent high-precision evaluation of the naive zeta formula
long double zeta_oracle(long double r, long double t, long double S) {
  long double a = r * S;
  return (a * std::asinh(a / t) + t - std::sqrt(t * t + a * a)) / (S * S);
}

}  // namespace

TEST_CASE("zeta values and asymptotics") {
  for (double t : {0.3, 1.0, 47.0}) CHECK(zeta(0.0, t, 1.0) == 0.0);

  CHECK(zeta(1.0, 1.0, 1.0) ==
        doctest::Approx((double)zeta_oracle(1.0L, 1.0L, 1.0L)).epsilon(1e-12));
  // frozen independent value: ln(1+sqrt 2) + 1 - sqrt 2
  CHECK(zeta(1.0, 1.0, 1.0) == doctest::Approx(0.4671600246464480).epsilon(1e-12));

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> rd(0.0, 20.0), td(0.05, 50.0),
      sd(0.2, 3.0);
  for (int i = 0; i < 200; ++i) {
    double r = rd(rng), t = td(rng), S = sd(rng);
    double v = zeta(r, t, S);
    CHECK(v >= 0.0);
    CHECK(v == doctest::Approx((double)zeta_oracle(r, t, S))
                   .epsilon(1e-9));
  }

  // 2t zeta(r,t)/r^2 -> 1 as t -> infinity
  double big_t = 1e4;
  CHECK(std::abs(2.0 * big_t * zeta(1.0, big_t, 1.0) - 1.0) <= 1e-3);
  // far beyond the naive formula's cancellation range it stays accurate
  CHECK(std::abs(2.0 * 1e12 * zeta(1.0, 1e12, 1.0) - 1.0) <= 1e-3);

  CHECK_THROWS_AS(zeta(1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(zeta(1.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(zeta(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("nu correction") {
  CHECK(nu_correction(0.0, 3.0, 1.0) == 0.0);
  CHECK(nu_correction(1.0, 1.0, 1.0) ==
        doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-14));
  // monotone non-decreasing in r
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> rd(0.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    double a = rd(rng), b = rd(rng), t = 0.5 + rd(rng), S = 0.3 + rd(rng) / 5;
    if (a > b) std::swap(a, b);
    CHECK(nu_correction(a, t, S) <= nu_correction(b, t, S) + 1e-15);
  }
  CHECK_THROWS_AS(nu_correction(1.0, -2.0, 1.0), std::invalid_argument);
}

TEST_CASE("counting corrections block") {
  CountingCorrections cc = counting_corrections(64.0, 64.0, 4.0, 4.0, 1.0);
  // r = 64: kappa = floor(0.5 log2 32) = 2; the spec's r = 8 example needs
  // the relaxed Psi guard, so check it directly below
  CHECK(cc.kappa == 2);

  CountingCorrections c8 = counting_corrections(8.0, 8.0, 4.0, 4.0, 1.0, true);
  CHECK(c8.kappa == 1);
  CHECK(c8.theta == doctest::Approx(0.75).epsilon(1e-15));

  // deg = 0 gives Phi = 1 (log 0) regardless of the exponent
  CHECK(counting_corrections(64.0, 64.0, 0.0, 3.0, 1.0).Phi.log_mag == 0.0);

  // Psi_x(r) = Phi_x^r(r/16) identically
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rd(32.0, 5000.0), dd(0.0, 17.0),
      nd(2.5, 9.0);
  for (int i = 0; i < 100; ++i) {
    double r = rd(rng), deg = dd(rng), n = nd(rng);
    CountingCorrections a = counting_corrections(r, r, deg, n, 1.0);
    CountingCorrections b = counting_corrections(r / 16.0, r, deg, n, 1.0, true);
    CHECK(a.Psi.log_mag == doctest::Approx(b.Phi.log_mag).epsilon(1e-14));
  }

  // guards name the inequality; relaxed evaluation flags the negative floor
  CHECK_THROWS_WITH_AS(counting_corrections(1.0, 1.0, 2.0, 3.0, 1.0),
                       doctest::Contains("r >= 2S"), GuardViolation);
  CHECK_THROWS_WITH_AS(counting_corrections(8.0, 8.0, 2.0, 3.0, 1.0),
                       doctest::Contains("r/16 >= 2S"), GuardViolation);
  CountingCorrections relaxed = counting_corrections(1.0, 1.0, 2.0, 3.0, 1.0, true);
  CHECK(relaxed.negative_floor);
  CHECK(relaxed.kappa < 0);
  CHECK(relaxed.theta > 1.0);
}

TEST_CASE("kappa and theta monotonicity in r") {
  double prev_kappa = -100, prev_theta = 1e9;
  for (double r = 2.0; r < 1e5; r *= 1.7) {
    CountingCorrections cc = counting_corrections(r, r, 3.0, 4.0, 1.0, true);
    CHECK(cc.kappa >= prev_kappa);
    CHECK(cc.theta <= prev_theta + 1e-15);
    prev_kappa = (double)cc.kappa;
    prev_theta = cc.theta;
  }
}

TEST_CASE("log-space values match direct evaluation when it fits") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rd(32.0, 300.0), dd(0.1, 5.0),
      nd(2.2, 4.0);
  for (int i = 0; i < 100; ++i) {
    double r = rd(rng), deg = dd(rng), n = nd(rng);
    CountingCorrections cc = counting_corrections(r, r, deg, n, 1.0);
    double direct =
        std::pow(1.0 + r * r * deg, 3.0 * n * n * cc.theta);
    if (std::isfinite(direct))
      CHECK(std::exp(cc.Phi.log_mag) ==
            doctest::Approx(direct).epsilon(1e-10));
  }
  // and a value that would overflow plain doubles stays finite in log space
  GeneralCorrections big = [] {
    WeightedGraph g = generate_family("cycle_64", MeasureMode::normalizing);
    MetricStructure m =
        MetricStructure::all_pairs_distances(g, combinatorial_weights(g));
    return general_corrections(0, 8.0, 8.0, g, m, DimensionSpec::constant(3.0),
                               1.0, true);
  }();
  CHECK(big.Aprime.log_mag == doctest::Approx(1107.0 * kLn2).epsilon(1e-14));
  CHECK(std::isfinite(big.Aprime.log_mag));
}

TEST_CASE("general corrections on a combinatorial cycle") {
  WeightedGraph g = generate_family("cycle_64", MeasureMode::normalizing);
  MetricStructure m =
      MetricStructure::all_pairs_distances(g, combinatorial_weights(g));
  DimensionSpec n3 = DimensionSpec::constant(3.0);

  // constant dimension: every annulus supremum is the constant
  GeneralCorrections gc = general_corrections(0, 8.0, 16.0, g, m, n3, 1.0, true);
  CHECK(gc.N_r == 3.0);
  CHECK(gc.N_R == 3.0);
  // ||s||_[4,8] = 1 on the combinatorial metric, so eta(8) = floor(log2(4)/2)
  CHECK(gc.eta == 1);
  CHECK(gc.theta == doctest::Approx(std::pow(5.0 / 7.0, 1.0)));
  // eta~ uses the single-radius jump size
  CHECK(gc.eta_tilde == 1);
  // Theta = 3 N ((N+2)/(N+4))^{kappa}, kappa = floor(.5 log2 (8/32)) = -1
  CHECK(gc.kappa_z == -1);
  CHECK(gc.Theta == doctest::Approx(9.0 * std::pow(5.0 / 7.0, -1.0)));

  // Psi_x(r) = Phi_x^r(r/16) holds in the general block too
  for (double r : {8.0, 16.0, 24.0}) {
    GeneralCorrections at_r = general_corrections(0, r, r, g, m, n3, 1.0, true);
    GeneralCorrections inner =
        general_corrections(0, r / 16.0, r, g, m, n3, 1.0, true);
    CHECK(at_r.Psi.log_mag == doctest::Approx(inner.Phi.log_mag).epsilon(1e-14));
  }

  // the strict guard refuses the same call
  CHECK_THROWS_AS(general_corrections(0, 8.0, 16.0, g, m, n3, 1.0),
                  GuardViolation);

  // step dimension: annulus supremum picks the larger branch value
  DimensionSpec stepn = DimensionSpec::step({0.0, 6.0}, {3.0, 5.0});
  GeneralCorrections gs =
      general_corrections(0, 8.0, 32.0, g, m, stepn, 1.0, true);
  CHECK(gs.N_r == 5.0);           // sup over [2, 8] crosses the 6 threshold
  CHECK(stepn.sup(0.0, 5.0) == 3.0);
  CHECK(stepn.at(7.0) == 5.0);
}

TEST_CASE("variable dimension branches and guards") {
  // first branch: r' = r/4
  VariableDimension vd = variable_dimension_counting(100.0, 6.0, 3.0, 1.0, 2.0);
  CHECK(vd.branch == 1);
  CHECK(vd.r_prime == 25.0);
  CHECK(vd.p == doctest::Approx(2.0 / std::log(7.0 / 5.0)));
  CHECK(vd.n_prime >= 3.0);

  // n > 2 guard; at n = 2 the exponent p would already be 2/ln(3/2)
  CHECK_THROWS_AS(variable_dimension_counting(100.0, 6.0, 2.0, 1.0, 2.0),
                  std::invalid_argument);
  CHECK(2.0 / std::log1p(2.0 / 4.0) == doctest::Approx(4.933).epsilon(1e-3));

  // r below 4 R1 is refused
  CHECK_THROWS_WITH_AS(variable_dimension_counting(10.0, 6.0, 3.0, 1.0, 2.0),
                       doctest::Contains("4 R1"), GuardViolation);

  // second branch with its domain guard: at n = 3 the crossover where
  // (ln r)^p <= r sits near 1.8e7, so r = 1e9 is fine and r = 1e5 is not
  VariableDimension v2 = variable_dimension_counting(1e9, 4.0, 3.0, 1.0, 2.0);
  CHECK(v2.branch == 2);
  CHECK(4.0 * v2.r_prime <= 1e9);
  CHECK(v2.r_prime ==
        doctest::Approx(0.25 * std::pow(std::log(1e9), v2.p)).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(variable_dimension_counting(1e5, 2.0, 3.0, 1.0, 2.0),
                       doctest::Contains("second-branch"), GuardViolation);

  // n' >= n and the log product form
  double expected_nu = 0.5 / std::log(4.0) +
                       54.0 * 3.0 * std::pow(5.0 / 7.0,
                                             std::floor(0.5 * std::log2(12.5)));
  CHECK(vd.nu == doctest::Approx(expected_nu).epsilon(1e-12));
  CHECK(vd.n_prime ==
        doctest::Approx(3.0 * std::max(1.0, vd.nu * std::log1p(100.0 * 100.0 *
                                                               2.0))));
}

TEST_CASE("near-integer floor arguments are flagged") {
  // 0.5*log2(128) = 3.5 sits safely between integers
  CountingCorrections cc = counting_corrections(256.0, 256.0, 1.0, 3.0, 1.0);
  CHECK_FALSE(cc.near_integer_floor);
  CountingCorrections cd = counting_corrections(512.0, 512.0, 1.0, 3.0, 1.0);
  CHECK(cd.kappa == 4);  // 0.5*log2(256) = 4 exactly, nudged up
  CHECK(cd.near_integer_floor);
}

TEST_CASE("log-space evaluation stays finite up to N = 10, phi = 1e6") {
  WeightedGraph g = generate_family("cycle_64", MeasureMode::normalizing);
  MetricStructure m =
      MetricStructure::all_pairs_distances(g, combinatorial_weights(g));
  DimensionSpec n10 = DimensionSpec::constant(10.0);
  GeneralCorrections gc =
      general_corrections(0, 8.0, 16.0, g, m, n10, 1e6, true);
  for (double v : {gc.Phi.log_mag, gc.Psi.log_mag, gc.A.log_mag,
                   gc.Aprime.log_mag, gc.Theta, gc.theta_tilde})
    CHECK(std::isfinite(v));
  CHECK(std::isfinite(log_phi_prime(10.0, 1e6)));
  CHECK(std::isfinite(log_gamma_theorem_choice(10.0, 1e6)));
  // 2^{43*1000} * (1e6)^{800}: far beyond double range, fine as a log
  CHECK(gc.A.log_mag > 700.0);
}

TEST_CASE("phi-prime and gamma closed forms") {
  // N~ = 3, phi = 1: log2 phi' = 796*9 + 6 = 7170
  CHECK(log_phi_prime(3.0, 1.0) == doctest::Approx((796.0 * 9.0 + 6.0) * kLn2));
  // gamma = 2^{19 N} A^9 phi^{N/2} with A = 2^{43 N^3} phi^{8 N^2}
  CHECK(log_gamma_theorem_choice(3.0, 1.0) ==
        doctest::Approx((19.0 * 3.0 + 9.0 * 43.0 * 27.0) * kLn2));
  double phi = 2.5;
  CHECK(log_gamma_theorem_choice(3.0, phi) ==
        doctest::Approx((19.0 * 3.0 + 9.0 * 43.0 * 27.0) * kLn2 +
                        (9.0 * 8.0 * 9.0 + 1.5) * std::log(phi)));
}
