#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

using namespace heatcert;

namespace {

WeightedGraph two_vertex_unit() {
  return build_graph({{"x", "y", 1.0}}, MeasureMode::counting);
}

}  // namespace

TEST_CASE("laplacian formula") {
  WeightedGraph g = two_vertex_unit();
  Vector c = Vector::Constant(2, 3.7);
  CHECK(laplacian_apply(g, c).lpNorm<Eigen::Infinity>() == 0.0);

  Vector f(2);
  f << 1.0, -1.0;
  Vector lf = laplacian_apply(g, f);
  CHECK(lf(0) == doctest::Approx(2.0));
  CHECK(lf(1) == doctest::Approx(-2.0));

  CHECK_THROWS_AS(laplacian_apply(g, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("quadratic form matches the double-sum oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    WeightedGraph g = testutil::random_connected_graph(14, 12, rng);
    Vector f = testutil::random_vector(g.size(), rng);
    double via_laplacian = inner_m(g, laplacian_apply(g, f), f);
    double oracle = testutil::energy_double_sum(g, f);
    CHECK(std::abs(via_laplacian - oracle) <=
          1e-12 * std::max(1.0, std::abs(oracle)));
    // and the gradient-norm route gives twice the quadratic form
    CHECK(std::abs(dirichlet_energy(g, f) - 2.0 * oracle) <=
          1e-12 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("closed-form eigensystems") {
  WeightedGraph two = two_vertex_unit();
  SpectralDecomposition dec = decompose(two);
  CHECK(dec.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dec.eigenvalues(1) == doctest::Approx(2.0));

  // path_3 with normalizing measure: the 3x3 normalized Laplacian has
  // characteristic roots {0, 1, 2}
  WeightedGraph p3 = generate_family("path_3", MeasureMode::normalizing);
  SpectralDecomposition d3 = decompose(p3);
  CHECK(d3.eigenvalues(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(d3.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(d3.eigenvalues(2) == doctest::Approx(2.0));

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    WeightedGraph g = testutil::random_connected_graph(12, 8, rng);
    SpectralDecomposition dec2 = decompose(g);
    CHECK(std::abs(dec2.lambda_bottom()) <= 1e-10);  // constants are harmonic
    CHECK(dec2.max_residual <= 1e-10 * std::max(1.0, dec2.lambda_top()));
    CHECK(dec2.gram_error <= 1e-10);
  }
}

TEST_CASE("heat kernel closed forms") {
  WeightedGraph single = single_vertex_graph("o", 3.0);
  SpectralDecomposition ds = decompose(single);
  for (double t : {0.0, 0.7, 10.0})
    CHECK(heat_kernel(ds, t, 0, 0) == doctest::Approx(1.0 / 3.0));

  WeightedGraph two = two_vertex_unit();
  SpectralDecomposition dec = decompose(two);
  for (double t : {0.1, 1.0, 5.0}) {
    CHECK(heat_kernel(dec, t, 0, 0) ==
          doctest::Approx((1.0 + std::exp(-2.0 * t)) / 2.0));
    CHECK(heat_kernel(dec, t, 0, 1) ==
          doctest::Approx((1.0 - std::exp(-2.0 * t)) / 2.0));
  }
  CHECK_THROWS_AS(heat_kernel(dec, -0.1, 0, 0), std::invalid_argument);

  // t = 0 recovers the delta kernel 1_{x=y}/m(x)
  std::mt19937_64 rng(6);
  WeightedGraph g = testutil::random_connected_graph(10, 6, rng, 0.5, 2.0,
                                                     MeasureMode::normalizing);
  SpectralDecomposition dg = decompose(g);
  Matrix p0 = heat_kernel_matrix(dg, 0.0);
  for (int x = 0; x < g.size(); ++x)
    for (int y = 0; y < g.size(); ++y)
      CHECK(p0(x, y) ==
            doctest::Approx(x == y ? 1.0 / g.measure(x) : 0.0).epsilon(1e-9));
}

TEST_CASE("semigroup invariants: CK, symmetry, stochasticity, decay") {
  std::mt19937_64 rng(8);
  WeightedGraph g = testutil::random_connected_graph(13, 10, rng);
  SpectralDecomposition dec = decompose(g);
  for (double t : {0.1, 1.0}) {
    Matrix pt = heat_kernel_matrix(dec, t);
    for (double s : {0.5, 2.0}) {
      Matrix ps = heat_kernel_matrix(dec, s);
      Matrix pts = heat_kernel_matrix(dec, t + s);
      Matrix m = Vector::Map(g.measures().data(), g.size()).asDiagonal();
      double ck = (pts - pt * m * ps).lpNorm<Eigen::Infinity>();
      CHECK(ck <= 1e-9);
    }
    CHECK((pt - pt.transpose()).lpNorm<Eigen::Infinity>() <= 1e-12);
    for (int x = 0; x < g.size(); ++x) {
      double mass = 0.0;
      for (int y = 0; y < g.size(); ++y) mass += g.measure(y) * pt(x, y);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  // diagonal decay in t
  for (int x = 0; x < g.size(); x += 3) {
    double prev = heat_kernel(dec, 0.01, x, x);
    for (double t : {0.1, 0.5, 1.0, 4.0, 20.0}) {
      double cur = heat_kernel(dec, t, x, x);
      CHECK(cur <= prev * (1.0 + 1e-12));
      prev = cur;
    }
  }
  // dirichlet energy decays along the flow
  Vector f = testutil::random_vector(g.size(), rng);
  double e0 = dirichlet_energy(g, f);
  for (double t : {0.05, 0.3, 1.0, 8.0})
    CHECK(dirichlet_energy(g, heat_semigroup_apply(g, dec, t, f)) <=
          e0 * (1.0 + 1e-12));
}

TEST_CASE("ODE evolution agrees with the spectral route") {
  WeightedGraph g = generate_family("path_64", MeasureMode::counting);
  SpectralDecomposition dec = decompose(g);
  std::mt19937_64 rng(10);
  Vector f = testutil::random_vector(g.size(), rng, 0.0, 1.0);
  for (double t : {0.1, 1.0, 10.0}) {
    Vector spectral = heat_semigroup_apply(g, dec, t, f);
    Vector ode = heat_evolve_ode(g, f, t);
    double rel = (ode - spectral).lpNorm<Eigen::Infinity>() /
                 spectral.lpNorm<Eigen::Infinity>();
    CHECK(rel <= 1e-7);
    // mass conservation and the Markov sup bound
    CHECK(inner_m(g, ode, Vector::Ones(g.size())) ==
          doctest::Approx(inner_m(g, f, Vector::Ones(g.size())))
              .epsilon(1e-9));
    CHECK(ode.lpNorm<Eigen::Infinity>() <=
          f.lpNorm<Eigen::Infinity>() * (1.0 + 1e-12));
  }
}

TEST_CASE("sandwiched semigroup and h(omega)") {
  WeightedGraph two = two_vertex_unit();
  SpectralDecomposition dec = decompose(two);

  // constant omega collapses to the plain semigroup and h = 0
  Vector c = Vector::Constant(2, 1.3);
  CHECK(h_omega(two, c) == doctest::Approx(0.0).epsilon(1e-14));
  Vector f(2);
  f << 0.4, 1.1;
  OmegaContext oc = make_omega_context(two, c);
  Vector a = sandwiched_semigroup(two, dec, oc, 0.7, f);
  Vector b = heat_semigroup_apply(two, dec, 0.7, f);
  CHECK((a - b).lpNorm<Eigen::Infinity>() <= 1e-12);

  // omega = (0, ln 2): |(1-2)(1-1/2)| = 1/2 at both vertices
  Vector w(2);
  w << 0.0, std::log(2.0);
  CHECK(h_omega(two, w) == doctest::Approx(0.5));
  // shift invariance h(omega + c) = h(omega)
  CHECK(h_omega(two, (w.array() + 2.3).matrix()) ==
        doctest::Approx(h_omega(two, w)).epsilon(1e-12));
  CHECK(h_omega(two, w) >= 0.0);

  // the omega-heat equation residual via centered differences
  OmegaContext ow = make_omega_context(two, w);
  CHECK(omega_heat_residual(two, dec, ow, 0.5, f) <= 1e-6);

  std::mt19937_64 rng(12);
  WeightedGraph g = testutil::random_connected_graph(9, 7, rng);
  SpectralDecomposition dg = decompose(g);
  Vector wg = testutil::random_vector(g.size(), rng);
  Vector fg = testutil::random_vector(g.size(), rng, 0.0, 1.0);
  OmegaContext og = make_omega_context(g, wg);
  CHECK(omega_heat_residual(g, dg, og, 0.5, fg) <= 1e-6);

  // overflow rejection names the vertex
  Vector huge = Vector::Zero(2);
  huge(1) = 1e4;
  CHECK_THROWS_WITH_AS(make_omega_context(two, huge), doctest::Contains("y"),
                       std::invalid_argument);
}

TEST_CASE("decompose refuses oversized graphs") {
  WeightedGraph g = generate_family("path_5000", MeasureMode::counting);
  CHECK_THROWS_WITH_AS(decompose(g), doctest::Contains("4096"),
                       std::runtime_error);
}
