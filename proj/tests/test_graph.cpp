#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "test_util.hpp"

using namespace heatcert;

TEST_CASE("path on three vertices, counting measure") {
  WeightedGraph g = build_graph(
      {{"1", "2", 1.0}, {"2", "3", 1.0}}, MeasureMode::counting);
  CHECK(g.size() == 3);
  CHECK(g.degree(g.index_of("1")) == 1.0);
  CHECK(g.degree(g.index_of("2")) == 2.0);
  CHECK(g.degree(g.index_of("3")) == 1.0);
  for (int x = 0; x < 3; ++x) CHECK(g.measure(x) == 1.0);
}

TEST_CASE("two vertices with b = 2 in normalizing mode") {
  WeightedGraph g = build_graph({{"x", "y", 2.0}}, MeasureMode::normalizing);
  CHECK(g.measure(0) == 2.0);
  CHECK(g.measure(1) == 2.0);
  CHECK(g.weighted_degree(0) == 1.0);  // exact: ratio of identical doubles
  CHECK(g.weighted_degree(1) == 1.0);
}

TEST_CASE("disconnected input is rejected naming two vertices") {
  CHECK_THROWS_WITH_AS(
      build_graph({{"1", "2", 1.0}, {"3", "4", 1.0}}, MeasureMode::counting),
      doctest::Contains("disconnected"), std::invalid_argument);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(build_graph({{"a", "a", 1.0}}, MeasureMode::counting),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_graph({{"a", "b", 0.0}}, MeasureMode::counting),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_graph({{"a", "b", -2.0}}, MeasureMode::counting),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      build_graph({{"a", "b", 1.0}, {"b", "a", 2.0}}, MeasureMode::counting),
      std::invalid_argument);
  // duplicate edge with the same weight is tolerated
  CHECK_NOTHROW(
      build_graph({{"a", "b", 1.0}, {"b", "a", 1.0}}, MeasureMode::counting));
  CHECK_THROWS_AS(build_graph({{"a", "b", 1.0}}, MeasureMode::custom,
                              {{"a", 1.0}, {"b", 0.0}}),
                  std::invalid_argument);
}

TEST_CASE("weighted degree") {
  WeightedGraph g = build_graph({{"x", "y", 2.0}}, MeasureMode::custom,
                                {{"x", 4.0}, {"y", 1.0}});
  CHECK(g.weighted_degree(g.index_of("x")) == doctest::Approx(0.5));
  CHECK_THROWS_AS(g.index_of("zz"), std::out_of_range);

  WeightedGraph star = generate_family("star_5", MeasureMode::counting);
  CHECK(star.weighted_degree(star.index_of("0")) == 5.0);
}

TEST_CASE("generator families") {
  WeightedGraph path = generate_family("path_3", MeasureMode::counting);
  CHECK(path.size() == 3);
  CHECK(path.edges().size() == 2);
  for (const Edge& e : path.edges()) CHECK(e.b == 1.0);

  WeightedGraph poly = generate_family("polyline_4_1", MeasureMode::counting);
  REQUIRE(poly.edges().size() == 3);
  std::vector<double> ws;
  for (const Edge& e : poly.edges()) ws.push_back(e.b);
  std::sort(ws.begin(), ws.end());
  CHECK(ws == std::vector<double>{1.0, 2.0, 3.0});

  WeightedGraph cyc = generate_family("cycle_4", MeasureMode::counting);
  for (int x = 0; x < cyc.size(); ++x) CHECK(cyc.degree(x) == 2.0);

  WeightedGraph grid = generate_family("grid_2x3", MeasureMode::counting);
  CHECK(grid.size() == 6);
  CHECK(grid.edges().size() == 7);

  WeightedGraph tree = generate_family("binary_tree_depth_2", MeasureMode::counting);
  CHECK(tree.size() == 7);

  CHECK_THROWS_AS(generate_family("path_1", MeasureMode::counting),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_family("binary_tree_depth_0", MeasureMode::counting),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_family("polyline_2000_400", MeasureMode::counting),
                  std::invalid_argument);  // single weight overflows
  CHECK_THROWS_AS(generate_family("nonsense_4", MeasureMode::counting),
                  std::invalid_argument);
}

TEST_CASE("generators are deterministic") {
  for (const char* spec : {"path_7", "cycle_9", "grid_3x4", "star_6",
                           "binary_tree_depth_3", "polyline_12_0.5"}) {
    WeightedGraph a = generate_family(spec, MeasureMode::counting);
    WeightedGraph b = generate_family(spec, MeasureMode::counting);
    CHECK(graph_to_string(a) == graph_to_string(b));
  }
}

TEST_CASE("cached degree matches recomputed sum to 1e-14 relative") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    WeightedGraph g = testutil::random_connected_graph(12, 10, rng);
    for (int x = 0; x < g.size(); ++x) {
      double s = 0.0;
      for (auto [y, b] : g.neighbors(x)) s += b;
      CHECK(std::abs(s - g.degree(x)) <= 1e-14 * std::max(1.0, g.degree(x)));
    }
  }
}

TEST_CASE("save/load round trip is bit exact") {
  std::mt19937_64 rng(11);
  WeightedGraph g = testutil::random_connected_graph(9, 6, rng, 0.1, 3.7);
  std::string path =
      (std::filesystem::temp_directory_path() / "heatcert_roundtrip.txt")
          .string();
  save_graph(g, path);
  WeightedGraph h = load_graph(path);
  CHECK(g.identical_to(h));
  // and a second hop through text stays identical
  CHECK(graph_to_string(h) == graph_to_string(g));
  std::filesystem::remove(path);

  WeightedGraph p = generate_family("path_3", MeasureMode::counting);
  WeightedGraph q = graph_from_string(graph_to_string(p));
  CHECK(p.identical_to(q));
}

TEST_CASE("malformed files carry line diagnostics") {
  CHECK_THROWS_WITH_AS(
      graph_from_string("graph v1\nvertex a 1\nvertex b 1\n"
                        "edge a b 1\nedge b a 2\n"),
      doctest::Contains("asymmetric"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      graph_from_string("graph v1\nvertex a 0\n"),
      doctest::Contains("nonpositive measure"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(graph_from_string("graph v1\nvertex a 1\nbogus x\n"),
                       doctest::Contains(":3:"), std::invalid_argument);
  CHECK_THROWS_AS(graph_from_string("not a graph\n"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      graph_from_string("graph v1\nvertex a 1\nvertex b 1\nedge a c 1\n"),
      doctest::Contains("undeclared"), std::invalid_argument);
}

TEST_CASE("single vertex graph is the one legal edgeless graph") {
  WeightedGraph g = single_vertex_graph("o", 2.5);
  CHECK(g.size() == 1);
  CHECK(g.measure(0) == 2.5);
  CHECK(g.degree(0) == 0.0);
  WeightedGraph h = graph_from_string(graph_to_string(g));
  CHECK(g.identical_to(h));
}
