#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ebdiff/errors.hpp"
#include "ebdiff/topology.hpp"

using namespace ebdiff;

TEST_CASE("build_topology: neighborhoods include self") {
  auto single = build_topology(1, {});
  CHECK(single.neighborhood(0) == std::vector<int>{0});

  auto path = build_topology(3, {{0, 1}, {1, 2}});
  CHECK(path.neighborhood(1) == std::vector<int>{0, 1, 2});
  CHECK(path.neighborhood(0) == std::vector<int>{0, 1});
  CHECK(path.adjacent(2, 1));
  CHECK_FALSE(path.adjacent(0, 2));
}

TEST_CASE("build_topology: error paths") {
  CHECK_THROWS_AS(build_topology(3, {{0, 1}}), DisconnectedGraph);
  CHECK_THROWS_AS(build_topology(3, {{0, 3}}), InvalidEdge);
  CHECK_THROWS_AS(build_topology(3, {{-1, 0}}), InvalidEdge);
  CHECK_THROWS_AS(build_topology(2, {{1, 1}, {0, 1}}), InvalidEdge);
}

TEST_CASE("build_topology: duplicate and reversed edges collapse") {
  auto t = build_topology(2, {{0, 1}, {1, 0}, {0, 1}});
  CHECK(t.edges().size() == 1);
  CHECK(t.degree(0) == 2);
}

TEST_CASE("random_geometric_topology") {
  SUBCASE("single node") {
    auto t = random_geometric_topology(1, 0.1, 3);
    CHECK(t.size() == 1);
  }
  SUBCASE("radius sqrt(2) always connects two nodes") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      auto t = random_geometric_topology(2, std::sqrt(2.0), seed);
      CHECK(t.edges().size() == 1);
    }
  }
  SUBCASE("same seed, same graph") {
    auto a = random_geometric_topology(60, 0.25, 7);
    auto b = random_geometric_topology(60, 0.25, 7);
    CHECK(a.size() == 60);
    CHECK(a.edges() == b.edges());
    auto c = random_geometric_topology(60, 0.25, 8);
    CHECK(a.edges() != c.edges());
  }
  SUBCASE("bad radius and exhausted retries") {
    CHECK_THROWS_AS(random_geometric_topology(5, 0.0, 1), InvalidRange);
    CHECK_THROWS_AS(random_geometric_topology(5, 1.5, 1), InvalidRange);
    CHECK_THROWS_AS(random_geometric_topology(60, 0.01, 1, 5), ConnectivityFailure);
  }
}

TEST_CASE("metropolis_weights: hand-evaluated cases") {
  auto one = metropolis_weights(build_topology(1, {}));
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == 1.0);

  // path 1-2-3, |N| = {2, 3, 2}
  auto a = metropolis_weights(path_topology(3));
  CHECK(a(0, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(1, 0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(1, 2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(2, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(a(2, 2) == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(a(1, 1) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(a(0, 2) == 0.0);

  auto k3 = metropolis_weights(complete_topology(3));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(k3(i, j) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("metropolis_weights: invariants on random graphs") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const int n = 2 + static_cast<int>(seed % 40);
    auto t = random_geometric_topology(n, 0.4, seed);
    auto a = metropolis_weights(t);
    auto report = validate_combination(a, t);
    CHECK(report.ok());
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int k = 0; k < n; ++k) {
      CHECK(std::abs(a.col(k).sum() - 1.0) <= 1e-12);
      CHECK(std::abs(a.row(k).sum() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("validate_combination reports offending entries") {
  auto t = path_topology(3);
  auto a = metropolis_weights(t);

  auto bad_sum = a;
  bad_sum(0, 0) -= 0.1;  // column 1 sums to 0.9
  auto r1 = validate_combination(bad_sum, t);
  CHECK_FALSE(r1.columns_stochastic);
  REQUIRE(r1.violations.size() == 1);
  CHECK(r1.violations[0].kind == CombinationViolation::Kind::ColumnSum);
  CHECK(r1.violations[0].col == 0);
  CHECK(r1.violations[0].value == doctest::Approx(0.9));

  auto sparse = a;
  sparse(0, 2) = 0.1;  // a_13 != 0 although 1 is not a neighbor of 3
  sparse(2, 2) -= 0.1;
  auto r2 = validate_combination(sparse, t);
  CHECK_FALSE(r2.sparsity);
  CHECK(r2.columns_stochastic);
  bool found = false;
  for (const auto& v : r2.violations)
    found |= v.kind == CombinationViolation::Kind::Sparsity && v.row == 0 && v.col == 2;
  CHECK(found);

  auto negative = a;
  negative(1, 0) = -0.1;
  negative(0, 0) += 1.0 / 3 + 0.1;
  CHECK_FALSE(validate_combination(negative, t).nonnegative);
}

TEST_CASE("edge list round trip") {
  auto t = random_geometric_topology(25, 0.35, 11);
  std::stringstream ss;
  write_edge_list(ss, t);
  CHECK(ss.str().rfind("N 25\n", 0) == 0);
  auto back = read_edge_list(ss);
  CHECK(back.size() == 25);
  CHECK(back.edges() == t.edges());
}

TEST_CASE("edge list parse errors") {
  std::istringstream no_header("1 2\n");
  CHECK_THROWS_AS(read_edge_list(no_header), ParseError);
  std::istringstream bad_pair("N 3\n1 2\n2\n");
  try {
    read_edge_list(bad_pair);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream self_loop("N 2\n1 1\n1 2\n");
  CHECK_THROWS_AS(read_edge_list(self_loop), InvalidEdge);
}
