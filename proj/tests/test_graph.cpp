#include <doctest.h>

#include <random>

#include "erlocal/errors.hpp"
#include "erlocal/graph.hpp"
#include "erlocal/linalg.hpp"

using namespace erlocal;

namespace {

// Oracle: nullity of the adjacency matrix by eigenvalues.
int numeric_nullity(int n, const std::vector<Edge>& edges) {
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const Eigen::VectorXd v = eigvalsh(induced_adjacency(all, edges, n));
  int count = 0;
  for (double x : v) count += std::abs(x) < 1e-8;
  return count;
}

std::vector<Edge> random_forest_like(int n, double p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::bernoulli_distribution b(p);
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (b(gen)) e.emplace_back(i, j);
  return e;
}

}  // namespace

TEST_CASE("components and degrees") {
  const std::vector<Edge> e{{0, 1}, {1, 2}, {4, 5}, {3, 3}};
  const auto comps = connected_components(6, e);
  REQUIRE(comps.size() == 3);
  CHECK(comps[0] == std::vector<int>{0, 1, 2});
  CHECK(comps[1] == std::vector<int>{3});
  CHECK(comps[2] == std::vector<int>{4, 5});
  CHECK(vertex_degrees(6, e) == std::vector<int>{1, 2, 1, 1, 1, 1});
  const Eigen::MatrixXd a = induced_adjacency({2, 1, 0}, e, 6);
  CHECK(a(0, 1) == 1.0);
  CHECK(a(1, 2) == 1.0);
  CHECK(a(0, 2) == 0.0);
}

TEST_CASE("leaf removal on trees is exact") {
  // Path on 3 vertices has nullity 1, path on 4 has nullity 0, star K_{1,4} has 3.
  CHECK(leaf_removal_zero_modes(3, {{0, 1}, {1, 2}}) == 1);
  CHECK(leaf_removal_zero_modes(4, {{0, 1}, {1, 2}, {2, 3}}) == 0);
  CHECK(leaf_removal_zero_modes(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}) == 3);
  CHECK(leaf_removal_zero_modes(2, {}) == 2);
  CHECK_THROWS_AS(leaf_removal_zero_modes(2, {{0, 0}}), ValidationError);
}

TEST_CASE("leaf removal never exceeds the numeric nullity") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 30;
    const auto e = random_forest_like(n, 1.2 / n, seed);
    const int lr = leaf_removal_zero_modes(n, e);
    const int nul = numeric_nullity(n, e);
    CHECK(lr <= nul);
    bool acyclic = static_cast<int>(e.size()) + static_cast<int>(connected_components(n, e).size()) == n;
    if (acyclic) CHECK(lr == nul);
  }
}
