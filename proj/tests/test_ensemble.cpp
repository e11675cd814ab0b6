#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <limits>

#include <boost/math/distributions/binomial.hpp>

#include "erlocal/ensemble.hpp"
#include "erlocal/errors.hpp"

using namespace erlocal;

namespace {

EnsembleConfig config(int n, double q, std::uint64_t seed) {
  EnsembleConfig c;
  c.n = n;
  c.q = q;
  c.seed = seed;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("erlocal_test_" + name);
}

}  // namespace

TEST_CASE("config validation rejects p >= 1 and q outside [1, sqrt N]") {
  CHECK_THROWS_AS(config(2, std::sqrt(2.0), 1).validate(), ValidationError);
  CHECK_THROWS_AS(config(16, 4.0, 1).validate(), ValidationError);
  CHECK_THROWS_AS(config(100, 40.0, 1).validate(), ValidationError);
  CHECK_THROWS_AS(config(100, 0.5, 1).validate(), ValidationError);
  CHECK_THROWS_AS(config(1, 1.0, 1).validate(), ValidationError);
  CHECK_NOTHROW(config(100, 3.0, 1).validate());
  auto neg = config(100, 3.0, 1);
  neg.f_override = -1.0;
  CHECK_THROWS_AS(neg.validate(), ValidationError);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto a = sample_er(config(4, 1.0, 42));
  const auto b = sample_er(config(4, 1.0, 42));
  CHECK(a.adjacency == b.adjacency);
  CHECK(a.rescaled == b.rescaled);
  CHECK(a.edges == b.edges);
  const auto c = sample_er(config(200, 5.0, 9));
  const auto d = sample_er(config(200, 5.0, 9));
  CHECK(c.rescaled == d.rescaled);
  const auto e = sample_er(config(200, 5.0, 10));
  CHECK(c.rescaled != e.rescaled);
}

TEST_CASE("sample invariants: symmetry, rescaling and the H + f ee* split") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = sample_er(config(300, 4.0, seed));
    const int n = s.n();
    CHECK(s.rescaled == s.rescaled.transpose());
    CHECK(s.centered == s.centered.transpose());
    CHECK(s.f_value == doctest::Approx(4.0 / std::sqrt(1.0 - s.p)).epsilon(1e-15));
    CHECK(s.f_exceeds_q());
    const double eps = std::numeric_limits<double>::epsilon();
    double worst_ulps = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        CHECK(s.rescaled(i, j) == s.adjacency(i, j) / s.sigma);
        const double diff = std::abs(s.centered(i, j) + s.f_value / n - s.rescaled(i, j));
        const double ulp = eps * std::max(std::abs(s.rescaled(i, j)), 1e-300);
        worst_ulps = std::max(worst_ulps, diff / ulp);
      }
    }
    CHECK(worst_ulps <= 2.0);
    // Edge list agrees with the upper triangle of the adjacency.
    int count = 0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= j; ++i) count += s.adjacency(i, j) != 0.0;
    CHECK(count == static_cast<int>(s.edges.size()));
  }
}

TEST_CASE("edge count lies in the central binomial range") {
  const auto s = sample_er(config(1000, 5.0, 7));
  long off = 0;
  for (const auto& [i, j] : s.edges) off += i != j;
  const double pairs = 1000.0 * 999.0 / 2.0;
  boost::math::binomial_distribution<double> law(pairs, s.p);
  const double lo = boost::math::quantile(law, 1e-6);
  const double hi = boost::math::quantile(boost::math::complement(law, 1e-6));
  CHECK(off >= lo);
  CHECK(off <= hi);
}

TEST_CASE("simple-graph mode has no loops") {
  auto c = config(200, 3.0, 5);
  c.include_diagonal = false;
  const auto s = sample_er(c);
  for (const auto& [i, j] : s.edges) CHECK(i != j);
  CHECK(s.adjacency.diagonal().isZero());
}

TEST_CASE("moment conditions in closed form") {
  const auto rows = verify_moment_conditions(config(100, 1.0, 0), 6);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].k == 2);
  CHECK(rows[0].moment == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(rows[0].pass);
  const double p = 0.01, sigma = std::sqrt(p * (1 - p) * 100);
  // Oracle: direct sum over the two atoms.
  const double third = p * std::pow((1 - p) / sigma, 3) + (1 - p) * std::pow(p / sigma, 3);
  CHECK(rows[1].moment == doctest::Approx(third).epsilon(1e-13));
  CHECK(rows[1].bound == doctest::Approx(0.01));
  CHECK(rows[1].pass == (third <= 0.01));
  for (const auto& r : rows) CHECK(r.pass);
}

TEST_CASE("entry laws") {
  const int n = 64;
  const double root = 1.0 / std::sqrt(double(n));
  CHECK(check_entry_law(TwoPoint{root, -root, 0.5}, n, std::sqrt(double(n)), 12).ok);
  const LawCheck bad = check_entry_law(
      CustomDiscrete{{1.1 * root, -0.9 * root}, {0.5, 0.5}}, n, 2.0, 8);
  CHECK_FALSE(bad.ok);
  CHECK(bad.failed_k == 1);
  CHECK(bad.failed_condition.find("(ii)") != std::string::npos);
  CHECK(check_entry_law(CenteredBernoulli{}, n, 3.0, 10).ok);

  // The Bernoulli law routed through sample_general_sparse reproduces sample_er.
  const auto c = config(50, 3.0, 11);
  CHECK(sample_general_sparse(c, CenteredBernoulli{}).rescaled == sample_er(c).rescaled);
  auto wig = config(50, std::sqrt(50.0) * 0.99, 3);
  const auto w = sample_general_sparse(wig, TwoPoint{1 / std::sqrt(50.0), -1 / std::sqrt(50.0), 0.5});
  CHECK(w.rescaled.cwiseAbs().maxCoeff() == doctest::Approx(1 / std::sqrt(50.0)));
  CHECK_THROWS_AS(sample_general_sparse(wig, CustomDiscrete{{0.1, -0.05}, {0.5, 0.5}}),
                  ValidationError);
}

TEST_CASE("entry variance over many samples is 1/N") {
  const int n = 500;
  const double q = 4.0;
  double sum = 0.0, sum2 = 0.0;
  double count = 0.0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    const auto s = sample_er(config(n, q, 1000 + t), true);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < j; ++i) {
        const double h = s.centered(i, j);
        sum += h;
        sum2 += h * h;
        count += 1.0;
      }
  }
  const double var = sum2 / count - (sum / count) * (sum / count);
  const double p = q * q / n, sigma2 = p * (1 - p) * n;
  const double m4 = (p * std::pow(1 - p, 4) + (1 - p) * std::pow(p, 4)) / (sigma2 * sigma2);
  const double se = std::sqrt((m4 - 1.0 / (n * double(n))) / count);
  CHECK(std::abs(var - 1.0 / n) <= 5.0 * se);
}

TEST_CASE("file formats round trip") {
  const auto s = sample_er(config(30, 2.0, 4));
  const auto edges = temp_path("edges.txt");
  write_edge_list(edges, s.edges);
  CHECK(read_edge_list(edges) == s.edges);
  const auto dense = temp_path("dense.bin");
  write_dense_matrix(dense, s.rescaled);
  CHECK(read_dense_matrix(dense) == s.rescaled);
  CHECK(std::filesystem::file_size(dense) == 8 + 30 * 30 * 8);
  Eigen::MatrixXcd g = s.rescaled.cast<std::complex<double>>() * std::complex<double>(0.5, -1.5);
  const auto cpath = temp_path("complex.bin");
  write_complex_matrix(cpath, g);
  CHECK(read_complex_matrix(cpath) == g);
  std::filesystem::remove(edges);
  std::filesystem::remove(dense);
  std::filesystem::remove(cpath);
}

TEST_CASE("config text") {
  const auto c = parse_ensemble_config("n = 100\nq = 3.5 # comment\nf_override = 2\n"
                                       "include_diagonal = false\nseed = 17\n");
  CHECK(c.n == 100);
  CHECK(c.q == 3.5);
  CHECK(c.f_override.value() == 2.0);
  CHECK_FALSE(c.include_diagonal);
  CHECK(c.seed == 17);
  CHECK_THROWS_AS(parse_ensemble_config("n = 100\nq = 3\nbogus = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_ensemble_config("n = 100\nn = 3\nq = 1\n"), ValidationError);
  CHECK_THROWS_AS(parse_ensemble_config("q = 3\n"), ValidationError);
}

TEST_CASE("subcritical configuration") {
  const auto c = subcritical_config(10000, 0.5 * std::log(10000.0), 3);
  CHECK(c.subcritical);
  CHECK_FALSE(c.include_diagonal);
  CHECK(c.q == doctest::Approx(std::sqrt(0.5 * std::log(10000.0))));
  CHECK(c.p() == doctest::Approx(0.5 * std::log(10000.0) / 10000.0));
  CHECK_NOTHROW(c.validate());
  const auto s = sample_er(c, false);
  CHECK(s.adjacency.size() == 0);
  CHECK(s.isolated_vertex_count() > 0);
}
