#include <doctest.h>

#include <memory>
#include <numeric>
#include <random>

#include "erlocal/ensemble.hpp"
#include "erlocal/errors.hpp"
#include "erlocal/resolvent.hpp"

using namespace erlocal;

namespace {

SampleBundle draw(int n, double q, std::uint64_t seed) {
  EnsembleConfig c;
  c.n = n;
  c.q = q;
  c.seed = seed;
  return sample_er(c);
}

std::shared_ptr<const Eigen::MatrixXd> shared(const Eigen::MatrixXd& a) {
  return std::make_shared<const Eigen::MatrixXd>(a);
}

}  // namespace

TEST_CASE("zero matrix") {
  const int n = 5;
  const SpectralParam z{0.4, 0.3};
  auto b = compute_green(shared(Eigen::MatrixXd::Zero(n, n)), z);
  const cplx expect = -1.0 / z.z();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) CHECK(std::abs(b.g(i, j) - (i == j ? expect : 0.0)) < 1e-15);
  CHECK(std::abs(b.s - expect) < 1e-15);
  CHECK(b.gamma == doctest::Approx(std::abs(expect)));
}

TEST_CASE("eigen and direct Green functions agree") {
  const auto s = draw(200, 4.0, 3);
  auto a = shared(s.rescaled);
  for (const SpectralParam z : {SpectralParam{0.0, 1.0}, SpectralParam{1.1, 0.05},
                                SpectralParam{-0.5, 0.02}}) {
    const auto e = compute_green(a, z, GreenMethod::eigen);
    const auto d = compute_green(a, z, GreenMethod::direct);
    CHECK((e.g - d.g).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(e.s - d.s) < 1e-10);
    const GreenSolver solver(a);
    CHECK(std::abs(e.s - stieltjes_from_spectrum(solver.eigen().values, z)) < 1e-10);
  }
}

TEST_CASE("Ward identity") {
  const auto s = draw(300, 5.0, 8);
  auto a = shared(s.rescaled);
  for (double eta : {1.0, 0.1, 0.01}) {
    const auto b = compute_green(a, {0.3, eta});
    CHECK(ward_residual(b) < 1e-10);
  }
}

TEST_CASE("minor identity against direct recomputation") {
  const auto s = draw(120, 3.0, 5);
  auto a = shared(s.rescaled);
  auto b = compute_green(a, {0.2, 0.1});
  for (int k : {0, 17, 119}) {
    const Eigen::MatrixXcd id = minor_by_identity(b.g, k);
    const Eigen::MatrixXcd dir = minor_direct(*a, k, b.z.z());
    REQUIRE(id.rows() == 119);
    CHECK((id - dir).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::MatrixXcd& cached = minor_green(b, k);
    CHECK((cached - id).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(minor_pos(5, 3) == 3);
  CHECK(minor_pos(5, 7) == 6);
}

TEST_CASE("Schur complement identities") {
  const auto s = draw(150, 4.0, 6);
  auto b = compute_green(shared(s.rescaled), {-0.4, 0.05});
  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> pick(0, 149);
  for (int t = 0; t < 20; ++t) {
    int i = pick(gen), j = pick(gen);
    if (i == j) j = (j + 1) % 150;
    CHECK(schurix_residual(b, i, j) < 1e-8);
  }
  for (int i : {0, 40, 149})
    CHECK(schur_spsf_residual(b, i) <= 1e-10 * spsf_tolerance_scale(b));
}

TEST_CASE("Y decomposition and self-consistency") {
  const int n = 100;
  const auto s = draw(n, 3.0, 12);
  auto b = compute_green(shared(s.rescaled), {0.1, 0.2});
  std::vector<cplx> ys;
  for (int i = 0; i < n; ++i) {
    const YDecomposition y = compute_Y(b, i, s.centered, s.f_value);
    CHECK_FALSE(y.degenerate);
    CHECK(y.reconstruction_residual < 1e-8);
    const cplx sum = std::accumulate(y.terms.begin(), y.terms.end(), cplx{});
    CHECK(std::abs(sum - y.value) < 1e-12);
    ys.push_back(y.value);
  }
  CHECK(self_consistency_residual(b, ys) < 1e-8);
}

TEST_CASE("Green function is Lipschitz in z") {
  const auto s = draw(150, 4.0, 2);
  const GreenSolver solver(shared(s.rescaled));
  const SpectralParam z1{0.3, 0.05}, z2{0.3 + 1e-4, 0.05};
  const auto b1 = solver.green(z1), b2 = solver.green(z2);
  const double lip = 1.0 / (z1.eta * z2.eta);
  CHECK((b1.g - b2.g).cwiseAbs().maxCoeff() <= lip * 1e-4 * (1 + 1e-9));
}

TEST_CASE("permutation covariance") {
  const int n = 60;
  const auto s = draw(n, 3.0, 4);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(2));
  Eigen::MatrixXd pa(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) pa(i, j) = s.rescaled(perm[i], perm[j]);
  const SpectralParam z{0.0, 0.1};
  const auto b = compute_green(shared(s.rescaled), z);
  const auto pb = compute_green(shared(pa), z);
  CHECK(std::abs(b.s - pb.s) < 1e-12);
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(pb.g(i, j) - b.g(perm[i], perm[j])));
  CHECK(worst < 1e-10);
  CHECK(local_law_statistic(b, stieltjes_m(z)) ==
        doctest::Approx(local_law_statistic(pb, stieltjes_m(z))).epsilon(1e-10));
}

TEST_CASE("Gamma sees a large minor entry") {
  // A = diag(0, 0.05, ...) with a coupling; z near the isolated eigenvalue of
  // the minor makes G^(0) large while G is moderate.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
  a(1, 1) = 0.5;
  a(0, 1) = a(1, 0) = 1.0;
  a(2, 2) = 2.0;
  a(3, 3) = -2.0;
  const SpectralParam z{0.5, 0.01};
  auto b = compute_green(shared(a), z);
  CHECK(b.gamma < 2.0);
  const GammaReport none = gamma_phi(b, {});
  CHECK(none.gamma == doctest::Approx(b.gamma));
  CHECK_FALSE(none.complete);
  const GammaReport all = gamma_phi(b, {0, 1, 2, 3});
  CHECK(all.complete);
  CHECK(all.minors_used == 4);
  CHECK(all.gamma == doctest::Approx(100.0).epsilon(1e-6));
  CHECK_FALSE(all.phi);
  const GammaReport some = gamma_phi(b, {0, 2});
  CHECK(some.gamma <= all.gamma);
  CHECK(gamma_phi(b, {2}).gamma <= some.gamma);
}

TEST_CASE("local law statistic at large eta is small") {
  const auto s = draw(1000, 8.0, 1);
  const SpectralParam z{0.0, 1.0};
  const auto b = compute_green(shared(s.rescaled), z);
  CHECK(local_law_statistic(b, stieltjes_m(z)) < 0.5);
  CHECK(std::abs(b.s - stieltjes_m(z)) < 0.1);
}
