#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "erlocal/linalg.hpp"
#include "erlocal/semicircle.hpp"

namespace erlocal {

enum class GreenMethod { eigen, direct };
enum class MinorMode { identity, direct };

/// Below this |G_kk| the minor identity G^(k) = G - G_.k G_k. / G_kk is not
/// trusted and minors are recomputed from A^(k).
inline constexpr double kMinPivot = 1e-6;

/// Green function G(z) = (A - z)^{-1} of one matrix at one spectral
/// parameter, with its normalized trace and a cache of minors G^(k).
struct ResolventBundle {
  SpectralParam z;
  std::shared_ptr<const Eigen::MatrixXd> a;
  Eigen::MatrixXcd g;
  cplx s;
  double gamma = 0.0;  // max_ij |G_ij|; minors enter through gamma_phi()
  std::map<int, Eigen::MatrixXcd> minors;

  int n() const { return static_cast<int>(g.rows()); }
  bool phi() const { return gamma <= 2.0; }
};

/// Computes Green functions of a fixed matrix. With GreenMethod::eigen the
/// symmetric eigendecomposition is done once in the constructor and reused
/// for every z.
class GreenSolver {
 public:
  explicit GreenSolver(std::shared_ptr<const Eigen::MatrixXd> a,
                       GreenMethod method = GreenMethod::eigen);

  ResolventBundle green(SpectralParam z) const;
  const Eigen::MatrixXd& matrix() const { return *a_; }
  GreenMethod method() const { return method_; }
  /// Only available for GreenMethod::eigen.
  const SymmetricEigen& eigen() const;

 private:
  std::shared_ptr<const Eigen::MatrixXd> a_;
  GreenMethod method_;
  std::optional<SymmetricEigen> eig_;
};

ResolventBundle compute_green(std::shared_ptr<const Eigen::MatrixXd> a, SpectralParam z,
                              GreenMethod method = GreenMethod::eigen);

/// (1/N) sum_k 1/(lambda_k - z).
cplx stieltjes_from_spectrum(const Eigen::VectorXd& eigenvalues, SpectralParam z);

/// max_i |sum_j |G_ij|^2 - Im G_ii / eta| / (Im G_ii / eta).
double ward_residual(const Eigen::MatrixXcd& g, double eta);
double ward_residual(const ResolventBundle& bundle);

/// Position of original index i (i != k) inside the minor without k.
constexpr int minor_pos(int k, int i) { return i < k ? i : i - 1; }

Eigen::MatrixXcd minor_by_identity(const Eigen::MatrixXcd& g, int k);
Eigen::MatrixXcd minor_direct(const Eigen::MatrixXd& a, int k, cplx z);

/// G^(k), cached in the bundle. Identity mode falls back to the direct
/// recomputation (with a warning) when |G_kk| < kMinPivot.
const Eigen::MatrixXcd& minor_green(ResolventBundle& bundle, int k,
                                    MinorMode mode = MinorMode::identity);

/// Largest |G_ij - expansion| over both Schur expansions of G_ij, i != j.
double schurix_residual(ResolventBundle& bundle, int i, int j);

/// |1/G_ii - (A_ii - z - sum_{k,l != i} A_ik G^(i)_kl A_li)|.
double schur_spsf_residual(ResolventBundle& bundle, int i);

/// Scale for the SPSF residual contract: 1 + |z| + N max|A|^2 Gamma.
double spsf_tolerance_scale(const ResolventBundle& bundle);

/// The seven terms of Y_i, where A = H + f ones/N, so that
/// 1/G_ii = -z - s + Y_i.
struct YDecomposition {
  std::array<cplx, 7> terms{};
  cplx value;
  double reconstruction_residual = 0.0;  // |1/G_ii + z + s - Y_i|
  bool degenerate = false;               // |G_ii| < kMinPivot
};
YDecomposition compute_Y(ResolventBundle& bundle, int i, const Eigen::MatrixXd& h, double f);

/// |1 + z s + s^2 - (1/N) sum_i G_ii Y_i| given Y_i for every i.
double self_consistency_residual(const ResolventBundle& bundle, const std::vector<cplx>& y);

/// max_ij |G_ij - m delta_ij|.
double local_law_statistic(const ResolventBundle& bundle, cplx m);

struct GammaReport {
  double gamma = 0.0;
  bool phi = false;
  int minors_used = 0;
  /// False when only a subset of minors entered the maximum; gamma is then a
  /// lower bound and phi an upper bound for the full quantities.
  bool complete = false;
};

/// Gamma = max|G_ij| v max over requested k of max_{i,j != k} |G^(k)_ij|,
/// streamed without storing the minors; phi = 1(Gamma <= 2).
GammaReport gamma_phi(const ResolventBundle& bundle, const std::vector<int>& minor_indices);

}  // namespace erlocal
