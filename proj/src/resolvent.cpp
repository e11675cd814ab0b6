#include "erlocal/resolvent.hpp"

#include <cmath>
#include <string>

#include "erlocal/diagnostics.hpp"
#include "erlocal/errors.hpp"

namespace erlocal {

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
  return m.size() == 0 ? 0.0 : std::sqrt(m.cwiseAbs2().maxCoeff());
}

Eigen::MatrixXd remove_row_col(const Eigen::MatrixXd& a, int k) {
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd out(n - 1, n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == k) continue;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      out(minor_pos(k, i), minor_pos(k, j)) = a(i, j);
    }
  }
  return out;
}

void check_index(const ResolventBundle& b, int i) {
  if (i < 0 || i >= b.n()) throw ValidationError("index " + std::to_string(i) + " out of range");
}

}  // namespace

GreenSolver::GreenSolver(std::shared_ptr<const Eigen::MatrixXd> a, GreenMethod method)
    : a_(std::move(a)), method_(method) {
  if (!a_ || a_->rows() != a_->cols() || a_->rows() == 0)
    throw ValidationError("GreenSolver needs a nonempty square matrix");
  if (method_ == GreenMethod::eigen) eig_ = eigh(*a_);
}

const SymmetricEigen& GreenSolver::eigen() const {
  if (!eig_) throw ValidationError("eigendecomposition not available for the direct method");
  return *eig_;
}

ResolventBundle GreenSolver::green(SpectralParam z) const {
  if (!(z.eta > 0.0)) throw ValidationError("Green function needs eta > 0");
  ResolventBundle b;
  b.z = z;
  b.a = a_;
  b.g = method_ == GreenMethod::eigen ? spectral_green(*eig_, z.z()) : shifted_inverse(*a_, z.z());
  b.s = b.g.diagonal().sum() / static_cast<double>(b.n());
  b.gamma = max_abs(b.g);
  return b;
}

ResolventBundle compute_green(std::shared_ptr<const Eigen::MatrixXd> a, SpectralParam z,
                              GreenMethod method) {
  return GreenSolver(std::move(a), method).green(z);
}

cplx stieltjes_from_spectrum(const Eigen::VectorXd& eigenvalues, SpectralParam z) {
  cplx sum = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) sum += 1.0 / (eigenvalues[k] - z.z());
  return sum / static_cast<double>(eigenvalues.size());
}

double ward_residual(const Eigen::MatrixXcd& g, double eta) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const double lhs = g.row(i).squaredNorm();
    const double rhs = g(i, i).imag() / eta;
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  return worst;
}

double ward_residual(const ResolventBundle& bundle) { return ward_residual(bundle.g, bundle.z.eta); }

Eigen::MatrixXcd minor_by_identity(const Eigen::MatrixXcd& g, int k) {
  const int n = static_cast<int>(g.rows());
  const cplx pivot = g(k, k);
  Eigen::MatrixXcd out(n - 1, n - 1);
  for (int j = 0; j < n; ++j) {
    if (j == k) continue;
    const cplx gkj = g(k, j) / pivot;
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      out(minor_pos(k, i), minor_pos(k, j)) = g(i, j) - g(i, k) * gkj;
    }
  }
  return out;
}

Eigen::MatrixXcd minor_direct(const Eigen::MatrixXd& a, int k, cplx z) {
  return shifted_inverse(remove_row_col(a, k), z);
}

const Eigen::MatrixXcd& minor_green(ResolventBundle& bundle, int k, MinorMode mode) {
  check_index(bundle, k);
  if (auto it = bundle.minors.find(k); it != bundle.minors.end()) return it->second;
  if (mode == MinorMode::identity && std::abs(bundle.g(k, k)) < kMinPivot) {
    warn("|G_kk| < 1e-6 at k = " + std::to_string(k) +
         "; recomputing the minor directly instead of by identity");
    mode = MinorMode::direct;
  }
  Eigen::MatrixXcd m = mode == MinorMode::identity ? minor_by_identity(bundle.g, k)
                                                   : minor_direct(*bundle.a, k, bundle.z.z());
  return bundle.minors.emplace(k, std::move(m)).first->second;
}

double schurix_residual(ResolventBundle& bundle, int i, int j) {
  check_index(bundle, i);
  check_index(bundle, j);
  if (i == j) throw ValidationError("Schur expansion of G_ij needs i != j");
  const Eigen::MatrixXd& a = *bundle.a;
  const int n = bundle.n();
  const Eigen::MatrixXcd& gj = minor_green(bundle, j);
  cplx sum_j = 0.0;
  for (int k = 0; k < n; ++k)
    if (k != j) sum_j += gj(minor_pos(j, i), minor_pos(j, k)) * a(k, j);
  const Eigen::MatrixXcd& gi = minor_green(bundle, i);
  cplx sum_i = 0.0;
  for (int k = 0; k < n; ++k)
    if (k != i) sum_i += a(i, k) * gi(minor_pos(i, k), minor_pos(i, j));
  const cplx target = bundle.g(i, j);
  return std::max(std::abs(target + bundle.g(j, j) * sum_j),
                  std::abs(target + bundle.g(i, i) * sum_i));
}

double schur_spsf_residual(ResolventBundle& bundle, int i) {
  check_index(bundle, i);
  const Eigen::MatrixXd& a = *bundle.a;
  const int n = bundle.n();
  const Eigen::MatrixXcd& gi = minor_green(bundle, i);
  Eigen::VectorXcd v(n - 1);
  for (int k = 0; k < n; ++k)
    if (k != i) v[minor_pos(i, k)] = a(i, k);
  const cplx quad = v.transpose() * gi * v;
  const cplx rhs = a(i, i) - bundle.z.z() - quad;
  return std::abs(1.0 / bundle.g(i, i) - rhs);
}

double spsf_tolerance_scale(const ResolventBundle& bundle) {
  const double amax = bundle.a->cwiseAbs().maxCoeff();
  return 1.0 + std::abs(bundle.z.z()) + bundle.n() * amax * amax * bundle.gamma;
}

YDecomposition compute_Y(ResolventBundle& bundle, int i, const Eigen::MatrixXd& h, double f) {
  check_index(bundle, i);
  const int n = bundle.n();
  const double nd = n;
  YDecomposition y;
  const Eigen::MatrixXcd& g = bundle.g;
  const cplx gii = g(i, i);
  y.degenerate = std::abs(gii) < kMinPivot;

  // Quantities of G^(i), indexed in the full space with entry i masked out.
  Eigen::VectorXcd hv = h.col(i).cast<cplx>();
  hv[i] = 0.0;
  Eigen::VectorXcd g_hv, minor_diag, row_sums;
  Eigen::RowVectorXcd col_sums;
  const auto cached = bundle.minors.find(i);
  if (y.degenerate || cached != bundle.minors.end()) {
    const Eigen::MatrixXcd& gi = minor_green(bundle, i);
    auto expand = [&](const Eigen::VectorXcd& v) {
      Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
      for (int k = 0; k < n; ++k)
        if (k != i) out[k] = v[minor_pos(i, k)];
      return out;
    };
    Eigen::VectorXcd hm(n - 1);
    for (int k = 0; k < n; ++k)
      if (k != i) hm[minor_pos(i, k)] = hv[k];
    g_hv = expand(gi * hm);
    minor_diag = expand(gi.diagonal());
    row_sums = expand(gi.rowwise().sum());
    col_sums = expand(gi.colwise().sum().transpose()).transpose();
  } else {
    const Eigen::VectorXcd u = g.col(i);
    const Eigen::RowVectorXcd v = g.row(i);
    g_hv = g * hv - u * (v * hv / gii);
    minor_diag = g.diagonal() - (u.array() * v.transpose().array()).matrix() / gii;
    const cplx v_sum = v.sum() - gii;
    const cplx u_sum = u.sum() - gii;
    row_sums = g.rowwise().sum() - g.col(i) - u * (v_sum / gii);
    col_sums = g.colwise().sum() - g.row(i) - v * (u_sum / gii);
    g_hv[i] = minor_diag[i] = row_sums[i] = col_sums[i] = 0.0;
  }

  const cplx quad = hv.transpose() * g_hv;
  cplx diag_weighted = 0.0;
  cplx diag_centered = 0.0;
  for (int a = 0; a < n; ++a) {
    if (a == i) continue;
    const cplx h2 = hv[a] * hv[a];
    diag_weighted += h2 * minor_diag[a];
    diag_centered += (h2 - 1.0 / nd) * minor_diag[a];
  }
  const cplx total = row_sums.sum();
  const cplx h_rows = hv.transpose() * row_sums;
  const cplx h_cols = col_sums * hv;

  cplx ward_term = 0.0;
  for (int k = 0; k < n; ++k) ward_term += g(k, i) * g(i, k);

  const double fn = f / nd;
  y.terms[0] = h(i, i);
  y.terms[1] = ward_term / (nd * gii);
  y.terms[2] = -(quad - diag_weighted);
  y.terms[3] = -diag_centered;
  y.terms[4] = fn;
  y.terms[5] = -fn * fn * total;
  y.terms[6] = -fn * (h_rows + h_cols);
  y.value = 0.0;
  for (const cplx& t : y.terms) y.value += t;
  y.reconstruction_residual = std::abs(1.0 / gii + bundle.z.z() + bundle.s - y.value);
  return y;
}

double self_consistency_residual(const ResolventBundle& bundle, const std::vector<cplx>& y) {
  if (static_cast<int>(y.size()) != bundle.n())
    throw ValidationError("self-consistency check needs Y_i for every i");
  cplx avg = 0.0;
  for (int i = 0; i < bundle.n(); ++i) avg += bundle.g(i, i) * y[static_cast<std::size_t>(i)];
  avg /= static_cast<double>(bundle.n());
  const cplx z = bundle.z.z();
  return std::abs(1.0 + z * bundle.s + bundle.s * bundle.s - avg);
}

double local_law_statistic(const ResolventBundle& bundle, cplx m) {
  const int n = bundle.n();
  double best2 = 0.0;
  Eigen::VectorXd col(n);
  for (int j = 0; j < n; ++j) {
    col = bundle.g.col(j).cwiseAbs2();
    col[j] = std::norm(bundle.g(j, j) - m);
    best2 = std::max(best2, col.maxCoeff());
  }
  return std::sqrt(best2);
}

GammaReport gamma_phi(const ResolventBundle& bundle, const std::vector<int>& minor_indices) {
  GammaReport r;
  r.gamma = max_abs(bundle.g);
  const int n = bundle.n();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (int k : minor_indices) {
    check_index(bundle, k);
    if (seen[static_cast<std::size_t>(k)]) continue;
    seen[static_cast<std::size_t>(k)] = 1;
    ++r.minors_used;
    if (auto it = bundle.minors.find(k); it != bundle.minors.end()) {
      r.gamma = std::max(r.gamma, max_abs(it->second));
      continue;
    }
    const cplx pivot = bundle.g(k, k);
    if (std::abs(pivot) < kMinPivot) {
      warn("|G_kk| < 1e-6 at k = " + std::to_string(k) + "; Gamma uses a direct minor");
      r.gamma = std::max(r.gamma, max_abs(minor_direct(*bundle.a, k, bundle.z.z())));
      continue;
    }
    double best2 = 0.0;
    Eigen::VectorXd col(n);
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const cplx gkj = bundle.g(k, j) / pivot;
      col = (bundle.g.col(j) - bundle.g.col(k) * gkj).cwiseAbs2();
      col[k] = 0.0;
      best2 = std::max(best2, col.maxCoeff());
    }
    r.gamma = std::max(r.gamma, std::sqrt(best2));
  }
  r.complete = r.minors_used == n;
  r.phi = r.gamma <= 2.0;
  return r;
}

}  // namespace erlocal
