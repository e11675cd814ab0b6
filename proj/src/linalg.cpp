#include "erlocal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "erlocal/errors.hpp"
#include "lapack.hpp"

namespace erlocal {

namespace {

std::string describe(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "z = " << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
  return os.str();
}

// C = V diag(w) V^T restricted to the columns where w > 0, written into the
// lower triangle of `out` scaled by `sign` and added to it.
void accumulate_gram(const Eigen::MatrixXd& v, const Eigen::VectorXd& w, double sign,
                     Eigen::MatrixXd& out) {
  const Eigen::Index n = v.rows();
  std::vector<Eigen::Index> cols;
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] > 0.0) cols.push_back(k);
  if (cols.empty()) return;
  Eigen::MatrixXd scaled(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    scaled.col(static_cast<Eigen::Index>(c)) = v.col(cols[c]) * std::sqrt(w[cols[c]]);
  cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(n),
              static_cast<int>(scaled.cols()), sign, scaled.data(), static_cast<int>(n), 1.0,
              out.data(), static_cast<int>(n));
}

}  // namespace

SymmetricEigen eigh(const Eigen::MatrixXd& a) {
  SymmetricEigen out;
  out.vectors = a;
  out.values.resize(a.rows());
  const auto n = static_cast<lapack_int>(a.rows());
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                                         out.values.data());
  if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
  return out;
}

Eigen::VectorXd eigvalsh(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd work = a;
  Eigen::VectorXd values(a.rows());
  const auto n = static_cast<lapack_int>(a.rows());
  if (n == 0) return values;
  lapack_int info =
      LAPACKE_dsyevd_2stage(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, values.data());
  if (info != 0) {
    work = a;
    info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, values.data());
  }
  if (info != 0) throw NumericalError("dsyevd failed with info = " + std::to_string(info));
  return values;
}

Eigen::MatrixXcd spectral_green(const SymmetricEigen& eig, cplx z) {
  const Eigen::Index n = eig.values.size();
  Eigen::VectorXd re_plus(n), re_minus(n), im(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx d = 1.0 / (eig.values[k] - z);
    re_plus[k] = d.real() > 0 ? d.real() : 0.0;
    re_minus[k] = d.real() < 0 ? -d.real() : 0.0;
    im[k] = d.imag();
  }
  Eigen::MatrixXd re_part = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd im_part = Eigen::MatrixXd::Zero(n, n);
  accumulate_gram(eig.vectors, re_plus, 1.0, re_part);
  accumulate_gram(eig.vectors, re_minus, -1.0, re_part);
  if (z.imag() > 0) {
    accumulate_gram(eig.vectors, im, 1.0, im_part);
  } else {
    Eigen::VectorXd neg = -im;
    accumulate_gram(eig.vectors, neg, -1.0, im_part);
  }
  Eigen::MatrixXcd g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const cplx v(re_part(i, j), im_part(i, j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXcd shifted_inverse(const Eigen::MatrixXd& a, cplx z) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXcd m = a.cast<cplx>();
  m.diagonal().array() -= z;
  std::vector<lapack_int> pivots(static_cast<std::size_t>(n));
  const auto ln = static_cast<lapack_int>(n);
  lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, ln, ln, m.data(), ln, pivots.data());
  if (info > 0) throw NumericalError("LU factorization of A - z is singular at " + describe(z));
  if (info < 0) throw NumericalError("zgetrf argument error at " + describe(z));
  info = LAPACKE_zgetri(LAPACK_COL_MAJOR, ln, m.data(), ln, pivots.data());
  if (info != 0) throw NumericalError("inversion of A - z failed at " + describe(z));
  return m;
}

double inverse_row_residual(const Eigen::MatrixXcd& g, const Eigen::MatrixXd& a, cplx z) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd gr = g.real();
  const Eigen::MatrixXd gi = g.imag();
  Eigen::MatrixXd pr(n, n), pi(n, n);
  const int ni = static_cast<int>(n);
  cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, ni, ni, ni, 1.0, gr.data(), ni,
              a.data(), ni, 0.0, pr.data(), ni);
  cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, ni, ni, ni, 1.0, gi.data(), ni,
              a.data(), ni, 0.0, pi.data(), ni);
  double shift_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) row += std::abs(a(i, j) - (i == j ? z : cplx(0.0)));
    shift_norm = std::max(shift_norm, row);
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double res = 0.0;
    double gnorm = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      cplx v = cplx(pr(i, j), pi(i, j)) - z * g(i, j);
      if (i == j) v -= 1.0;
      res = std::max(res, std::abs(v));
      gnorm += std::abs(g(i, j));
    }
    worst = std::max(worst, res / (1.0 + gnorm * shift_norm));
  }
  return worst;
}


double orthonormality_residual(const Eigen::MatrixXd& u) {
  const auto n = static_cast<int>(u.cols());
  if (n == 0) return 0.0;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  cblas_dsyrk(CblasColMajor, CblasLower, CblasTrans, n, static_cast<int>(u.rows()), 1.0, u.data(),
              static_cast<int>(u.rows()), 0.0, gram.data(), n);
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

}  // namespace erlocal
