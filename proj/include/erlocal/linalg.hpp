#pragma once

#include <complex>

#include <Eigen/Dense>

namespace erlocal {

using cplx = std::complex<double>;

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // column k is the unit eigenvector of values[k]
};

/// Full symmetric eigendecomposition (LAPACK divide and conquer).
SymmetricEigen eigh(const Eigen::MatrixXd& a);

/// Eigenvalues only, ascending. Uses the two-stage tridiagonal reduction,
/// which is several times faster than `eigh` for large matrices.
Eigen::VectorXd eigvalsh(const Eigen::MatrixXd& a);

/// U diag(1/(lambda - z)) U^T.
Eigen::MatrixXcd spectral_green(const SymmetricEigen& eig, cplx z);

/// (A - z)^{-1} by complex LU factorization. Throws NumericalError, naming
/// z, when the factorization reports an exactly singular pivot.
Eigen::MatrixXcd shifted_inverse(const Eigen::MatrixXd& a, cplx z);

/// Max over rows i of ||(G (A - z))_{i,:} - e_i||_inf / ||G_{i,:}||_1.
double inverse_row_residual(const Eigen::MatrixXcd& g, const Eigen::MatrixXd& a, cplx z);

/// max_ij |(U^T U - I)_ij|.
double orthonormality_residual(const Eigen::MatrixXd& u);

}  // namespace erlocal
