#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <Eigen/Dense>

#include "erlocal/semicircle.hpp"

namespace erlocal {

using boost::multiprecision::cpp_int;

/// Largest r accepted by the exact Stirling table.
inline constexpr int kStirlingExactMax = 64;

/// S(r, k) by S(r,k) = k S(r-1,k) + S(r-1,k-1). Requires 0 <= k <= r <= 64.
cpp_int stirling2(int r, int k);

/// log S(r, k); exact for r <= 64, otherwise the upper bound
/// log(C(r,k) k^{r-k} / 2). Returns -inf when S(r, k) = 0.
double log_stirling2(int r, int k);

/// log(C(r,k) k^{r-k} / 2).
double log_stirling2_upper(int r, int k);

/// log R_r(gamma, psi) with R_r = sum_{k=1}^{r/2} S(r,k) gamma^{2k} psi^{r-2k},
/// summed in log space. -inf when R_r = 0.
double log_R_r(int r, double gamma, double psi);
double R_r(int r, double gamma, double psi);

/// (2r/(1+2(log(psi/gamma))_+) v 2)(gamma v psi).
double bound_linear(int r, double gamma, double psi);
/// 2(1+2q^2/N) max|a| (r/q^2 v sqrt(r/q^2)).
double bound_squares(int r, double q, int n, double max_abs_a);
/// (2r/(1+(log(psi/gamma))_+) v 2)^2 (gamma v psi).
double bound_bilinear(int r, double gamma, double psi);
/// (4r/(1+(log(psi/gamma))_+) v 4)^2 (gamma v psi).
double bound_quadratic(int r, double gamma, double psi);

enum class FormKind { linear, squares, bilinear, quadratic };
const char* to_string(FormKind kind);
FormKind parse_form_kind(const std::string& text);
bool is_matrix_kind(FormKind kind);

struct GammaPsi {
  double gamma = 0.0;
  double psi = 0.0;
};

/// Smallest admissible (gamma, psi). Vectors: gamma = ((1/N) sum|a_i|^2)^{1/2},
/// psi = max|a_i|/q. Matrices: gamma = max over rows and columns of
/// ((1/N) sum|a_ij|^2)^{1/2}, psi = max|a_ij|/q^2; the diagonal is dropped
/// for quadratic forms.
GammaPsi derive_gamma_psi(const Eigen::VectorXcd& a, int n, double q);
GammaPsi derive_gamma_psi(const Eigen::MatrixXcd& a, int n, double q, FormKind kind);

/// A multilinear form in independent centered rescaled Bernoulli variables
/// X_i = (B_i - p)/sqrt(p(1-p)N), together with the bound parameters.
/// Vector kinds use `vec`, matrix kinds use `mat`.
struct LdpInstance {
  FormKind kind = FormKind::linear;
  int n = 0;
  double q = 1.0;
  double p = 0.5;
  int r = 2;
  Eigen::VectorXcd vec;
  Eigen::MatrixXcd mat;
  double gamma = 0.0;
  double psi = 0.0;

  /// Throws ValidationError on odd r, q outside [1, sqrt(N)], coefficient
  /// shape mismatch, gamma/psi below the tight values, or a Bernoulli law
  /// violating the moment conditions for this q.
  void validate() const;
  /// Sets gamma and psi to the tight values from the coefficients.
  void set_tight_gamma_psi();
  double bound() const;
};

/// Builds an instance; q defaults to sqrt(pN) and p to q^2/N when only one
/// is given (pass a non-positive value for "absent").
LdpInstance make_instance(FormKind kind, int n, double q, double p, int r,
                          Eigen::VectorXcd vec, Eigen::MatrixXcd mat);

/// Value of the form at outcome x (bilinear: x then y).
cplx evaluate_form(const LdpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

inline constexpr int kEnumerateMaxN = 14;
inline constexpr int kEnumerateMaxNBilinear = 10;
inline constexpr int kEnumerateMaxR = 16;

/// ||form||_r = (E|form|^r)^{1/r} summed over every Bernoulli outcome.
double exact_lr_enumerate(const LdpInstance& inst, unsigned threads = 1);

inline constexpr long kMonteCarloMinSamples = 10000;
inline constexpr int kMonteCarloMaxR = 12;

struct MonteCarloResult {
  double estimate = 0.0;
  double std_error = 0.0;  // delta method on the r-th root scale
  double mean_power = 0.0;  // mean of |form|^r
  double mean_power_se = 0.0;
  long samples = 0;
};

/// Monte Carlo estimate of ||form||_r. Samples are split into fixed blocks,
/// each with its own generator seeded from (seed, block), so the result does
/// not depend on `threads`.
MonteCarloResult monte_carlo_lr(const LdpInstance& inst, long samples, std::uint64_t seed,
                                unsigned threads = 1);

/// Accepts "1.5", "-2i", "1-0.5i", "3+i".
cplx parse_complex(const std::string& text);
/// Comma separated scalars; matrix rows separated by ';'.
Eigen::VectorXcd parse_coefficient_vector(const std::string& text);
Eigen::MatrixXcd parse_coefficient_matrix(const std::string& text);

/// key = value instance file: kind, n, q, p, r, coeffs (inline) or
/// coeffs_file, optional gamma and psi. For matrix kinds coeffs_file is a
/// binary complex matrix; for vector kinds a text file of scalars separated
/// by commas or whitespace. Relative paths resolve against `base_dir`.
LdpInstance parse_instance(const std::string& text, const std::string& base_dir = ".");
LdpInstance load_instance(const std::string& path);

struct LdpRow {
  FormKind kind;
  int n;
  double q;
  int r;
  double gamma;
  double psi;
  double bound;
  std::string method;  // "exact", "mc" or "bound"
  double estimate;
  double std_error;
  bool pass;
};

std::string ldp_csv_header();
std::string ldp_csv_row(const LdpRow& row);

}  // namespace erlocal
