#pragma once

#include <array>
#include <complex>

namespace erlocal {

using cplx = std::complex<double>;

/// Spectral parameter z = E + i eta.
struct SpectralParam {
  double E = 0.0;
  double eta = 1.0;

  cplx z() const { return {E, eta}; }
  /// Membership in the strip N^{-1} < eta <= 1.
  bool in_strip(int n) const { return eta > 1.0 / n && eta <= 1.0; }
};

struct SemicircleRoots {
  cplx m;        // Im m > 0
  cplx m_tilde;  // the other root of x^2 + z x + 1 = 0
};

/// Both roots of x^2 + z x + 1 = 0 for eta > 0. The small root is obtained
/// from the large one through m * m_tilde = 1, which avoids cancellation
/// for large |z|; m is selected by the sign of its imaginary part.
SemicircleRoots semicircle_roots(SpectralParam z);

/// Stieltjes transform of the semicircle law.
cplx stieltjes_m(SpectralParam z);
cplx other_root(SpectralParam z);

struct StabilityGap {
  double gap = 0.0;       // min(|s - m|, |s - m_tilde|)
  double residual = 0.0;  // |s^2 + z s + 1|
};
StabilityGap stability_gap(cplx s, SpectralParam z);

struct ZetaParams {
  int n = 0;
  double r = 2.0;
  double q = 1.0;
  double eta = 1.0;
  double f = 0.0;
};

struct Zeta {
  double total = 0.0;
  std::array<double, 4> terms{};
};

/// (r/q^2)^{1/4} + r/(N eta)^{1/6} + r/(log(N eta) q) + f/(N eta)^{1/4}.
/// Requires N eta > 1.
Zeta zeta(const ZetaParams& params);

/// Constant C_* of the local-law tail bound.
inline constexpr double kTailConstant = 1000.0;

struct ExplicitConstants {
  double C = 0.0;
  double log_C = 0.0;
  double N0 = 0.0;  // +inf when exp overflows
  double log_N0 = 0.0;
};

/// C = (4 C_* e^{5+D}/delta)^2 and N0 = exp[(e^10 log(4 C_* e^{5+D}/delta))^2].
ExplicitConstants explicit_constants(double delta, double D);

struct ConditionRow {
  const char* name;
  bool pass;
  double lhs;  // both sides in log space unless noted in `name`
  double rhs;
};

struct AppendixReport {
  ConditionRow tau;            // tau >= (log N)^{-1/2}
  ConditionRow q_lower;        // q >= max{K^2 sqrt(log N), K/tau}
  ConditionRow f_upper;        // f <= N^{tau/4} / K
  ConditionRow n_tau;          // N^tau >= (K log N)^6
  ConditionRow q_critical;     // q >= C sqrt(log N)
  ConditionRow q_polylog;      // q <= (log N)^10
  ConditionRow n_threshold;    // N >= N0
  bool all_pass() const;
};

/// Admissibility conditions for the high-probability local law, evaluated
/// in log space (K = 4 C_* e^{5+D} / delta).
AppendixReport appendix_conditions(double q, double f, double n, double tau, double delta,
                                   double D);

/// Semicircle mass of [a, b] from the closed-form antiderivative.
double semicircle_mass(double a, double b);

/// Semicircle density (2 pi)^{-1} sqrt((4 - x^2)_+).
double semicircle_density(double x);

}  // namespace erlocal
