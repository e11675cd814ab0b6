#include "erlocal/semicircle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "erlocal/errors.hpp"

namespace erlocal {

SemicircleRoots semicircle_roots(SpectralParam zp) {
  if (!(zp.eta > 0.0)) throw ValidationError("spectral parameter needs eta > 0");
  const cplx z = zp.z();
  // Branch cut on the positive real axis: Im sqrt >= 0.
  cplx w = std::sqrt(z * z - 4.0);
  if (w.imag() < 0.0) w = -w;
  const cplx r1 = 0.5 * (-z + w);
  const cplx r2 = 0.5 * (-z - w);
  const cplx big = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  const cplx small = 1.0 / big;
  if (small.imag() > 0.0) return {small, big};
  if (big.imag() > 0.0) return {big, small};
  return small.imag() >= big.imag() ? SemicircleRoots{small, big} : SemicircleRoots{big, small};
}

cplx stieltjes_m(SpectralParam z) { return semicircle_roots(z).m; }

cplx other_root(SpectralParam z) { return semicircle_roots(z).m_tilde; }

StabilityGap stability_gap(cplx s, SpectralParam z) {
  const auto roots = semicircle_roots(z);
  return {std::min(std::abs(s - roots.m), std::abs(s - roots.m_tilde)),
          std::abs(s * s + z.z() * s + 1.0)};
}

Zeta zeta(const ZetaParams& p) {
  const double n_eta = static_cast<double>(p.n) * p.eta;
  if (!(n_eta > 1.0))
    throw ValidationError("zeta needs N * eta > 1 so that log N + log eta > 0");
  if (!(p.q > 0.0) || p.r < 0.0 || p.f < 0.0) throw ValidationError("zeta needs q > 0, r, f >= 0");
  Zeta out;
  out.terms[0] = std::pow(p.r / (p.q * p.q), 0.25);
  out.terms[1] = p.r / std::pow(n_eta, 1.0 / 6.0);
  out.terms[2] = p.r / (std::log(n_eta) * p.q);
  out.terms[3] = p.f / std::pow(n_eta, 0.25);
  out.total = out.terms[0] + out.terms[1] + out.terms[2] + out.terms[3];
  return out;
}

namespace {

double log_k(double delta, double D) {
  return std::log(4.0 * kTailConstant) + 5.0 + D - std::log(delta);
}

}  // namespace

ExplicitConstants explicit_constants(double delta, double D) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw ValidationError("delta must lie in (0, 1]");
  if (!(D > 0.0)) throw ValidationError("D must be positive");
  const double lk = log_k(delta, D);
  ExplicitConstants c;
  c.log_C = 2.0 * lk;
  c.C = std::exp(c.log_C);
  const double e10 = std::exp(10.0);
  c.log_N0 = (e10 * lk) * (e10 * lk);
  c.N0 = c.log_N0 > std::log(std::numeric_limits<double>::max())
             ? std::numeric_limits<double>::infinity()
             : std::exp(c.log_N0);
  return c;
}

bool AppendixReport::all_pass() const {
  return tau.pass && q_lower.pass && f_upper.pass && n_tau.pass && q_critical.pass &&
         q_polylog.pass && n_threshold.pass;
}

AppendixReport appendix_conditions(double q, double f, double n, double tau, double delta,
                                   double D) {
  if (!(q > 0.0 && n > std::exp(1.0) && tau > 0.0 && f >= 0.0))
    throw ValidationError("appendix conditions need q, tau > 0, f >= 0 and N > e");
  const double lk = log_k(delta, D);
  const double log_n = std::log(n);
  const double ll = std::log(log_n);
  const double lq = std::log(q);
  const double lf = f > 0.0 ? std::log(f) : -std::numeric_limits<double>::infinity();
  const double log_c = explicit_constants(delta, D).log_C;
  const double log_n0 = explicit_constants(delta, D).log_N0;

  AppendixReport r{};
  r.tau = {"log tau >= -log(log N)/2", std::log(tau) >= -0.5 * ll, std::log(tau), -0.5 * ll};
  const double q_need = std::max(2.0 * lk + 0.5 * ll, lk - std::log(tau));
  r.q_lower = {"log q >= log max{K^2 sqrt(log N), K/tau}", lq >= q_need, lq, q_need};
  const double f_cap = 0.25 * tau * log_n - lk;
  r.f_upper = {"log f <= (tau/4) log N - log K", lf <= f_cap, lf, f_cap};
  const double n_need = 6.0 * (lk + ll);
  r.n_tau = {"tau log N >= 6 log(K log N)", tau * log_n >= n_need, tau * log_n, n_need};
  const double qc = log_c + 0.5 * ll;
  r.q_critical = {"log q >= log C + log(log N)/2", lq >= qc, lq, qc};
  r.q_polylog = {"log q <= 10 log(log N)", lq <= 10.0 * ll, lq, 10.0 * ll};
  r.n_threshold = {"log N >= log N0", log_n >= log_n0, log_n, log_n0};
  return r;
}

double semicircle_density(double x) {
  const double v = 4.0 - x * x;
  return v > 0.0 ? std::sqrt(v) / (2.0 * std::numbers::pi) : 0.0;
}

double semicircle_mass(double a, double b) {
  if (a > b) throw ValidationError("semicircle_mass needs a <= b");
  auto cdf = [](double x) {
    x = std::clamp(x, -2.0, 2.0);
    return (x * std::sqrt(std::max(0.0, 4.0 - x * x)) + 4.0 * std::asin(0.5 * x)) /
           (4.0 * std::numbers::pi);
  };
  return cdf(b) - cdf(a);
}

}  // namespace erlocal
