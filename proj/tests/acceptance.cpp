#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "erlocal/ensemble.hpp"
#include "erlocal/experiments.hpp"
#include "erlocal/ldp.hpp"
#include "erlocal/numerics.hpp"
#include "erlocal/parallel.hpp"
#include "erlocal/resolvent.hpp"
#include "erlocal/semicircle.hpp"

using namespace erlocal;
namespace fs = std::filesystem;

namespace {

unsigned threads() { return default_thread_count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

EnsembleConfig ensemble(int n, double q, std::uint64_t seed = 0) {
  EnsembleConfig c;
  c.n = n;
  c.q = q;
  c.seed = seed;
  return c;
}

std::shared_ptr<const Eigen::MatrixXd> draw(int n, double q, std::uint64_t seed) {
  return std::make_shared<const Eigen::MatrixXd>(sample_er(ensemble(n, q, seed)).rescaled);
}

// 1. Ward identity for G and sampled minors.
Outcome ward() {
  const int sizes[] = {50, 200, 1000};
  const double etas[] = {1.0, 0.1, 0.01};
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> energy(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int n = sizes[k % 3];
    const double eta = etas[(k / 3) % 3];
    auto b = compute_green(draw(n, 3.0, derive_seed(1, k)), {energy(gen), eta});
    worst = std::max(worst, ward_residual(b));
    for (int idx : sample_indices(n, 8, derive_seed(2, k)))
      worst = std::max(worst, ward_residual(minor_green(b, idx), eta));
  }
  return {worst <= 1e-8, "max relative residual " + fmt(worst) +
                             " <= 1e-08 over 100 bundles and 800 minors"};
}

// 2. Schur complement identities at N = 50.
Outcome schur() {
  const int n = 50;
  const double etas[] = {1.0, 0.1, 0.03};
  std::mt19937_64 gen(202);
  std::uniform_real_distribution<double> energy(-2.0, 2.0);
  double worst_ratio = 0.0;
  std::map<std::string, double> worst;
  for (int t = 0; t < 20; ++t) {
    const double eta = etas[t % 3];
    const auto s = sample_er(ensemble(n, 3.0, derive_seed(3, t)));
    auto b = compute_green(std::make_shared<const Eigen::MatrixXd>(s.rescaled), {energy(gen), eta});
    const double tol = 1e-6 * (1.0 + 1.0 / eta);
    auto note = [&](const std::string& name, double v) {
      worst[name] = std::max(worst[name], v);
      worst_ratio = std::max(worst_ratio, v / tol);
    };
    for (int k = 0; k < n; ++k) {
      const Eigen::MatrixXcd id = minor_by_identity(b.g, k);
      note("minor", (id - minor_direct(s.rescaled, k, b.z.z())).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) note("schurix", schurix_residual(b, i, j));
    std::vector<cplx> ys;
    for (int i = 0; i < n; ++i) {
      note("spsf", schur_spsf_residual(b, i));
      const YDecomposition y = compute_Y(b, i, s.centered, s.f_value);
      note("Y", y.reconstruction_residual);
      ys.push_back(y.value);
    }
    note("self_consistency", self_consistency_residual(b, ys));
  }
  std::string detail;
  for (const auto& [name, v] : worst) detail += name + " " + fmt(v, 3) + ", ";
  return {worst_ratio <= 1.0, "max residuals " + detail + "worst/(1e-06 (1+1/eta)) = " +
                                  fmt(worst_ratio, 3) + " over 20 samples"};
}

// 3. R_r^{1/r} against the linear bound.
Outcome comb_estimate() {
  double worst = 0.0;
  int checked = 0;
  for (int r = 2; r <= 32; r += 2)
    for (int t = 0; t < 60; ++t) {
      const double ratio = std::pow(10.0, -3.0 + 9.0 * t / 59.0);
      const double lhs = std::exp(log_R_r(r, 1.0, ratio) / r);
      const double rhs = bound_linear(r, 1.0, ratio);
      worst = std::max(worst, (lhs - rhs) / rhs);
      ++checked;
    }
  return {worst <= 1e-12, "max (lhs - bound)/bound " + fmt(worst) + " <= 1e-12 over " +
                              std::to_string(checked) + " (r, psi/gamma) pairs"};
}

// 4. Stability of the self-consistent equation.
Outcome stability() {
  std::mt19937_64 gen(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  double worst = -1e300;
  for (int k = 0; k < 100000; ++k) {
    const cplx s(4.0 * u(gen), 4.0 * u(gen));
    const SpectralParam z{4.0 * u(gen), 1e-6 + 2.0 * pos(gen)};
    const StabilityGap g = stability_gap(s, z);
    worst = std::max(worst, g.gap - std::sqrt(g.residual));
  }
  return {worst <= 1e-9, "max(gap - sqrt|s^2+zs+1|) = " + fmt(worst) +
                             " <= 1e-09 over 100000 points"};
}

Eigen::VectorXcd coeff_vector(int n, int family, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) {
    switch (family) {
      case 0: v[i] = g(gen); break;
      case 1: v[i] = cplx(g(gen), g(gen)); break;
      case 2: v[i] = i == 0 ? cplx(10.0, 0.0) : cplx(0.1 * g(gen), 0.0); break;
      case 3: v[i] = 1.0; break;
      default: v[i] = std::polar(1.0, 6.283185307179586 * (i * 0.37 + g(gen))); break;
    }
  }
  return v;
}

Eigen::MatrixXcd coeff_matrix(int n, int family, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  if (family == 4) {
    const Eigen::VectorXcd a = coeff_vector(n, 1, gen), b = coeff_vector(n, 1, gen);
    return a * b.transpose();
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      switch (family) {
        case 0: m(i, j) = g(gen); break;
        case 1: m(i, j) = cplx(g(gen), g(gen)); break;
        case 2: m(i, j) = i == 0 && j == 1 ? cplx(0.0, 10.0) : cplx(0.1 * g(gen), 0.0); break;
        default: m(i, j) = 1.0; break;
      }
    }
  return m;
}

LdpInstance ldp_instance(FormKind kind, int n, double p, int r, int family, std::mt19937_64& gen) {
  if (is_matrix_kind(kind)) return make_instance(kind, n, 0.0, p, r, {}, coeff_matrix(n, family, gen));
  return make_instance(kind, n, 0.0, p, r, coeff_vector(n, family, gen), {});
}

const FormKind kKinds[] = {FormKind::linear, FormKind::squares, FormKind::bilinear,
                           FormKind::quadratic};

// 5. Enumeration and Monte Carlo against the analytic bounds.
Outcome oracle_domination() {
  std::mt19937_64 gen(505);
  int exact_count = 0, exact_fail = 0;
  double exact_worst = 0.0;
  for (FormKind kind : kKinds)
    for (double p : {0.1, 0.3, 0.5})
      for (int r : {2, 4, 6, 8})
        for (int family = 0; family < 5; ++family) {
          const int limit = kind == FormKind::bilinear ? 10 : 12;
          const int lo = std::max(2, static_cast<int>(std::ceil(1.0 / p - 1e-9)));
          std::uniform_int_distribution<int> pick(lo, limit);
          const auto inst = ldp_instance(kind, pick(gen), p, r, family, gen);
          const double exact = exact_lr_enumerate(inst, threads());
          const double bound = inst.bound();
          exact_worst = std::max(exact_worst, exact / bound);
          exact_fail += exact > bound;
          ++exact_count;
        }
  int mc_count = 0, mc_fail = 0;
  double mc_worst = 0.0;
  for (int k = 0; k < 60; ++k) {
    const FormKind kind = kKinds[k % 4];
    const double p = (k / 4) % 3 == 0 ? 0.1 : ((k / 4) % 3 == 1 ? 0.3 : 0.5);
    const int r = k % 8 < 4 ? 2 : 4;
    const auto inst = ldp_instance(kind, 500, p, r, (k / 12) % 5, gen);
    const auto mc = monte_carlo_lr(inst, 20000, derive_seed(5, k), threads());
    const double bound = inst.bound();
    mc_worst = std::max(mc_worst, mc.estimate / bound);
    mc_fail += mc.estimate > bound + 3.0 * mc.std_error;
    ++mc_count;
  }
  return {exact_fail == 0 && mc_fail == 0,
          "enumeration: " + std::to_string(exact_fail) + " failures over " +
              std::to_string(exact_count) + " instances (max L^r/bound " + fmt(exact_worst, 3) +
              "); Monte Carlo at N = 500: " + std::to_string(mc_fail) + " failures over " +
              std::to_string(mc_count) + " instances (max estimate/bound " + fmt(mc_worst, 3) + ")"};
}

// 6. Monte Carlo against enumeration.
Outcome mc_cross_validation() {
  std::mt19937_64 gen(606);
  int within = 0, total = 0;
  double worst_z = 0.0;
  for (int k = 0; k < 100; ++k) {
    const FormKind kind = kKinds[k % 4];
    // At p = 1/2 every X_i^2 equals 1/N and the squares form vanishes identically.
    const double p = k % 3 == 0 || kind == FormKind::squares ? 0.3 : 0.5;
    const int r = 2 + 2 * ((k / 4) % 3);
    const int n = kind == FormKind::bilinear ? 6 : 10;
    const auto inst = ldp_instance(kind, n, p, r, (k / 12) % 5, gen);
    const double exact = exact_lr_enumerate(inst, threads());
    const auto mc = monte_carlo_lr(inst, 100000, derive_seed(6, k), threads());
    const double diff = std::abs(mc.estimate - exact);
    double z = diff <= 1e-12 * inst.bound() ? 0.0 : std::numeric_limits<double>::infinity();
    if (mc.std_error > 0.0) z = diff / mc.std_error;
    worst_z = std::max(worst_z, z);
    within += z <= 3.0;
    ++total;
  }
  return {within >= 95, std::to_string(within) + " of " + std::to_string(total) +
                            " instances within 3 SE (>= 95 required; max |z| " + fmt(worst_z, 3) +
                            ")"};
}

// 7. Main estimates against their bounds.
Outcome main_estimates() {
  const auto rep = main_estimates_study(ensemble(1000, 5.0), {0.2, 0.1}, 4, 2000, 707, threads());
  bool ok = true;
  std::string detail;
  for (const auto& q : rep.quantities) {
    ok = ok && q.dominated;
    detail += q.name + " max L^4 " + fmt(q.max_estimate) + " (SE " + fmt(q.max_std_error, 2) +
              ") vs bound " + fmt(q.bound, 5) + "; ";
  }
  return {ok, detail + "phi = 0 in " + fmt(rep.phi_zero_frequency, 3) + " of 2000 trials"};
}

// 8. Local-law statistic along N.
Outcome local_law_trend() {
  std::vector<double> medians;
  std::string detail;
  for (int n : {500, 1000, 2000, 4000}) {
    SweepPlan plan;
    const double q = 2.0 * std::sqrt(std::log(static_cast<double>(n)));
    plan.ensemble = ensemble(n, q);
    plan.ensemble.f_override = q;
    plan.energies = {0.0};
    plan.eta_grid = {1.0 / std::sqrt(static_cast<double>(n))};
    plan.trials = 50;
    plan.r_values = {2};
    plan.minor_sample_size = 0;
    plan.method = GreenMethod::direct;
    const auto rep = local_law_sweep(plan, 808, threads());
    medians.push_back(rep.grid.front().statistic.q50);
    detail += "N=" + std::to_string(n) + ": " + fmt(medians.back()) + "  ";
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < medians.size(); ++k) decreasing = decreasing && medians[k] < medians[k - 1];
  return {decreasing, "median max|G_ij - m delta_ij| " + detail + "(strict decrease required)"};
}

// 9. Delocalization above and below the connectivity threshold.
Outcome delocalization() {
  const int n = 2000;
  const auto sup = delocalization_study(ensemble(n, 3.0 * std::sqrt(std::log(double(n)))), 50, 909,
                                        threads(), false);
  const int m = 10000;
  const auto sub = delocalization_study(subcritical_config(m, 0.5 * std::log(double(m)), 0), 5, 910,
                                        threads(), false);
  int with_isolated = 0, exact_one = 0;
  for (std::size_t t = 0; t < sub.max_sup_norm.size(); ++t) {
    if (sub.isolated_vertices[t] == 0) continue;
    ++with_isolated;
    exact_one += sub.max_sup_norm[t] == 1.0;
  }
  const bool ok = sup.fraction_below_threshold >= 0.95 && with_isolated > 0 &&
                  exact_one == with_isolated;
  return {ok, "supercritical N = 2000: " + fmt(sup.fraction_below_threshold, 3) +
                  " of 50 trials below N^{(log N)^{-1/2}} = " + fmt(sup.threshold) +
                  " (max statistic " + fmt(sup.summary.max) + "); subcritical N = 10000: " +
                  std::to_string(exact_one) + " of " + std::to_string(with_isolated) +
                  " trials with isolated vertices have max ||u||_inf = 1 exactly"};
}

// 10. Isolated vertices force a large Im s below the threshold.
Outcome subcritical() {
  const auto rep = subcritical_demo(10000, 0.5, 100, 1010, threads());
  int with_isolated = 0, bound_ok = 0, factor_ok = 0;
  RunningMoments ratio;
  for (const auto& row : rep.rows) {
    if (row.isolated < 1) continue;
    ++with_isolated;
    bound_ok += row.bound_holds;
    factor_ok += row.ratio_to_m >= 10.0;
    ratio.add(row.ratio_to_m);
  }
  const bool mean_ok = std::abs(rep.mean_isolated - rep.expected_isolated) <= 3.0 * rep.se_isolated;
  const bool ok = mean_ok && bound_ok == with_isolated && ratio.mean >= 10.0;
  return {ok, "mean Y " + fmt(rep.mean_isolated) + " (SE " + fmt(rep.se_isolated, 3) +
                  ") vs N^{1-kappa} = 100; Im s >= (Y/N) N^{(1+kappa)/2} in " +
                  std::to_string(bound_ok) + " of " + std::to_string(with_isolated) +
                  " trials; mean Im s / Im m = " + fmt(ratio.mean) + " >= 10 (" +
                  std::to_string(factor_ok) + " trials individually >= 10)"};
}

// 11. Eigenvalue counts against the semicircle.
Outcome dos() {
  const int n = 4000;
  const auto rep = dos_local_law(ensemble(n, 3.0 * std::sqrt(std::log(double(n)))),
                                 {{-1.0, 1.0}, {0.0, 2.0}, {-2.0, 2.0}}, 50, 1111, threads());
  bool ok = true;
  std::string detail;
  for (const auto& iv : rep.intervals) {
    ok = ok && iv.deviation.q50 <= 0.05;
    detail += "[" + fmt(iv.a) + "," + fmt(iv.b) + "] rho " + fmt(iv.rho, 5) + " median |mu-rho| " +
              fmt(iv.deviation.q50, 3) + "; ";
  }
  return {ok, detail + "threshold 0.05"};
}

// 12. Reruns from manifests reproduce the payloads.
int run_cli(const std::string& args) {
  const std::string cmd = std::string(ERLOCAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "erlocal_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"localaw", "localaw --n 200 --q 4 --etas geometric:1:0.02:6 --trials 6 --minors 8"},
      {"bootstrap", "bootstrap --n 200 --q 4 --etas geometric:1:0.02:6 --trials 6 --xi 1"},
      {"deloc", "deloc --n 300 --q 5 --trials 4"},
      {"dos", "dos --n 300 --q 5 --trials 4"},
      {"que", "que --n 300 --q 5 --trials 4"},
      {"subcritical", "subcritical --n 3000 --kappa 0.5 --trials 4"},
      {"mainest", "mainest --n 200 --q 5 --trials 20"},
      {"ldp", "ldp --kind quadratic --n 60 --p 0.2 --r 4 --coeffs-file " +
                  (dir / "a.bin").string() + " --mode mc --samples 20000"},
  };
  std::mt19937_64 gen(1212);
  write_complex_matrix(dir / "a.bin", coeff_matrix(60, 1, gen));
  int identical = 0, numeric = 0;
  std::string failures;
  for (const auto& [name, args] : commands) {
    const std::string a = (dir / (name + "_a")).string();
    const std::string b = (dir / (name + "_b")).string();
    const std::string c = (dir / (name + "_c")).string();
    bool ok = run_cli(args + " --threads 1 --out " + a) == 0 &&
              run_cli("rerun " + a + ".manifest.json --out " + b) == 0 &&
              run_cli("rerun " + a + ".manifest.json --threads 8 --out " + c) == 0;
    if (!ok) {
      failures += name + " (exit code) ";
      continue;
    }
    const std::string pa = slurp(a + ".json");
    if (!pa.empty() && pa == slurp(b + ".json"))
      ++identical;
    else
      failures += name + " (bytes) ";
    if (nlohmann::json::parse(pa) == nlohmann::json::parse(slurp(c + ".json")))
      ++numeric;
    else
      failures += name + " (workers) ";
  }
  fs::remove_all(dir);
  const int total = static_cast<int>(commands.size());
  return {identical == total && numeric == total,
          std::to_string(identical) + " of " + std::to_string(total) +
              " commands byte-identical on rerun at equal workers, " + std::to_string(numeric) +
              " of " + std::to_string(total) + " numerically equal at 1 vs 8 workers" +
              (failures.empty() ? "" : "; failed: " + failures)};
}

struct Criterion {
  int id;
  const char* label;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  configure_blas_single_threaded();
  const std::vector<Criterion> all = {
      {1, "ward", ward},
      {2, "schur", schur},
      {3, "comb_estimate", comb_estimate},
      {4, "stability", stability},
      {5, "oracle_domination", oracle_domination},
      {6, "mc_cross_validation", mc_cross_validation},
      {7, "main_estimates", main_estimates},
      {8, "local_law_trend", local_law_trend},
      {9, "delocalization", delocalization},
      {10, "subcritical", subcritical},
      {11, "dos", dos},
      {12, "determinism", determinism},
  };
  std::vector<int> wanted;
  for (int k = 1; k < argc; ++k) wanted.push_back(std::atoi(argv[k]));
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.label,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
