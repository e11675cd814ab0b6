// erlocal: sparse random graph local-law experiments and calculators.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "erlocal/diagnostics.hpp"
#include "erlocal/ensemble.hpp"
#include "erlocal/errors.hpp"
#include "erlocal/experiments.hpp"
#include "erlocal/keyvalue.hpp"
#include "erlocal/ldp.hpp"
#include "erlocal/parallel.hpp"
#include "erlocal/semicircle.hpp"

namespace fs = std::filesystem;
using namespace erlocal;

namespace {

struct Common {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

struct EnsembleFlags {
  int n = 0;
  std::optional<double> q, q_mult, f;
  bool no_diagonal = false;
  std::string config;
};

struct RunContext {
  std::string command;
  std::vector<std::string> args;  // the command line, without program name
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  unsigned threads = 1;
  std::chrono::steady_clock::time_point start;
  std::vector<std::string> artifacts;
};

std::string fmtg(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ','))
    out.push_back(static_cast<int>(parse_integer(key, part)));
  return out;
}

void add_common(CLI::App* app, Common& c, bool with_seed = true) {
  if (with_seed)
    app->add_option("--seed", c.seed, "Master seed (drawn from entropy and recorded if absent)");
  app->add_option("--threads", c.threads, "Worker threads (default: ERLOCAL_THREADS or all cores)");
  app->add_option("--out", c.out, "Output path prefix");
}

void add_ensemble(CLI::App* app, EnsembleFlags& e) {
  app->add_option("--n", e.n, "Matrix dimension N");
  app->add_option("--q", e.q, "Sparsity parameter q = sqrt(pN)");
  app->add_option("--q-mult", e.q_mult, "Set q = mult * sqrt(log N)");
  app->add_option("--f", e.f, "Replace the mean shift f");
  app->add_flag("--no-diagonal", e.no_diagonal, "Do not sample diagonal entries");
  app->add_option("--config", e.config, "Ensemble config file (key = value)");
}

EnsembleConfig resolve_ensemble(const EnsembleFlags& e) {
  EnsembleConfig c;
  bool have_q = false;
  if (!e.config.empty()) {
    c = load_ensemble_config(e.config);
    have_q = true;
  }
  if (e.n > 0) c.n = e.n;
  if (c.n <= 0) throw ValidationError("--n is required");
  if (e.q && e.q_mult) throw ValidationError("give only one of --q and --q-mult");
  if (e.q) {
    c.q = *e.q;
    have_q = true;
  }
  if (e.q_mult) {
    if (c.n < 3) throw ValidationError("--q-mult needs N >= 3");
    c.q = *e.q_mult * std::sqrt(std::log(static_cast<double>(c.n)));
    have_q = true;
  }
  if (!have_q) throw ValidationError("--q or --q-mult is required");
  if (e.f) c.f_override = *e.f;
  if (e.no_diagonal) c.include_diagonal = false;
  c.validate();
  return c;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_text(RunContext& ctx, const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("failed writing '" + path + "'");
  ctx.artifacts.push_back(path);
}

void write_manifest(const RunContext& ctx, const std::string& prefix, const json& params) {
  json m;
  m["command"] = ctx.command;
  m["parameters"] = params;
  m["master_seed"] = ctx.seed;
  m["seed_source"] = ctx.seed_from_entropy ? "entropy" : "flag";
  std::vector<std::string> rerun = ctx.args;
  if (ctx.seed_from_entropy) {
    rerun.push_back("--seed");
    rerun.push_back(std::to_string(ctx.seed));
  }
  m["arguments"] = rerun;
  m["artifacts"] = ctx.artifacts;
  m["workers"] = ctx.threads;
  m["blas_core"] = blas_core_name();
  m["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  const std::string path = prefix + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << m.dump(2) << '\n';
}

void emit(RunContext& ctx, const std::string& prefix, const json& payload, const json& params,
          const std::vector<std::pair<std::string, std::string>>& extra) {
  write_text(ctx, prefix + ".json", payload.dump(2) + "\n");
  for (const auto& [suffix, text] : extra) write_text(ctx, prefix + suffix, text);
  write_manifest(ctx, prefix, params);
  std::cout << "wrote " << prefix << ".json and " << prefix << ".manifest.json\n";
}

void print_quantiles(const std::string& label, const Quantiles& q) {
  std::printf("  %-22s q50 %-12s q90 %-12s q99 %-12s max %s\n", label.c_str(),
              fmtg(q.q50).c_str(), fmtg(q.q90).c_str(), fmtg(q.q99).c_str(), fmtg(q.max).c_str());
}

std::vector<double> parse_eta_spec(const std::string& spec, int n) {
  if (spec.empty() || spec == "default") return default_eta_grid(n);
  if (spec.rfind("geometric:", 0) == 0) {
    const auto parts = split(spec.substr(10), ':');
    if (parts.size() != 3) throw ValidationError("--etas geometric:HI:LO:COUNT");
    return geometric_grid(parse_double("etas", parts[0]), parse_double("etas", parts[1]),
                          static_cast<int>(parse_integer("etas", parts[2])));
  }
  return parse_doubles("etas", spec);
}

struct SweepFlags {
  std::string energies = "0";
  std::string etas = "default";
  int trials = 10;
  std::string r_values = "2";
  int minors = 64;
  std::string method = "eigen";
};

void add_sweep(CLI::App* app, SweepFlags& s) {
  app->add_option("--energies", s.energies, "Comma-separated energies E");
  app->add_option("--etas", s.etas, "eta grid: default, geometric:HI:LO:COUNT or a list");
  app->add_option("--trials", s.trials, "Number of samples");
  app->add_option("--r", s.r_values, "Comma-separated even r values for zeta");
  app->add_option("--minors", s.minors, "Minors sampled for Gamma per grid point");
  app->add_option("--method", s.method, "eigen or direct");
}

SweepPlan resolve_sweep(const EnsembleConfig& c, const SweepFlags& s) {
  SweepPlan plan;
  plan.ensemble = c;
  plan.energies = parse_doubles("energies", s.energies);
  plan.eta_grid = parse_eta_spec(s.etas, c.n);
  plan.trials = s.trials;
  plan.r_values = parse_ints("r", s.r_values);
  plan.minor_sample_size = s.minors;
  if (s.method == "eigen")
    plan.method = GreenMethod::eigen;
  else if (s.method == "direct")
    plan.method = GreenMethod::direct;
  else
    throw ValidationError("--method must be eigen or direct");
  plan.validate();
  return plan;
}

json sweep_params(const SweepPlan& p) {
  return json{{"ensemble", to_json(p.ensemble)},
              {"energies", p.energies},
              {"eta_grid", p.eta_grid},
              {"trials", p.trials},
              {"r_values", p.r_values},
              {"minors", p.minor_sample_size},
              {"method", p.method == GreenMethod::eigen ? "eigen" : "direct"}};
}

void print_sweep(const SweepReport& r) {
  std::printf("%-10s %-12s %-12s %-12s %-12s %-8s %s\n", "E", "eta", "stat q50", "|s-m| q50",
              "Gamma q50", "phi", "stat/zeta");
  for (const auto& g : r.grid)
    std::printf("%-10s %-12s %-12s %-12s %-12s %-8s %s\n", fmtg(g.E).c_str(), fmtg(g.eta).c_str(),
                fmtg(g.statistic.q50).c_str(), fmtg(g.s_deviation.q50).c_str(),
                fmtg(g.gamma.q50).c_str(), fmtg(g.phi_frequency, 3).c_str(),
                fmtg(g.ratio_median).c_str());
  if (!r.failures.empty()) std::printf("%zu trial(s) failed and were excluded\n", r.failures.size());
}

int run(int argc, char** argv);

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Local-law experiments for sparse random graphs"};
  app.require_subcommand(1);

  Common common;
  EnsembleFlags ens;
  SweepFlags sweep;

  // sample
  auto* sample = app.add_subcommand("sample", "Draw one Erdos-Renyi sample");
  add_ensemble(sample, ens);
  add_common(sample, common);
  std::string sample_format = "edges";
  sample->add_option("--format", sample_format, "edges, dense or both");

  // local law sweep
  auto* localaw = app.add_subcommand("localaw", "Entrywise local law over a spectral grid");
  add_ensemble(localaw, ens);
  add_sweep(localaw, sweep);
  add_common(localaw, common);

  // bootstrap
  auto* bootstrap = app.add_subcommand("bootstrap", "Bootstrap event frequencies down the eta grid");
  add_ensemble(bootstrap, ens);
  add_sweep(bootstrap, sweep);
  add_common(bootstrap, common);
  double xi = 1.0;
  bootstrap->add_option("--xi", xi, "Event scale xi");

  // delocalization
  auto* deloc = app.add_subcommand("deloc", "Eigenvector sup-norm study");
  add_ensemble(deloc, ens);
  add_common(deloc, common);
  int trials = 10;
  std::optional<double> kappa;
  bool no_ortho = false;
  deloc->add_option("--trials", trials, "Number of samples");
  deloc->add_option("--kappa", kappa, "Subcritical simple graph with pN = kappa log N");
  deloc->add_flag("--no-ortho", no_ortho, "Skip the orthonormality check");

  // density of states
  auto* dos = app.add_subcommand("dos", "Eigenvalue counts on intervals");
  add_ensemble(dos, ens);
  add_common(dos, common);
  std::string intervals = "-1:1,0:2,-2:2";
  dos->add_option("--trials", trials, "Number of samples");
  dos->add_option("--intervals", intervals, "Comma-separated a:b intervals");

  // QUE
  auto* que = app.add_subcommand("que", "Eigenvector mass against a test vector");
  add_ensemble(que, ens);
  add_common(que, common);
  std::string a_file, k_list;
  bool auto_center = false;
  double theta = 2.0;
  que->add_option("--trials", trials, "Number of samples");
  que->add_option("--a-file", a_file, "Test vector file (default: half indicator minus 1/2)");
  que->add_option("--k", k_list, "Comma-separated eigenvector indices (ascending order)");
  que->add_flag("--auto-center", auto_center, "Subtract the mean from the test vector");
  que->add_option("--theta", theta, "Threshold multiplier theta");

  // subcritical
  auto* subcrit = app.add_subcommand("subcritical", "Isolated vertices below the threshold");
  add_common(subcrit, common);
  int sub_n = 0;
  double sub_kappa = 0.5;
  int dense_limit = 2000;
  subcrit->add_option("--n", sub_n, "Number of vertices")->required();
  subcrit->add_option("--kappa", sub_kappa, "pN = kappa log N, kappa in (0, 1)");
  subcrit->add_option("--trials", trials, "Number of samples");
  subcrit->add_option("--dense-limit", dense_limit, "Largest component diagonalized exactly");

  // main estimates
  auto* mainest = app.add_subcommand("mainest", "L^r norms of the main resolvent estimates");
  add_ensemble(mainest, ens);
  add_common(mainest, common);
  double energy = 0.2, eta = 0.1;
  int r_main = 4, index_count = 8;
  mainest->add_option("--E", energy, "Real part of z");
  mainest->add_option("--eta", eta, "Imaginary part of z");
  mainest->add_option("--r", r_main, "Even moment r");
  mainest->add_option("--trials", trials, "Number of samples");
  mainest->add_option("--indices", index_count, "Size of the sampled index set");

  // ldp
  auto* ldp = app.add_subcommand("ldp", "Large-deviation bounds and their verification");
  add_common(ldp, common);
  std::string kind = "linear", coeffs, coeffs_file, instance_file, mode = "bound";
  int ldp_n = 0, ldp_r = 2;
  double ldp_q = 0.0, ldp_p = 0.0;
  long samples = 100000;
  std::optional<double> ldp_gamma, ldp_psi;
  ldp->add_option("--kind", kind, "linear, squares, bilinear or quadratic");
  ldp->add_option("--n", ldp_n, "Number of variables N");
  ldp->add_option("--q", ldp_q, "q (default sqrt(pN))");
  ldp->add_option("--p", ldp_p, "Bernoulli p (default q^2/N)");
  ldp->add_option("--r", ldp_r, "Even moment r");
  ldp->add_option("--coeffs", coeffs, "Inline coefficients; matrix rows separated by ';'");
  ldp->add_option("--coeffs-file", coeffs_file, "Coefficient file");
  ldp->add_option("--instance", instance_file, "Instance file (key = value)");
  ldp->add_option("--mode", mode, "bound, enumerate or mc");
  ldp->add_option("--samples", samples, "Monte Carlo samples");
  ldp->add_option("--gamma", ldp_gamma, "Override gamma (must dominate the tight value)");
  ldp->add_option("--psi", ldp_psi, "Override psi (must dominate the tight value)");

  // constants
  auto* constants = app.add_subcommand("constants", "Explicit constants and admissibility");
  add_common(constants, common, false);
  double delta = 1.0, big_d = 1.0;
  std::optional<double> c_q, c_f, c_n, c_tau;
  constants->add_option("--delta", delta, "delta in (0, 1]");
  constants->add_option("--D", big_d, "D > 0");
  constants->add_option("--q", c_q, "q for the admissibility table");
  constants->add_option("--f", c_f, "f for the admissibility table");
  constants->add_option("--n", c_n, "N for the admissibility table");
  constants->add_option("--tau", c_tau, "tau for the admissibility table");

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  std::string manifest_path;
  rerun->add_option("manifest", manifest_path, "Manifest file")->required();
  rerun->add_option("--out", common.out, "Output path prefix for the rerun");
  rerun->add_option("--threads", common.threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::cerr << "error: " << msg << '\n';
    return 2;
  }

  if (rerun->parsed()) {
    const json m = json::parse(read_text_file(manifest_path));
    std::vector<std::string> args = m.at("arguments").get<std::vector<std::string>>();
    std::vector<std::string> kept;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (args[k] == "--out" || args[k] == "--threads") {
        ++k;
        continue;
      }
      if (args[k].rfind("--out=", 0) == 0 || args[k].rfind("--threads=", 0) == 0) continue;
      kept.push_back(args[k]);
    }
    if (!common.out.empty()) {
      kept.push_back("--out");
      kept.push_back(common.out);
    }
    kept.push_back("--threads");
    kept.push_back(std::to_string(common.threads ? common.threads
                                                 : m.at("workers").get<unsigned>()));
    std::vector<std::string> store{argv[0]};
    store.insert(store.end(), kept.begin(), kept.end());
    std::vector<char*> ptrs;
    for (auto& s : store) ptrs.push_back(s.data());
    return run(static_cast<int>(ptrs.size()), ptrs.data());
  }

  RunContext ctx;
  ctx.start = std::chrono::steady_clock::now();
  ctx.command = app.get_subcommands().front()->get_name();
  for (int k = 1; k < argc; ++k) ctx.args.emplace_back(argv[k]);
  ctx.threads = common.threads ? common.threads : default_thread_count();
  if (common.seed) {
    ctx.seed = *common.seed;
  } else {
    ctx.seed = entropy_seed();
    ctx.seed_from_entropy = true;
  }
  configure_blas_single_threaded();
  check_blas_core();
  const std::string prefix = common.out.empty() ? ctx.command : common.out;

  if (sample->parsed()) {
    EnsembleConfig c = resolve_ensemble(ens);
    c.seed = ctx.seed;
    if (sample_format != "edges" && sample_format != "dense" && sample_format != "both")
      throw ValidationError("--format must be edges, dense or both");
    const bool dense = sample_format != "edges";
    const SampleBundle s = sample_er(c, dense);
    const std::string path = common.out.empty() ? "sample.edges" : common.out;
    if (sample_format != "dense") {
      write_edge_list(path, s.edges);
      ctx.artifacts.push_back(path);
    }
    if (dense) {
      const std::string bin = sample_format == "both" ? path + ".bin" : path;
      write_dense_matrix(bin, s.rescaled);
      ctx.artifacts.push_back(bin);
    }
    std::printf("N %d  p %s  edges %zu  isolated %d  f %s%s\n", c.n, fmtg(s.p).c_str(),
                s.edges.size(), s.isolated_vertex_count(), fmtg(s.f_value).c_str(),
                s.f_exceeds_q() ? " (f > q)" : "");
    write_manifest(ctx, path, json{{"ensemble", to_json(c)}, {"format", sample_format}});
    return 0;
  }

  if (localaw->parsed() || bootstrap->parsed()) {
    const SweepPlan plan = resolve_sweep(resolve_ensemble(ens), sweep);
    json params = sweep_params(plan);
    if (localaw->parsed()) {
      const SweepReport r = local_law_sweep(plan, ctx.seed, ctx.threads);
      print_sweep(r);
      emit(ctx, prefix, to_json(r), params, {{".csv", long_csv(r)}, {".grid.csv", grid_csv(r)}});
    } else {
      params["xi"] = xi;
      const BootstrapReport r = bootstrap_trace(plan, xi, ctx.seed, ctx.threads);
      std::printf("%-10s %-12s %-10s %-10s %s\n", "E", "eta", "P(Omega)", "P(Xi)", "P(both)");
      for (std::size_t g = 0; g < r.points.size(); ++g)
        std::printf("%-10s %-12s %-10s %-10s %s\n", fmtg(r.sweep.grid[g].E).c_str(),
                    fmtg(r.points[g].eta).c_str(), fmtg(r.points[g].p_omega, 3).c_str(),
                    fmtg(r.points[g].p_xi, 3).c_str(), fmtg(r.points[g].p_both, 3).c_str());
      emit(ctx, prefix, to_json(r), params, {{".csv", long_csv(r)}});
    }
    return 0;
  }

  if (deloc->parsed()) {
    EnsembleConfig c;
    if (kappa) {
      if (ens.n <= 2) throw ValidationError("--n is required");
      if (!(*kappa > 0.0 && *kappa < 1.0)) throw ValidationError("--kappa must lie in (0, 1)");
      c = subcritical_config(ens.n, *kappa * std::log(static_cast<double>(ens.n)), 0);
    } else {
      c = resolve_ensemble(ens);
    }
    const DelocalizationReport r = delocalization_study(c, trials, ctx.seed, ctx.threads, !no_ortho);
    print_quantiles("sqrt(N) max ||u||_inf", r.summary);
    std::printf("  threshold N^(1/sqrt(log N)) = %s, fraction below = %s\n",
                fmtg(r.threshold).c_str(), fmtg(r.fraction_below_threshold, 4).c_str());
    emit(ctx, prefix, to_json(r), json{{"ensemble", to_json(c)}, {"trials", trials}},
         {{".csv", long_csv(r)}});
    return 0;
  }

  if (dos->parsed()) {
    const EnsembleConfig c = resolve_ensemble(ens);
    std::vector<std::pair<double, double>> iv;
    for (const auto& part : split(intervals, ',')) {
      const auto ab = split(part, ':');
      if (ab.size() != 2) throw ValidationError("intervals are written a:b");
      iv.emplace_back(parse_double("intervals", ab[0]), parse_double("intervals", ab[1]));
    }
    const DosReport r = dos_local_law(c, iv, trials, ctx.seed, ctx.threads);
    for (const auto& x : r.intervals) {
      std::printf("  [%s, %s] rho %s\n", fmtg(x.a).c_str(), fmtg(x.b).c_str(), fmtg(x.rho).c_str());
      print_quantiles("|mu - rho|", x.deviation);
    }
    emit(ctx, prefix, to_json(r),
         json{{"ensemble", to_json(c)}, {"trials", trials}, {"intervals", intervals}},
         {{".csv", long_csv(r)}});
    return 0;
  }

  if (que->parsed()) {
    const EnsembleConfig c = resolve_ensemble(ens);
    std::vector<double> a;
    if (a_file.empty()) {
      a = half_indicator(c.n);
    } else {
      std::string body = read_text_file(a_file);
      for (char& ch : body)
        if (ch == '\n' || ch == ' ' || ch == '\t' || ch == '\r') ch = ',';
      for (const auto& part : split(body, ','))
        if (!trim(part).empty()) a.push_back(parse_double("a", part));
    }
    const std::vector<int> ks = k_list.empty() ? std::vector<int>{} : parse_ints("k", k_list);
    const QueReport r = que_statistic(c, a, ks, trials, ctx.seed, ctx.threads, auto_center, theta);
    print_quantiles("normalized ratio", r.ratio_summary);
    std::printf("  threshold %s, fraction within = %s\n", fmtg(r.threshold).c_str(),
                fmtg(r.fraction_within, 4).c_str());
    emit(ctx, prefix, to_json(r),
         json{{"ensemble", to_json(c)},
              {"trials", trials},
              {"a_file", a_file},
              {"k", r.k_indices},
              {"auto_center", auto_center},
              {"theta", theta}},
         {{".csv", long_csv(r)}});
    return 0;
  }

  if (subcrit->parsed()) {
    const SubcriticalReport r = subcritical_demo(sub_n, sub_kappa, trials, ctx.seed, ctx.threads,
                                                 dense_limit);
    int holds = 0, exact = 0;
    for (const auto& t : r.rows) {
      holds += t.bound_holds;
      exact += t.im_s_exact;
    }
    std::printf("  mean Y %s (SE %s), N^(1-kappa) = %s, exact E Y = %s\n",
                fmtg(r.mean_isolated).c_str(), fmtg(r.se_isolated).c_str(),
                fmtg(r.expected_isolated).c_str(), fmtg(r.exact_expected_isolated).c_str());
    std::printf("  eta %s, Im m %s, Im s >= (Y/N)/eta in %d of %d trials (%d with exact Im s)\n",
                fmtg(r.eta).c_str(), fmtg(r.im_m).c_str(), holds, r.trials, exact);
    emit(ctx, prefix, to_json(r),
         json{{"n", sub_n}, {"kappa", sub_kappa}, {"trials", trials}, {"dense_limit", dense_limit}},
         {{".csv", long_csv(r)}});
    return 0;
  }

  if (mainest->parsed()) {
    const EnsembleConfig c = resolve_ensemble(ens);
    const MainEstimatesReport r = main_estimates_study(c, SpectralParam{energy, eta}, r_main,
                                                       trials, ctx.seed, ctx.threads, index_count);
    for (const auto& q : r.quantities)
      std::printf("  %-22s estimate %-12s SE %-12s bound %-12s %s\n", q.name.c_str(),
                  fmtg(q.max_estimate).c_str(), fmtg(q.max_std_error).c_str(),
                  fmtg(q.bound).c_str(), q.dominated ? "PASS" : "FAIL");
    std::printf("  phi = 0 in %s of trials\n", fmtg(r.phi_zero_frequency, 4).c_str());
    emit(ctx, prefix, to_json(r),
         json{{"ensemble", to_json(c)},
              {"E", energy},
              {"eta", eta},
              {"r", r_main},
              {"trials", trials},
              {"indices", index_count}},
         {{".csv", long_csv(r)}});
    return 0;
  }

  if (ldp->parsed()) {
    LdpInstance inst;
    if (!instance_file.empty()) {
      inst = load_instance(instance_file);
    } else {
      const FormKind k = parse_form_kind(kind);
      if (ldp_n <= 0) throw ValidationError("--n is required");
      if (ldp_r < 2 || ldp_r % 2 != 0)
        throw ValidationError("invalid r = " + std::to_string(ldp_r) + ": Let r be even (r >= 2)");
      std::string text = "kind = " + kind + "\nn = " + std::to_string(ldp_n) +
                         "\nr = " + std::to_string(ldp_r) + "\n";
      if (ldp_q > 0) text += "q = " + fmtg(ldp_q, 17) + "\n";
      if (ldp_p > 0) text += "p = " + fmtg(ldp_p, 17) + "\n";
      if (coeffs.empty() == coeffs_file.empty())
        throw ValidationError("give exactly one of --coeffs and --coeffs-file");
      if (!coeffs.empty()) text += "coeffs = " + coeffs + "\n";
      if (!coeffs_file.empty()) text += "coeffs_file = " + fs::absolute(coeffs_file).string() + "\n";
      (void)k;
      inst = parse_instance(text);
    }
    if (ldp_gamma) inst.gamma = *ldp_gamma;
    if (ldp_psi) inst.psi = *ldp_psi;
    inst.validate();
    LdpRow row{inst.kind, inst.n, inst.q, inst.r, inst.gamma, inst.psi, inst.bound(), mode,
               std::nan(""), std::nan(""), true};
    if (mode == "enumerate") {
      row.method = "exact";
      row.estimate = exact_lr_enumerate(inst, ctx.threads);
      row.std_error = 0.0;
      row.pass = row.estimate <= row.bound;
    } else if (mode == "mc") {
      const MonteCarloResult mc = monte_carlo_lr(inst, samples, ctx.seed, ctx.threads);
      row.estimate = mc.estimate;
      row.std_error = mc.std_error;
      row.pass = mc.estimate <= row.bound + 3.0 * mc.std_error;
    } else if (mode != "bound") {
      throw ValidationError("--mode must be bound, enumerate or mc");
    }
    std::printf("kind %s  N %d  q %s  p %s  r %d\n", to_string(inst.kind), inst.n,
                fmtg(inst.q).c_str(), fmtg(inst.p).c_str(), inst.r);
    std::printf("gamma %s  psi %s  bound %s", fmtg(inst.gamma, 10).c_str(),
                fmtg(inst.psi, 10).c_str(), fmtg(row.bound, 10).c_str());
    if (mode != "bound")
      std::printf("  estimate %s  SE %s  %s", fmtg(row.estimate, 10).c_str(),
                  fmtg(row.std_error, 4).c_str(), row.pass ? "PASS" : "FAIL");
    std::printf("\n");
    if (!common.out.empty()) {
      json payload{{"kind", to_string(inst.kind)}, {"N", inst.n},       {"q", inst.q},
                   {"p", inst.p},                  {"r", inst.r},       {"gamma", inst.gamma},
                   {"psi", inst.psi},              {"bound", row.bound}, {"mode", row.method}};
      payload["estimate"] = mode == "bound" ? json(nullptr) : json(row.estimate);
      payload["std_error"] = mode == "bound" ? json(nullptr) : json(row.std_error);
      payload["pass"] = row.pass;
      payload["master_seed"] = mode == "mc" ? json(ctx.seed) : json(nullptr);
      emit(ctx, prefix, payload,
           json{{"instance", instance_file}, {"mode", mode}, {"samples", samples}},
           {{".csv", ldp_csv_header() + "\n" + ldp_csv_row(row) + "\n"}});
    }
    return row.pass ? 0 : 4;
  }

  if (constants->parsed()) {
    const ExplicitConstants k = explicit_constants(delta, big_d);
    std::printf("C(delta, D)   = %s\nlog N0        = %s\nN0            = %s\n",
                fmtg(k.C, 6).c_str(), fmtg(k.log_N0, 6).c_str(),
                std::isinf(k.N0) ? "overflow (exp of log N0)" : fmtg(k.N0, 6).c_str());
    json payload{{"delta", delta}, {"D", big_d}, {"C", k.C}, {"log_C", k.log_C},
                 {"log_N0", k.log_N0}};
    const bool any = c_q || c_f || c_n || c_tau;
    if (any) {
      if (!(c_q && c_f && c_n && c_tau))
        throw ValidationError("the admissibility table needs --q, --f, --n and --tau");
      const AppendixReport rep = appendix_conditions(*c_q, *c_f, *c_n, *c_tau, delta, big_d);
      json rows = json::array();
      for (const ConditionRow* row : {&rep.tau, &rep.q_lower, &rep.f_upper, &rep.n_tau,
                                      &rep.q_critical, &rep.q_polylog, &rep.n_threshold}) {
        std::printf("  %-40s %s  (lhs %s, rhs %s)\n", row->name, row->pass ? "PASS" : "FAIL",
                    fmtg(row->lhs).c_str(), fmtg(row->rhs).c_str());
        rows.push_back({{"condition", row->name},
                        {"pass", row->pass},
                        {"lhs", row->lhs},
                        {"rhs", row->rhs}});
      }
      payload["conditions"] = std::move(rows);
      payload["all_pass"] = rep.all_pass();
    }
    if (!common.out.empty())
      emit(ctx, prefix, payload, json{{"delta", delta}, {"D", big_d}}, {});
    return 0;
  }
  return 0;
}

}  // namespace
