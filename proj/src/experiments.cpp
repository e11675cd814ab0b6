#include "erlocal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "erlocal/errors.hpp"
#include "erlocal/graph.hpp"
#include "erlocal/linalg.hpp"
#include "erlocal/numerics.hpp"
#include "erlocal/parallel.hpp"

namespace erlocal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::uint64_t> make_trial_seeds(std::uint64_t master, int trials) {
  std::vector<std::uint64_t> out(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) out[t] = trial_seed(master, static_cast<std::size_t>(t));
  return out;
}

void check_trials(int trials) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
}

double deloc_threshold(int n) {
  return std::pow(static_cast<double>(n), 1.0 / std::sqrt(std::log(static_cast<double>(n))));
}

std::shared_ptr<const Eigen::MatrixXd> take_rescaled(SampleBundle& s) {
  auto a = std::make_shared<const Eigen::MatrixXd>(std::move(s.rescaled));
  s.adjacency.resize(0, 0);
  return a;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json quantiles_json(const Quantiles& q) {
  return json{{"q50", q.q50}, {"q90", q.q90}, {"q99", q.q99}, {"max", q.max}};
}

json cplx_json(cplx v) { return json::array({v.real(), v.imag()}); }

}  // namespace

double ensemble_f(const EnsembleConfig& c) {
  return c.f_override.value_or(c.q / std::sqrt(1.0 - c.p()));
}

std::vector<double> geometric_grid(double hi, double lo, int count) {
  if (!(hi > 0.0 && lo > 0.0) || count < 1) throw ValidationError("invalid geometric grid");
  if (count == 1) return {hi};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = std::log(lo / hi) / (count - 1);
  for (int k = 0; k < count; ++k) out[k] = hi * std::exp(step * k);
  out.front() = hi;
  out.back() = lo;
  return out;
}

std::vector<double> default_eta_grid(int n) { return geometric_grid(1.0, 2.0 / n, 40); }

std::vector<int> sample_indices(int n, int count, std::uint64_t seed) {
  count = std::clamp(count, 0, n);
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[i] = i;
  std::mt19937_64 gen(seed);
  for (int k = 0; k < count; ++k) {
    const auto pick = k + static_cast<int>(gen() % static_cast<std::uint64_t>(n - k));
    std::swap(pool[k], pool[pick]);
  }
  pool.resize(static_cast<std::size_t>(count));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Quantiles summarize(const std::vector<double>& values) {
  Quantiles q;
  if (values.empty()) {
    q.q50 = q.q90 = q.q99 = q.max = kNaN;
    return q;
  }
  q.q50 = quantile(values, 0.5);
  q.q90 = quantile(values, 0.9);
  q.q99 = quantile(values, 0.99);
  q.max = *std::max_element(values.begin(), values.end());
  return q;
}

double im_stieltjes_from_eigenvalues(const Eigen::VectorXd& eigenvalues, SpectralParam z) {
  CompensatedSum acc;
  for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
    const double d = eigenvalues[k] - z.E;
    acc.add(z.eta / (d * d + z.eta * z.eta));
  }
  return acc.value() / static_cast<double>(eigenvalues.size());
}

// ---------------------------------------------------------------------------
// Local law sweep

void SweepPlan::validate() const {
  ensemble.validate();
  check_trials(trials);
  if (energies.empty()) throw ValidationError("at least one energy is required");
  if (eta_grid.empty()) throw ValidationError("eta grid is empty");
  for (std::size_t k = 0; k < eta_grid.size(); ++k) {
    if (!SpectralParam{0.0, eta_grid[k]}.in_strip(ensemble.n))
      throw ValidationError("eta = " + fmt(eta_grid[k]) + " outside (1/N, 1]");
    if (k > 0 && !(eta_grid[k] < eta_grid[k - 1]))
      throw ValidationError("eta grid must be strictly decreasing");
  }
  if (r_values.empty()) throw ValidationError("at least one r is required");
  for (int r : r_values)
    if (r < 2 || r % 2 != 0) throw ValidationError("r values must be even and >= 2");
  if (minor_sample_size < 0) throw ValidationError("minor sample size must be >= 0");
}

SweepReport local_law_sweep(const SweepPlan& plan, std::uint64_t master_seed, unsigned threads) {
  plan.validate();
  const int n = plan.ensemble.n;
  const double f = ensemble_f(plan.ensemble);
  SweepReport report;
  report.plan = plan;
  report.master_seed = master_seed;
  report.trial_seeds = make_trial_seeds(master_seed, plan.trials);
  report.minors_used = std::min(plan.minor_sample_size, n);
  report.gamma_sampled = report.minors_used < n;

  std::vector<SpectralParam> zs;
  for (double E : plan.energies)
    for (double eta : plan.eta_grid) zs.push_back({E, eta});

  struct TrialOut {
    std::string error;
    std::vector<double> stat, sdev, gamma;
  };
  std::vector<TrialOut> out(static_cast<std::size_t>(plan.trials));
  parallel_for(out.size(), threads, [&](std::size_t t) {
    EnsembleConfig cfg = plan.ensemble;
    cfg.seed = report.trial_seeds[t];
    TrialOut& o = out[t];
    try {
      SampleBundle s = sample_er(cfg);
      s.centered.resize(0, 0);
      GreenSolver solver(take_rescaled(s), plan.method);
      const auto minors = sample_indices(n, report.minors_used, derive_seed(cfg.seed, 1));
      for (const SpectralParam& z : zs) {
        const ResolventBundle b = solver.green(z);
        const cplx m = stieltjes_m(z);
        o.stat.push_back(local_law_statistic(b, m));
        o.sdev.push_back(std::abs(b.s - m));
        o.gamma.push_back(minors.empty() ? b.gamma : gamma_phi(b, minors).gamma);
      }
    } catch (const NumericalError& e) {
      o.error = "trial " + std::to_string(t) + ": " + e.what();
    }
  });

  for (std::size_t t = 0; t < out.size(); ++t) {
    if (out[t].error.empty())
      report.successful_trials.push_back(static_cast<int>(t));
    else
      report.failures.push_back(out[t].error);
  }
  for (std::size_t g = 0; g < zs.size(); ++g) {
    GridPoint gp;
    gp.E = zs[g].E;
    gp.eta = zs[g].eta;
    gp.m = stieltjes_m(zs[g]);
    for (int r : plan.r_values) {
      if (n * gp.eta > 1.0)
        gp.zeta.push_back(zeta({n, static_cast<double>(r), plan.ensemble.q, gp.eta, f}).total);
      else
        gp.zeta.push_back(kNaN);
    }
    std::vector<double> ratios;
    int phi_count = 0;
    for (int t : report.successful_trials) {
      gp.trial_statistic.push_back(out[t].stat[g]);
      gp.trial_s_deviation.push_back(out[t].sdev[g]);
      gp.trial_gamma.push_back(out[t].gamma[g]);
      phi_count += out[t].gamma[g] <= 2.0;
      ratios.push_back(out[t].stat[g] / gp.zeta.front());
    }
    gp.statistic = summarize(gp.trial_statistic);
    gp.s_deviation = summarize(gp.trial_s_deviation);
    gp.gamma = summarize(gp.trial_gamma);
    const auto ok = static_cast<double>(report.successful_trials.size());
    gp.phi_frequency = ok > 0 ? phi_count / ok : kNaN;
    gp.ratio_median = ratios.empty() ? kNaN : median(ratios);
    report.grid.push_back(std::move(gp));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Delocalization

DelocalizationReport delocalization_study(const EnsembleConfig& ensemble, int trials,
                                          std::uint64_t master_seed, unsigned threads,
                                          bool check_orthonormality) {
  ensemble.validate();
  check_trials(trials);
  if (ensemble.n < 100) throw ValidationError("delocalization study needs N >= 100");
  const int n = ensemble.n;
  DelocalizationReport rep;
  rep.ensemble = ensemble;
  rep.master_seed = master_seed;
  rep.trials = trials;
  rep.threshold = deloc_threshold(n);
  rep.trial_seeds = make_trial_seeds(master_seed, trials);
  rep.componentwise = ensemble.subcritical;
  rep.statistic.assign(trials, 0.0);
  rep.max_sup_norm.assign(trials, 0.0);
  rep.isolated_vertices.assign(trials, 0);
  rep.orthonormality_residual.assign(trials, 0.0);

  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    EnsembleConfig cfg = ensemble;
    cfg.seed = rep.trial_seeds[t];
    double sup = 0.0, ortho = 0.0;
    if (!cfg.subcritical) {
      SampleBundle s = sample_er(cfg);
      rep.isolated_vertices[t] = s.isolated_vertex_count();
      const SymmetricEigen eig = eigh(s.rescaled);
      sup = eig.vectors.cwiseAbs().maxCoeff();
      if (check_orthonormality) ortho = orthonormality_residual(eig.vectors);
    } else {
      const SampleBundle s = sample_er(cfg, false);
      rep.isolated_vertices[t] = s.isolated_vertex_count();
      const auto comps = connected_components(n, s.edges);
      for (const auto& c : comps)
        if (c.size() == 1) sup = 1.0;
      for (const auto& c : comps) {
        if (c.size() == 1 || sup >= 1.0) continue;
        const SymmetricEigen eig = eigh(induced_adjacency(c, s.edges, n));
        sup = std::max(sup, eig.vectors.cwiseAbs().maxCoeff());
        if (check_orthonormality) ortho = std::max(ortho, orthonormality_residual(eig.vectors));
      }
    }
    rep.max_sup_norm[t] = sup;
    rep.statistic[t] = std::sqrt(static_cast<double>(n)) * sup;
    rep.orthonormality_residual[t] = ortho;
  });
  rep.summary = summarize(rep.statistic);
  const auto below = std::count_if(rep.statistic.begin(), rep.statistic.end(),
                                   [&](double v) { return v < rep.threshold; });
  rep.fraction_below_threshold = static_cast<double>(below) / trials;
  return rep;
}

// ---------------------------------------------------------------------------
// Density of states

DosReport dos_local_law(const EnsembleConfig& ensemble,
                        const std::vector<std::pair<double, double>>& intervals, int trials,
                        std::uint64_t master_seed, unsigned threads) {
  ensemble.validate();
  check_trials(trials);
  if (intervals.empty()) throw ValidationError("at least one interval is required");
  for (const auto& [a, b] : intervals)
    if (!(a < b)) throw ValidationError("interval [a, b] needs a < b");
  const int n = ensemble.n;
  DosReport rep;
  rep.ensemble = ensemble;
  rep.master_seed = master_seed;
  rep.trials = trials;
  rep.trial_seeds = make_trial_seeds(master_seed, trials);
  std::vector<std::vector<double>> mu(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    EnsembleConfig cfg = ensemble;
    cfg.seed = rep.trial_seeds[t];
    SampleBundle s = sample_er(cfg);
    s.adjacency.resize(0, 0);
    s.centered.resize(0, 0);
    const Eigen::VectorXd ev = eigvalsh(s.rescaled);
    for (const auto& [a, b] : intervals) {
      const auto count = (ev.array() >= a && ev.array() <= b).count();
      mu[t].push_back(static_cast<double>(count) / n);
    }
  });
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    DosInterval iv;
    iv.a = intervals[k].first;
    iv.b = intervals[k].second;
    iv.rho = semicircle_mass(iv.a, iv.b);
    std::vector<double> normalized;
    for (int t = 0; t < trials; ++t) {
      iv.mu.push_back(mu[t][k]);
      iv.abs_deviation.push_back(std::abs(mu[t][k] - iv.rho));
      normalized.push_back(iv.abs_deviation.back() / (iv.b - iv.a));
    }
    iv.deviation = summarize(iv.abs_deviation);
    iv.normalized = summarize(normalized);
    rep.intervals.push_back(std::move(iv));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Quantum unique ergodicity

std::vector<double> half_indicator(int n) {
  std::vector<double> a(static_cast<std::size_t>(n));
  const int half = n / 2;
  for (int i = 0; i < n; ++i) a[i] = (i < half ? 1.0 : 0.0) - static_cast<double>(half) / n;
  return a;
}

QueReport que_statistic(const EnsembleConfig& ensemble, std::vector<double> a,
                        const std::vector<int>& k_indices, int trials, std::uint64_t master_seed,
                        unsigned threads, bool auto_center, double theta) {
  ensemble.validate();
  check_trials(trials);
  const int n = ensemble.n;
  if (static_cast<int>(a.size()) != n) throw ValidationError("test vector a needs N entries");
  CompensatedSum total;
  for (double v : a) total.add(v);
  if (auto_center) {
    const double mean = total.value() / n;
    for (double& v : a) v -= mean;
    total = {};
    for (double v : a) total.add(v);
  }
  if (std::abs(total.value()) > 1e-12)
    throw ValidationError("test vector must satisfy sum a_i = 0 (use auto-centering)");
  double norm2 = 0.0;
  for (double v : a) norm2 += v * v;
  if (!(norm2 > 0.0)) throw ValidationError("test vector must be nonzero");

  QueReport rep;
  rep.ensemble = ensemble;
  rep.master_seed = master_seed;
  rep.trials = trials;
  rep.theta = theta;
  rep.threshold = deloc_threshold(n) * theta * theta;
  rep.trial_seeds = make_trial_seeds(master_seed, trials);
  rep.k_indices = k_indices;
  if (rep.k_indices.empty()) {
    const int count = std::min(n, 16);
    for (int c = 0; c < count; ++c)
      rep.k_indices.push_back(count == 1 ? 0 : static_cast<int>(std::lround(
                                                    static_cast<double>(c) * (n - 1) / (count - 1))));
  }
  for (int k : rep.k_indices)
    if (k < 0 || k >= n) throw ValidationError("eigenvector index out of range");
  const double scale = std::sqrt(norm2) / n;
  const Eigen::Map<const Eigen::VectorXd> av(a.data(), n);
  rep.statistic.assign(trials, {});
  rep.ratio.assign(trials, {});
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    EnsembleConfig cfg = ensemble;
    cfg.seed = rep.trial_seeds[t];
    SampleBundle s = sample_er(cfg);
    const SymmetricEigen eig = eigh(s.rescaled);
    for (int k : rep.k_indices) {
      const double v = av.dot(eig.vectors.col(k).cwiseAbs2());
      rep.statistic[t].push_back(v);
      rep.ratio[t].push_back(std::abs(v) / scale);
    }
  });
  std::vector<double> all;
  for (const auto& row : rep.ratio) all.insert(all.end(), row.begin(), row.end());
  rep.ratio_summary = summarize(all);
  const auto within =
      std::count_if(all.begin(), all.end(), [&](double v) { return v <= rep.threshold; });
  rep.fraction_within = static_cast<double>(within) / static_cast<double>(all.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Subcritical counterexample

SubcriticalReport subcritical_demo(int n, double kappa, int trials, std::uint64_t master_seed,
                                   unsigned threads, int dense_limit) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw ValidationError("kappa must lie in (0, 1)");
  if (n < 3) throw ValidationError("N must be >= 3");
  check_trials(trials);
  const double logn = std::log(static_cast<double>(n));
  const EnsembleConfig base = subcritical_config(n, kappa * logn, 0);
  base.validate();

  SubcriticalReport rep;
  rep.n = n;
  rep.kappa = kappa;
  rep.trials = trials;
  rep.master_seed = master_seed;
  rep.p = base.p();
  rep.eta = std::pow(static_cast<double>(n), -(1.0 + kappa) / 2.0);
  const SpectralParam z{0.0, rep.eta};
  rep.im_m = stieltjes_m(z).imag();
  rep.expected_isolated = std::pow(static_cast<double>(n), 1.0 - kappa);
  rep.exact_expected_isolated = n * std::exp((n - 1) * std::log1p(-rep.p));
  rep.dense_limit = dense_limit;
  rep.rows.assign(static_cast<std::size_t>(trials), {});
  const auto seeds = make_trial_seeds(master_seed, trials);

  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    EnsembleConfig cfg = base;
    cfg.seed = seeds[t];
    const SampleBundle s = sample_er(cfg, false);
    SubcriticalTrial& row = rep.rows[t];
    row.seed = seeds[t];
    row.isolated = s.isolated_vertex_count();
    row.certified_zero_modes = leaf_removal_zero_modes(n, s.edges);

    const auto comps = connected_components(n, s.edges);
    std::vector<int> comp_of(static_cast<std::size_t>(n));
    for (std::size_t c = 0; c < comps.size(); ++c)
      for (int v : comps[c]) comp_of[v] = static_cast<int>(c);
    std::vector<std::vector<Edge>> comp_edges(comps.size());
    for (const Edge& e : s.edges) comp_edges[comp_of[e.first]].push_back(e);

    CompensatedSum im;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& verts = comps[c];
      if (verts.size() == 1) {
        ++row.zero_rows;
        im.add(1.0 / rep.eta);
      } else if (static_cast<int>(verts.size()) <= dense_limit) {
        const Eigen::VectorXd ev = eigvalsh(induced_adjacency(verts, comp_edges[c], n)) / s.sigma;
        for (Eigen::Index k = 0; k < ev.size(); ++k)
          im.add(rep.eta / (ev[k] * ev[k] + rep.eta * rep.eta));
      } else {
        row.im_s_exact = false;
        std::vector<int> local(static_cast<std::size_t>(n), -1);
        for (std::size_t k = 0; k < verts.size(); ++k) local[verts[k]] = static_cast<int>(k);
        std::vector<Edge> relabeled;
        relabeled.reserve(comp_edges[c].size());
        for (const Edge& e : comp_edges[c]) relabeled.emplace_back(local[e.first], local[e.second]);
        im.add(leaf_removal_zero_modes(static_cast<int>(verts.size()), relabeled) / rep.eta);
      }
    }
    row.im_s = im.value() / n;
    row.isolated_bound = static_cast<double>(row.isolated) / n / rep.eta;
    row.paper_form_bound = rep.eta / (4.0 * std::pow(static_cast<double>(n), kappa) *
                                      std::norm(z.z()));
    row.bound_holds = row.im_s >= row.isolated_bound * (1.0 - 1e-9);
    row.ratio_to_m = row.im_s / rep.im_m;
  });

  RunningMoments y;
  for (const auto& row : rep.rows) y.add(row.isolated);
  rep.mean_isolated = y.mean;
  rep.se_isolated = y.std_error();
  return rep;
}

// ---------------------------------------------------------------------------
// Main estimates

MainEstimateBounds main_estimate_bounds(int n, double q, double f, double eta, int r) {
  if (!(2 <= r && r <= q * q && q * q <= n))
    throw ValidationError("main estimates need 2 <= r <= q^2 <= N");
  const double ne = n * eta;
  if (!(ne > 1.0)) throw ValidationError("main estimates need N eta > 1");
  const double log_ne = std::log(ne);
  const double rq = r / (log_ne * q);
  MainEstimateBounds b;
  b.yg = 48.0 * 48.0 *
         (std::sqrt(r / (q * q)) + r * r / std::cbrt(ne) + rq * rq + f * f / std::sqrt(ne));
  b.offdiag = 12.0 * (1.0 / q + r / std::pow(ne, 1.0 / 6.0) + rq + f / std::pow(ne, 0.25));
  b.minor = 12.0 * (1.0 / q + r / std::pow(ne, 1.0 / 6.0) + rq + f / std::pow(ne, 0.25));
  return b;
}

MainEstimatesReport main_estimates_study(const EnsembleConfig& ensemble, SpectralParam z, int r,
                                         int trials, std::uint64_t master_seed, unsigned threads,
                                         int index_count) {
  ensemble.validate();
  check_trials(trials);
  const int n = ensemble.n;
  if (!(z.eta > 0.0)) throw ValidationError("eta must be positive");
  if (r < 2 || r % 2 != 0) throw ValidationError("invalid r = " + std::to_string(r) + ": Let r be even");
  if (index_count < 3 || index_count > n) throw ValidationError("index count must lie in [3, N]");
  MainEstimatesReport rep;
  rep.ensemble = ensemble;
  rep.z = z;
  rep.r = r;
  rep.trials = trials;
  rep.master_seed = master_seed;
  rep.f = ensemble_f(ensemble);
  const MainEstimateBounds bounds = main_estimate_bounds(n, ensemble.q, rep.f, z.eta, r);
  rep.indices = sample_indices(n, index_count, derive_seed(master_seed, 0x1D5E7ULL));
  rep.trial_seeds = make_trial_seeds(master_seed, trials);
  const auto& idx = rep.indices;
  const auto cnt = idx.size();
  rep.trial_yg.assign(trials, std::vector<double>(cnt));
  rep.trial_offdiag.assign(trials, std::vector<double>(cnt));
  rep.trial_minor.assign(trials, std::vector<double>(cnt));
  rep.trial_phi.assign(trials, 0);

  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    EnsembleConfig cfg = ensemble;
    cfg.seed = rep.trial_seeds[t];
    SampleBundle s = sample_er(cfg);
    const Eigen::MatrixXd h = std::move(s.centered);
    const double f = s.f_value;
    GreenSolver solver(take_rescaled(s));
    ResolventBundle b = solver.green(z);
    const bool phi = gamma_phi(b, idx).phi;
    rep.trial_phi[t] = phi;
    for (std::size_t a = 0; a < cnt; ++a) {
      if (!phi) continue;  // phi = 0 zeroes every quantity
      const int i = idx[a], j = idx[(a + 1) % cnt], k = idx[(a + 2) % cnt];
      const YDecomposition y = compute_Y(b, i, h, f);
      rep.trial_yg[t][a] = std::abs(y.value * b.g(i, i));
      rep.trial_offdiag[t][a] = std::abs(b.g(i, j));
      cplx minor_ij;
      if (std::abs(b.g(k, k)) < kMinPivot)
        minor_ij = minor_green(b, k)(minor_pos(k, i), minor_pos(k, j));
      else
        minor_ij = b.g(i, j) - b.g(i, k) * b.g(k, j) / b.g(k, k);
      rep.trial_minor[t][a] = std::abs(b.g(i, j) - minor_ij);
    }
  });

  int phi_zero = 0;
  for (int v : rep.trial_phi) phi_zero += v == 0;
  rep.phi_zero_frequency = static_cast<double>(phi_zero) / trials;

  auto build = [&](const std::string& name, double bound,
                   const std::vector<std::vector<double>>& data, int arity) {
    MainEstimateQuantity qty;
    qty.name = name;
    qty.bound = bound;
    qty.max_estimate = -1.0;
    for (std::size_t a = 0; a < cnt; ++a) {
      RunningMoments mom;
      for (int t = 0; t < trials; ++t) mom.add(std::pow(data[t][a], r));
      LrEstimate e;
      e.label = "i=" + std::to_string(idx[a]);
      if (arity >= 2) e.label += ",j=" + std::to_string(idx[(a + 1) % cnt]);
      if (arity >= 3) e.label += ",k=" + std::to_string(idx[(a + 2) % cnt]);
      e.estimate = std::pow(mom.mean, 1.0 / r);
      e.std_error = mom.mean > 0.0 ? mom.std_error() * std::pow(mom.mean, 1.0 / r - 1.0) / r : 0.0;
      if (e.estimate > qty.max_estimate) {
        qty.max_estimate = e.estimate;
        qty.max_std_error = e.std_error;
      }
      qty.per_index.push_back(std::move(e));
    }
    qty.dominated = std::all_of(qty.per_index.begin(), qty.per_index.end(), [&](const LrEstimate& e) {
      return e.estimate <= bound + 3.0 * e.std_error;
    });
    return qty;
  };
  rep.quantities.push_back(build("phi_Y_G_ii", bounds.yg, rep.trial_yg, 1));
  rep.quantities.push_back(build("phi_G_ij", bounds.offdiag, rep.trial_offdiag, 2));
  rep.quantities.push_back(build("phi_G_ij_minus_minor", bounds.minor, rep.trial_minor, 3));
  return rep;
}

// ---------------------------------------------------------------------------
// Bootstrap trace

BootstrapReport bootstrap_trace(const SweepPlan& plan, double xi, std::uint64_t master_seed,
                                unsigned threads) {
  if (!(xi > 0.0)) throw ValidationError("xi must be positive");
  BootstrapReport rep;
  rep.xi = xi;
  rep.sweep = local_law_sweep(plan, master_seed, threads);
  const auto& grid = rep.sweep.grid;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const GridPoint& gp = grid[g];
    BootstrapPoint pt;
    pt.eta = gp.eta;
    pt.zeta = gp.zeta.front();
    const auto total = static_cast<double>(gp.trial_s_deviation.size());
    int omega = 0, xi_count = 0, both = 0;
    for (std::size_t t = 0; t < gp.trial_s_deviation.size(); ++t) {
      const bool o = gp.trial_s_deviation[t] <= 50.0 * xi * pt.zeta;
      const bool x = gp.trial_gamma[t] <= 1.5;
      omega += o;
      xi_count += x;
      both += o && x;
    }
    pt.p_omega = total > 0 ? omega / total : kNaN;
    pt.p_xi = total > 0 ? xi_count / total : kNaN;
    pt.p_both = total > 0 ? both / total : kNaN;
    if (!rep.points.empty() && g % plan.eta_grid.size() != 0 && pt.p_both > rep.points.back().p_both)
      rep.failures_monotone = false;
    rep.points.push_back(pt);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const EnsembleConfig& c) {
  json j;
  j["n"] = c.n;
  j["q"] = c.q;
  j["p"] = c.p();
  j["f"] = ensemble_f(c);
  j["f_override"] = c.f_override ? json(*c.f_override) : json(nullptr);
  j["include_diagonal"] = c.include_diagonal;
  j["subcritical"] = c.subcritical;
  return j;
}

json to_json(const SweepReport& r) {
  json j;
  j["experiment"] = "local_law_sweep";
  j["master_seed"] = r.master_seed;
  j["ensemble"] = to_json(r.plan.ensemble);
  j["energies"] = r.plan.energies;
  j["eta_grid"] = r.plan.eta_grid;
  j["trials"] = r.plan.trials;
  j["r_values"] = r.plan.r_values;
  j["method"] = r.plan.method == GreenMethod::eigen ? "eigen" : "direct";
  j["gamma"] = {{"minors_per_point", r.minors_used},
                {"sampled", r.gamma_sampled},
                {"note", r.gamma_sampled
                             ? "Gamma over G and a random subset of minors: a lower bound for the "
                               "full Gamma, so phi is an upper bound"
                             : "Gamma over G and every minor"}};
  j["trial_seeds"] = r.trial_seeds;
  j["successful_trials"] = r.successful_trials;
  j["failures"] = r.failures;
  json grid = json::array();
  for (const GridPoint& g : r.grid) {
    json p;
    p["E"] = g.E;
    p["eta"] = g.eta;
    p["m"] = cplx_json(g.m);
    p["zeta"] = g.zeta;
    p["statistic"] = quantiles_json(g.statistic);
    p["s_minus_m"] = quantiles_json(g.s_deviation);
    p["Gamma"] = quantiles_json(g.gamma);
    p["phi_frequency"] = g.phi_frequency;
    p["statistic_over_zeta_median"] = g.ratio_median;
    p["per_trial"] = {{"statistic", g.trial_statistic},
                      {"s_minus_m", g.trial_s_deviation},
                      {"Gamma", g.trial_gamma}};
    grid.push_back(std::move(p));
  }
  j["grid"] = std::move(grid);
  return j;
}

json to_json(const DelocalizationReport& r) {
  json j;
  j["experiment"] = "delocalization";
  j["master_seed"] = r.master_seed;
  j["ensemble"] = to_json(r.ensemble);
  j["trials"] = r.trials;
  j["threshold"] = r.threshold;
  j["componentwise"] = r.componentwise;
  j["statistic"] = quantiles_json(r.summary);
  j["fraction_below_threshold"] = r.fraction_below_threshold;
  j["trial_seeds"] = r.trial_seeds;
  j["per_trial"] = {{"sqrtN_max_sup_norm", r.statistic},
                    {"max_sup_norm", r.max_sup_norm},
                    {"isolated_vertices", r.isolated_vertices},
                    {"orthonormality_residual", r.orthonormality_residual}};
  return j;
}

json to_json(const DosReport& r) {
  json j;
  j["experiment"] = "density_of_states";
  j["master_seed"] = r.master_seed;
  j["ensemble"] = to_json(r.ensemble);
  j["trials"] = r.trials;
  j["trial_seeds"] = r.trial_seeds;
  json arr = json::array();
  for (const DosInterval& iv : r.intervals) {
    arr.push_back({{"a", iv.a},
                   {"b", iv.b},
                   {"rho", iv.rho},
                   {"abs_deviation", quantiles_json(iv.deviation)},
                   {"normalized_deviation", quantiles_json(iv.normalized)},
                   {"per_trial_mu", iv.mu}});
  }
  j["intervals"] = std::move(arr);
  return j;
}

json to_json(const QueReport& r) {
  json j;
  j["experiment"] = "que";
  j["master_seed"] = r.master_seed;
  j["ensemble"] = to_json(r.ensemble);
  j["trials"] = r.trials;
  j["k_indices"] = r.k_indices;
  j["theta"] = r.theta;
  j["threshold"] = r.threshold;
  j["ratio"] = quantiles_json(r.ratio_summary);
  j["fraction_within"] = r.fraction_within;
  j["trial_seeds"] = r.trial_seeds;
  j["per_trial"] = {{"statistic", r.statistic}, {"ratio", r.ratio}};
  return j;
}

json to_json(const SubcriticalReport& r) {
  json j;
  j["experiment"] = "subcritical";
  j["master_seed"] = r.master_seed;
  j["n"] = r.n;
  j["kappa"] = r.kappa;
  j["p"] = r.p;
  j["trials"] = r.trials;
  j["eta"] = r.eta;
  j["im_m"] = r.im_m;
  j["expected_isolated"] = r.expected_isolated;
  j["exact_expected_isolated"] = r.exact_expected_isolated;
  j["mean_isolated"] = r.mean_isolated;
  j["se_isolated"] = r.se_isolated;
  j["dense_component_limit"] = r.dense_limit;
  json rows = json::array();
  for (const auto& t : r.rows) {
    rows.push_back({{"seed", t.seed},
                    {"isolated", t.isolated},
                    {"zero_rows", t.zero_rows},
                    {"certified_zero_modes", t.certified_zero_modes},
                    {"im_s", t.im_s},
                    {"im_s_exact", t.im_s_exact},
                    {"isolated_bound", t.isolated_bound},
                    {"paper_form_bound", t.paper_form_bound},
                    {"bound_holds", t.bound_holds},
                    {"im_s_over_im_m", t.ratio_to_m}});
  }
  j["per_trial"] = std::move(rows);
  return j;
}

json to_json(const MainEstimatesReport& r) {
  json j;
  j["experiment"] = "main_estimates";
  j["master_seed"] = r.master_seed;
  j["ensemble"] = to_json(r.ensemble);
  j["z"] = {r.z.E, r.z.eta};
  j["r"] = r.r;
  j["trials"] = r.trials;
  j["f"] = r.f;
  j["indices"] = r.indices;
  j["index_note"] = "maxima over indices are over this sampled index set";
  j["phi_zero_frequency"] = r.phi_zero_frequency;
  json qs = json::array();
  for (const auto& q : r.quantities) {
    json per = json::array();
    for (const auto& e : q.per_index)
      per.push_back({{"label", e.label}, {"estimate", e.estimate}, {"std_error", e.std_error}});
    qs.push_back({{"name", q.name},
                  {"bound", q.bound},
                  {"max_estimate", q.max_estimate},
                  {"max_std_error", q.max_std_error},
                  {"dominated", q.dominated},
                  {"per_index", std::move(per)}});
  }
  j["quantities"] = std::move(qs);
  j["trial_seeds"] = r.trial_seeds;
  j["per_trial"] = {{"phi", r.trial_phi},
                    {"abs_Y_G_ii", r.trial_yg},
                    {"abs_G_ij", r.trial_offdiag},
                    {"abs_G_ij_minus_minor", r.trial_minor}};
  return j;
}

json to_json(const BootstrapReport& r) {
  json j;
  j["experiment"] = "bootstrap_trace";
  j["xi"] = r.xi;
  j["failures_monotone"] = r.failures_monotone;
  json pts = json::array();
  for (std::size_t g = 0; g < r.points.size(); ++g) {
    const auto& p = r.points[g];
    pts.push_back({{"E", r.sweep.grid[g].E},
                   {"eta", p.eta},
                   {"zeta", p.zeta},
                   {"P_omega", p.p_omega},
                   {"P_xi", p.p_xi},
                   {"P_omega_and_xi", p.p_both}});
  }
  j["points"] = std::move(pts);
  j["sweep"] = to_json(r.sweep);
  return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct LongWriter {
  std::ostringstream out;
  std::string experiment;
  std::string n, q, f;

  LongWriter(std::string exp, const EnsembleConfig& c) : experiment(std::move(exp)) {
    n = std::to_string(c.n);
    q = fmt(c.q);
    f = fmt(ensemble_f(c));
  }
  void row(const std::string& e, const std::string& eta, const std::string& quantity,
           const std::string& quant, double value) {
    out << experiment << ',' << n << ',' << q << ',' << f << ',' << e << ',' << eta << ','
        << quantity << ',' << quant << ',' << fmt(value) << '\n';
  }
  void quantiles(const std::string& e, const std::string& eta, const std::string& quantity,
                 const Quantiles& v) {
    row(e, eta, quantity, "0.5", v.q50);
    row(e, eta, quantity, "0.9", v.q90);
    row(e, eta, quantity, "0.99", v.q99);
    row(e, eta, quantity, "max", v.max);
  }
};

}  // namespace

std::string long_csv_header() { return "experiment,N,q,f,E,eta,quantity,quantile,value\n"; }

std::string long_csv(const SweepReport& r, const std::string& experiment) {
  LongWriter w(experiment, r.plan.ensemble);
  for (const GridPoint& g : r.grid) {
    const std::string e = fmt(g.E), eta = fmt(g.eta);
    w.quantiles(e, eta, "statistic", g.statistic);
    w.quantiles(e, eta, "s_minus_m", g.s_deviation);
    w.quantiles(e, eta, "Gamma", g.gamma);
    w.row(e, eta, "phi_frequency", "mean", g.phi_frequency);
    w.row(e, eta, "statistic_over_zeta", "0.5", g.ratio_median);
    w.row(e, eta, "zeta", "value", g.zeta.front());
  }
  return long_csv_header() + w.out.str();
}

std::string long_csv(const BootstrapReport& r) {
  LongWriter w("bootstrap", r.sweep.plan.ensemble);
  for (std::size_t g = 0; g < r.points.size(); ++g) {
    const auto& p = r.points[g];
    const std::string e = fmt(r.sweep.grid[g].E), eta = fmt(p.eta);
    w.row(e, eta, "P_omega", "mean", p.p_omega);
    w.row(e, eta, "P_xi", "mean", p.p_xi);
    w.row(e, eta, "P_omega_and_xi", "mean", p.p_both);
  }
  return long_csv_header() + w.out.str();
}

std::string long_csv(const DosReport& r) {
  LongWriter w("dos", r.ensemble);
  for (const DosInterval& iv : r.intervals) {
    const std::string label = "[" + fmt(iv.a) + ";" + fmt(iv.b) + "]";
    w.quantiles("", "", "abs_deviation" + label, iv.deviation);
    w.quantiles("", "", "normalized_deviation" + label, iv.normalized);
    w.row("", "", "rho" + label, "value", iv.rho);
  }
  return long_csv_header() + w.out.str();
}

std::string long_csv(const DelocalizationReport& r) {
  LongWriter w("deloc", r.ensemble);
  w.quantiles("", "", "sqrtN_max_sup_norm", r.summary);
  w.row("", "", "threshold", "value", r.threshold);
  w.row("", "", "fraction_below_threshold", "mean", r.fraction_below_threshold);
  return long_csv_header() + w.out.str();
}

std::string long_csv(const QueReport& r) {
  LongWriter w("que", r.ensemble);
  w.quantiles("", "", "normalized_ratio", r.ratio_summary);
  w.row("", "", "threshold", "value", r.threshold);
  w.row("", "", "fraction_within", "mean", r.fraction_within);
  return long_csv_header() + w.out.str();
}

std::string long_csv(const SubcriticalReport& r) {
  EnsembleConfig c = subcritical_config(r.n, r.kappa * std::log(static_cast<double>(r.n)), 0);
  LongWriter w("subcritical", c);
  const std::string e = "0", eta = fmt(r.eta);
  w.row(e, eta, "isolated", "mean", r.mean_isolated);
  w.row(e, eta, "isolated_se", "value", r.se_isolated);
  w.row(e, eta, "expected_isolated", "value", r.expected_isolated);
  w.row(e, eta, "im_m", "value", r.im_m);
  std::vector<double> ims, ratios;
  for (const auto& t : r.rows) {
    ims.push_back(t.im_s);
    ratios.push_back(t.ratio_to_m);
  }
  w.quantiles(e, eta, "im_s", summarize(ims));
  w.quantiles(e, eta, "im_s_over_im_m", summarize(ratios));
  return long_csv_header() + w.out.str();
}

std::string long_csv(const MainEstimatesReport& r) {
  LongWriter w("mainest", r.ensemble);
  const std::string e = fmt(r.z.E), eta = fmt(r.z.eta);
  for (const auto& q : r.quantities) {
    w.row(e, eta, q.name, "lr_max", q.max_estimate);
    w.row(e, eta, q.name + "_se", "lr_max", q.max_std_error);
    w.row(e, eta, q.name + "_bound", "value", q.bound);
  }
  w.row(e, eta, "phi_zero_frequency", "mean", r.phi_zero_frequency);
  return long_csv_header() + w.out.str();
}

std::string grid_csv(const SweepReport& r) {
  std::ostringstream out;
  out << "N,q,f,E,eta,statistic,Gamma,phi,seed\n";
  const auto& c = r.plan.ensemble;
  const std::string head = std::to_string(c.n) + ',' + fmt(c.q) + ',' + fmt(ensemble_f(c)) + ',';
  for (const GridPoint& g : r.grid) {
    for (std::size_t k = 0; k < r.successful_trials.size(); ++k) {
      out << head << fmt(g.E) << ',' << fmt(g.eta) << ',' << fmt(g.trial_statistic[k]) << ','
          << fmt(g.trial_gamma[k]) << ',' << (g.trial_gamma[k] <= 2.0 ? 1 : 0) << ','
          << r.trial_seeds[static_cast<std::size_t>(r.successful_trials[k])] << '\n';
    }
  }
  return out.str();
}

}  // namespace erlocal
