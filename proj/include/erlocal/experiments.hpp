#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "erlocal/ensemble.hpp"
#include "erlocal/resolvent.hpp"
#include "erlocal/rng.hpp"
#include "erlocal/semicircle.hpp"

namespace erlocal {

using json = nlohmann::ordered_json;

/// Seed of trial t under a master seed.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t t) {
  return derive_seed(master, 0x5EED0000ULL + t);
}

/// Geometric grid of `count` points from `hi` down to `lo` (inclusive).
std::vector<double> geometric_grid(double hi, double lo, int count);

/// `count` distinct indices from [0, n), drawn by a partial Fisher-Yates
/// shuffle seeded with `seed`, returned sorted.
std::vector<int> sample_indices(int n, int count, std::uint64_t seed);

struct Quantiles {
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max = 0.0;
};
Quantiles summarize(const std::vector<double>& values);

/// One sample and spectral grid per trial. eta_grid must be strictly
/// decreasing and inside (1/N, 1].
struct SweepPlan {
  EnsembleConfig ensemble;  // ensemble.seed is replaced by per-trial seeds
  std::vector<double> energies{0.0};
  std::vector<double> eta_grid;
  int trials = 10;
  std::vector<int> r_values{2};
  int minor_sample_size = 64;  // capped at N; 0 keeps Gamma = max|G_ij|
  GreenMethod method = GreenMethod::eigen;

  void validate() const;
};

/// Default grid: 40 geometric points from 1 down to 2/N.
std::vector<double> default_eta_grid(int n);

struct GridPoint {
  double E = 0.0;
  double eta = 0.0;
  cplx m;
  std::vector<double> zeta;  // one entry per r in the plan; NaN when N eta <= 1
  Quantiles statistic;       // max_ij |G_ij - m delta_ij|
  Quantiles s_deviation;     // |s - m|
  Quantiles gamma;           // sampled Gamma
  double phi_frequency = 0.0;
  double ratio_median = 0.0;  // median of statistic / zeta[0]
  // Per successful trial, in trial order.
  std::vector<double> trial_statistic;
  std::vector<double> trial_s_deviation;
  std::vector<double> trial_gamma;
};

struct SweepReport {
  SweepPlan plan;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<int> successful_trials;
  std::vector<std::string> failures;
  int minors_used = 0;  // per grid point and trial
  bool gamma_sampled = true;
  std::vector<GridPoint> grid;  // energies outer, eta inner (decreasing)
};

SweepReport local_law_sweep(const SweepPlan& plan, std::uint64_t master_seed, unsigned threads);

struct DelocalizationReport {
  EnsembleConfig ensemble;
  std::uint64_t master_seed = 0;
  int trials = 0;
  double threshold = 0.0;  // N^{(log N)^{-1/2}}
  std::vector<std::uint64_t> trial_seeds;
  std::vector<double> statistic;  // sqrt(N) max_k ||u_k||_inf
  std::vector<double> max_sup_norm;
  std::vector<int> isolated_vertices;
  std::vector<double> orthonormality_residual;
  Quantiles summary;
  double fraction_below_threshold = 0.0;
  bool componentwise = false;
};

/// Supercritical ensembles use one dense eigendecomposition of A. For
/// subcritical ensembles eigenvectors are computed per connected component;
/// components of size one give the exact eigenvector e_v, and larger
/// components are skipped once the maximum already equals 1.
DelocalizationReport delocalization_study(const EnsembleConfig& ensemble, int trials,
                                          std::uint64_t master_seed, unsigned threads,
                                          bool check_orthonormality = true);

struct DosInterval {
  double a = 0.0, b = 0.0;
  double rho = 0.0;
  std::vector<double> mu;             // per trial
  std::vector<double> abs_deviation;  // |mu - rho|
  Quantiles deviation;                // of |mu - rho|
  Quantiles normalized;               // of |mu - rho| / |I|
};

struct DosReport {
  EnsembleConfig ensemble;
  std::uint64_t master_seed = 0;
  int trials = 0;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<DosInterval> intervals;
};

DosReport dos_local_law(const EnsembleConfig& ensemble,
                        const std::vector<std::pair<double, double>>& intervals, int trials,
                        std::uint64_t master_seed, unsigned threads);

struct QueReport {
  EnsembleConfig ensemble;
  std::uint64_t master_seed = 0;
  int trials = 0;
  std::vector<int> k_indices;
  double theta = 2.0;
  double threshold = 0.0;  // N^{(log N)^{-1/2}} theta^2
  std::vector<std::uint64_t> trial_seeds;
  std::vector<std::vector<double>> statistic;  // [trial][k] sum_i a_i u_k(i)^2
  std::vector<std::vector<double>> ratio;      // |statistic| / (||a||_2 / N)
  Quantiles ratio_summary;
  double fraction_within = 0.0;
};

/// Throws unless sum a_i = 0 to 1e-12 (after optional centering) and a != 0.
QueReport que_statistic(const EnsembleConfig& ensemble, std::vector<double> a,
                        const std::vector<int>& k_indices, int trials, std::uint64_t master_seed,
                        unsigned threads, bool auto_center = false, double theta = 2.0);

/// Test vector 1_I - |I|/N with I the first half of the vertices.
std::vector<double> half_indicator(int n);

struct SubcriticalTrial {
  std::uint64_t seed = 0;
  int isolated = 0;          // Y from the edge list
  int zero_rows = 0;         // components of size one
  int certified_zero_modes = 0;
  double im_s = 0.0;         // exact, or a certified lower bound
  bool im_s_exact = true;
  double isolated_bound = 0.0;  // (Y/N)/eta
  double paper_form_bound = 0.0;  // eta / (4 N^kappa |z|^2)
  bool bound_holds = true;
  double ratio_to_m = 0.0;  // Im s / Im m
};

struct SubcriticalReport {
  int n = 0;
  double kappa = 0.0;
  int trials = 0;
  std::uint64_t master_seed = 0;
  double p = 0.0;
  double eta = 0.0;  // N^{-(1+kappa)/2}
  double im_m = 0.0;
  double expected_isolated = 0.0;        // N^{1-kappa}
  double exact_expected_isolated = 0.0;  // N (1-p)^{N-1}
  double mean_isolated = 0.0;
  double se_isolated = 0.0;
  int dense_limit = 0;
  std::vector<SubcriticalTrial> rows;
};

/// Simple graph with pN = kappa log N at z = i N^{-(1+kappa)/2}. Im s sums
/// the exact spectra of components of size <= dense_limit; larger components
/// contribute only their certified zero modes, which makes Im s a lower
/// bound (flagged by im_s_exact = false).
SubcriticalReport subcritical_demo(int n, double kappa, int trials, std::uint64_t master_seed,
                                   unsigned threads, int dense_limit = 2000);

struct MainEstimateBounds {
  double yg = 0.0;     // bound on max_i ||phi Y_i G_ii||_r
  double offdiag = 0.0;  // bound on max_{i != j} ||phi G_ij||_r
  double minor = 0.0;    // bound on max ||phi (G_ij - G^(k)_ij)||_r
};
/// Requires 2 <= r <= q^2 <= N and N eta > 1.
MainEstimateBounds main_estimate_bounds(int n, double q, double f, double eta, int r);

struct LrEstimate {
  std::string label;  // e.g. "i=3" or "i=3,j=17,k=40"
  double estimate = 0.0;
  double std_error = 0.0;
};

struct MainEstimateQuantity {
  std::string name;
  double bound = 0.0;
  std::vector<LrEstimate> per_index;
  double max_estimate = 0.0;   // sampled max over indices
  double max_std_error = 0.0;  // SE of the maximizing index
  bool dominated = false;      // max_estimate <= bound + 3 SE
};

struct MainEstimatesReport {
  EnsembleConfig ensemble;
  SpectralParam z;
  int r = 0;
  int trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<int> indices;
  double f = 0.0;
  double phi_zero_frequency = 0.0;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<MainEstimateQuantity> quantities;  // yg, offdiag, minor
  // Per trial and index, the raw |.| values (before the r-th power).
  std::vector<std::vector<double>> trial_yg, trial_offdiag, trial_minor;
  std::vector<int> trial_phi;
};

/// Index set of size `index_count` fixed from the master seed. Pairs are
/// (i_a, i_{a+1}) and triples (i_a, i_{a+1}, i_{a+2}) cyclically; phi uses
/// Gamma over G and the minors of the index set.
MainEstimatesReport main_estimates_study(const EnsembleConfig& ensemble, SpectralParam z, int r,
                                         int trials, std::uint64_t master_seed, unsigned threads,
                                         int index_count = 8);

struct BootstrapPoint {
  double eta = 0.0;
  double zeta = 0.0;
  double p_omega = 0.0;  // |s - m| <= 50 xi zeta
  double p_xi = 0.0;     // Gamma_sampled <= 3/2
  double p_both = 0.0;
};

struct BootstrapReport {
  SweepReport sweep;
  double xi = 0.0;
  std::vector<BootstrapPoint> points;  // energies outer, eta descending
  bool failures_monotone = true;       // P(Omega and Xi) nonincreasing as eta shrinks
};

BootstrapReport bootstrap_trace(const SweepPlan& plan, double xi, std::uint64_t master_seed,
                                unsigned threads);

/// f used by the ensemble: the override, or q/sqrt(1-p).
double ensemble_f(const EnsembleConfig& c);

/// (1/N) sum_k eta / ((lambda_k - E)^2 + eta^2).
double im_stieltjes_from_eigenvalues(const Eigen::VectorXd& eigenvalues, SpectralParam z);

json to_json(const EnsembleConfig& c);
json to_json(const SweepReport& r);
json to_json(const DelocalizationReport& r);
json to_json(const DosReport& r);
json to_json(const QueReport& r);
json to_json(const SubcriticalReport& r);
json to_json(const MainEstimatesReport& r);
json to_json(const BootstrapReport& r);

/// Columns: experiment,N,q,f,E,eta,quantity,quantile,value.
std::string long_csv_header();
std::string long_csv(const SweepReport& r, const std::string& experiment = "localaw");
std::string long_csv(const BootstrapReport& r);
std::string long_csv(const DosReport& r);
std::string long_csv(const DelocalizationReport& r);
std::string long_csv(const QueReport& r);
std::string long_csv(const SubcriticalReport& r);
std::string long_csv(const MainEstimatesReport& r);

/// One row per (grid point, successful trial):
/// N,q,f,E,eta,statistic,Gamma,phi,seed.
std::string grid_csv(const SweepReport& r);

}  // namespace erlocal
