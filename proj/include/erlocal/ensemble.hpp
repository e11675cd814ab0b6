#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace erlocal {

/// Parameters of the sparse ensemble: dimension N, sparsity q = sqrt(pN),
/// optional replacement of the mean shift f, and the sampling seed.
struct EnsembleConfig {
  int n = 0;
  double q = 1.0;
  std::optional<double> f_override;
  bool include_diagonal = true;
  std::uint64_t seed = 0;
  /// Allows q < 1 (p set below 1/N scale). Only the subcritical study uses it.
  bool subcritical = false;

  double p() const { return q * q / n; }
  /// Throws ValidationError naming the violated constraint. Bernoulli
  /// ensembles additionally need p = q^2/N < 1.
  void validate(bool bernoulli = true) const;
};

/// Simple-graph config with pN = expected_degree; q may fall below 1.
EnsembleConfig subcritical_config(int n, double expected_degree, std::uint64_t seed);

using Edge = std::pair<int, int>;  // i <= j; i == j is a loop

/// One realization. `adjacency`, `rescaled` and `centered` are dense N x N
/// matrices (left empty when sampled with dense = false). For Erdos-Renyi
/// samples rescaled = adjacency / sqrt(p(1-p)N) and
/// rescaled = centered + f_value * ones/N.
struct SampleBundle {
  EnsembleConfig config;
  double p = 0.0;
  double sigma = 0.0;  // sqrt(p(1-p)N)
  double f_value = 0.0;
  std::vector<Edge> edges;  // upper-triangular support of the adjacency
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd rescaled;
  Eigen::MatrixXd centered;

  int n() const { return config.n; }
  bool f_exceeds_q() const { return f_value > config.q; }
  /// Number of vertices with no incident edge (loops count as incident).
  int isolated_vertex_count() const;
};

/// Erdos-Renyi draw. Each upper-triangular (and, with include_diagonal,
/// diagonal) entry is Bernoulli(p) from a counter-based stream keyed by
/// (seed, i, j), so output is independent of evaluation order.
SampleBundle sample_er(const EnsembleConfig& config, bool dense = true);

struct MomentRow {
  int k = 0;
  double moment = 0.0;  // E|H_ij|^k
  double bound = 0.0;   // 1 / (N q^{k-2})
  bool pass = false;
};

/// Closed-form absolute moments of the centered rescaled Bernoulli entry.
std::vector<MomentRow> verify_moment_conditions(const EnsembleConfig& config, int k_max);

/// Discrete laws for the entries of H.
struct CenteredBernoulli {};
struct TwoPoint {
  double plus = 0.0, minus = 0.0, p_plus = 0.5;
};
struct CustomDiscrete {
  std::vector<double> atoms;
  std::vector<double> weights;
};
using EntryLaw = std::variant<CenteredBernoulli, TwoPoint, CustomDiscrete>;

struct LawCheck {
  bool ok = true;
  std::string failed_condition;  // "(ii) mean", "(ii) variance", "(iii) k=..."
  int failed_k = 0;
};

/// Checks mean zero, variance 1/N and E|X|^k <= 1/(N q^{k-2}) for
/// 3 <= k <= k_max by summing over the atoms.
LawCheck check_entry_law(const EntryLaw& law, int n, double q, int k_max);

/// Sample with H drawn from `law` and rescaled = H + f ones/N, where f is
/// f_override (default 0). CenteredBernoulli reproduces sample_er exactly.
SampleBundle sample_general_sparse(const EnsembleConfig& config, const EntryLaw& law,
                                   int k_max = 8);

/// key = value text; keys n, q, f_override, include_diagonal, seed.
EnsembleConfig parse_ensemble_config(const std::string& text);
EnsembleConfig load_ensemble_config(const std::filesystem::path& path);

/// "i j" per line, 0-indexed.
void write_edge_list(const std::filesystem::path& path, const std::vector<Edge>& edges);
std::vector<Edge> read_edge_list(const std::filesystem::path& path);

/// 8-byte little-endian dimension, then row-major little-endian doubles.
void write_dense_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_dense_matrix(const std::filesystem::path& path);

/// Dimension header, then row-major interleaved (re, im) little-endian doubles.
void write_complex_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m);
Eigen::MatrixXcd read_complex_matrix(const std::filesystem::path& path);

}  // namespace erlocal
