#include "erlocal/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "erlocal/errors.hpp"
#include "erlocal/keyvalue.hpp"
#include "erlocal/rng.hpp"

namespace erlocal {

void EnsembleConfig::validate(bool bernoulli) const {
  if (n < 2) throw ValidationError("N must be at least 2 (got " + std::to_string(n) + ")");
  if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("q must be positive and finite");
  const double root_n = std::sqrt(static_cast<double>(n));
  if (!subcritical && q < 1.0)
    throw ValidationError("q must satisfy 1 <= q <= sqrt(N); got q = " + std::to_string(q));
  if (q > root_n * (1.0 + 1e-12))
    throw ValidationError("q must satisfy 1 <= q <= sqrt(N) = " + std::to_string(root_n) +
                          "; got q = " + std::to_string(q));
  if (bernoulli && !(p() < 1.0))
    throw ValidationError("p = q^2/N must lie in (0, 1); got p = " + std::to_string(p()));
  if (f_override && !(*f_override >= 0.0))
    throw ValidationError("f must be nonnegative");
}

EnsembleConfig subcritical_config(int n, double expected_degree, std::uint64_t seed) {
  EnsembleConfig c;
  c.n = n;
  c.q = std::sqrt(expected_degree);
  c.include_diagonal = false;
  c.seed = seed;
  c.subcritical = true;
  return c;
}

int SampleBundle::isolated_vertex_count() const {
  std::vector<char> touched(static_cast<std::size_t>(n()), 0);
  for (const auto& [i, j] : edges) {
    touched[static_cast<std::size_t>(i)] = 1;
    touched[static_cast<std::size_t>(j)] = 1;
  }
  return static_cast<int>(std::count(touched.begin(), touched.end(), 0));
}

SampleBundle sample_er(const EnsembleConfig& config, bool dense) {
  config.validate(true);
  SampleBundle s;
  s.config = config;
  const int n = config.n;
  s.p = config.p();
  s.sigma = std::sqrt(s.p * (1.0 - s.p) * n);
  const double natural_f = config.q / std::sqrt(1.0 - s.p);
  s.f_value = config.f_override.value_or(natural_f);

  for (int i = 0; i < n; ++i) {
    for (int j = config.include_diagonal ? i : i + 1; j < n; ++j) {
      if (counter_uniform(config.seed, static_cast<std::uint64_t>(i),
                          static_cast<std::uint64_t>(j)) < s.p)
        s.edges.emplace_back(i, j);
    }
  }
  if (!dense) return s;

  s.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : s.edges) {
    s.adjacency(i, j) = 1.0;
    s.adjacency(j, i) = 1.0;
  }
  // H = (adjacency - p) / sigma, and p / sigma = natural_f / N.
  const double natural_shift = natural_f / n;
  const double shift = s.f_value / n;
  s.centered.resize(n, n);
  s.rescaled.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      double h = s.adjacency(i, j) / s.sigma - natural_shift;
      if (i == j && !config.include_diagonal) h = -natural_shift;
      const double a = config.f_override ? h + shift : s.adjacency(i, j) / s.sigma;
      s.centered(i, j) = s.centered(j, i) = h;
      s.rescaled(i, j) = s.rescaled(j, i) = a;
    }
  }
  return s;
}

std::vector<MomentRow> verify_moment_conditions(const EnsembleConfig& config, int k_max) {
  config.validate(true);
  if (k_max < 2) throw ValidationError("k_max must be at least 2");
  const double p = config.p();
  const double n = config.n;
  const double var = p * (1.0 - p) * n;
  std::vector<MomentRow> rows;
  for (int k = 2; k <= k_max; ++k) {
    MomentRow row;
    row.k = k;
    row.moment = (p * std::pow(1.0 - p, k) + (1.0 - p) * std::pow(p, k)) / std::pow(var, 0.5 * k);
    row.bound = 1.0 / (n * std::pow(config.q, k - 2));
    row.pass = k == 2 ? std::abs(row.moment - 1.0 / n) <= 1e-12 / n
                      : row.moment <= row.bound * (1.0 + 1e-12);
    rows.push_back(row);
  }
  return rows;
}

namespace {

CustomDiscrete as_discrete(const EntryLaw& law, int n, double q) {
  if (const auto* tp = std::get_if<TwoPoint>(&law))
    return {{tp->plus, tp->minus}, {tp->p_plus, 1.0 - tp->p_plus}};
  if (const auto* cd = std::get_if<CustomDiscrete>(&law)) return *cd;
  const double p = q * q / n;
  const double sigma = std::sqrt(p * (1.0 - p) * n);
  return {{(1.0 - p) / sigma, -p / sigma}, {p, 1.0 - p}};
}

}  // namespace

LawCheck check_entry_law(const EntryLaw& law, int n, double q, int k_max) {
  const CustomDiscrete d = as_discrete(law, n, q);
  LawCheck out;
  auto fail = [&](std::string what, int k) {
    out.ok = false;
    out.failed_condition = std::move(what);
    out.failed_k = k;
    return out;
  };
  if (d.atoms.empty() || d.atoms.size() != d.weights.size())
    return fail("atoms and weights must be nonempty and of equal length", 0);
  double total = 0.0;
  for (double w : d.weights) {
    if (!(w >= 0.0)) return fail("weights must be nonnegative", 0);
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) return fail("weights must sum to 1", 0);
  auto moment = [&](int k, bool absolute) {
    double m = 0.0;
    for (std::size_t a = 0; a < d.atoms.size(); ++a)
      m += d.weights[a] * std::pow(absolute ? std::abs(d.atoms[a]) : d.atoms[a], k);
    return m;
  };
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  if (std::abs(moment(1, false)) > 1e-12 * scale) return fail("(ii) mean zero", 1);
  if (std::abs(moment(2, false) * n - 1.0) > 1e-9) return fail("(ii) variance 1/N", 2);
  for (int k = 3; k <= k_max; ++k) {
    const double bound = 1.0 / (n * std::pow(q, k - 2));
    if (moment(k, true) > bound * (1.0 + 1e-12)) return fail("(iii) k-th moment bound", k);
  }
  return out;
}

SampleBundle sample_general_sparse(const EnsembleConfig& config, const EntryLaw& law,
                                   int k_max) {
  if (std::holds_alternative<CenteredBernoulli>(law)) return sample_er(config, true);
  config.validate(false);
  const LawCheck check = check_entry_law(law, config.n, config.q, k_max);
  if (!check.ok)
    throw ValidationError("entry law violates moment condition " + check.failed_condition +
                          " (first failing k = " + std::to_string(check.failed_k) + ")");
  const CustomDiscrete d = as_discrete(law, config.n, config.q);
  std::vector<double> cdf(d.weights.size());
  std::partial_sum(d.weights.begin(), d.weights.end(), cdf.begin());

  SampleBundle s;
  s.config = config;
  const int n = config.n;
  s.p = config.p();
  s.sigma = std::sqrt(s.p * (1.0 - s.p) * n);
  s.f_value = config.f_override.value_or(0.0);
  const double shift = s.f_value / n;
  s.centered = Eigen::MatrixXd::Zero(n, n);
  s.rescaled.resize(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i) {
      double h = 0.0;
      if (i != j || config.include_diagonal) {
        const double u = counter_uniform(config.seed, static_cast<std::uint64_t>(j),
                                         static_cast<std::uint64_t>(i));
        std::size_t a = 0;
        while (a + 1 < cdf.size() && u >= cdf[a]) ++a;
        h = d.atoms[a];
      }
      s.centered(i, j) = s.centered(j, i) = h;
      s.rescaled(i, j) = s.rescaled(j, i) = h + shift;
    }
  }
  return s;
}

EnsembleConfig parse_ensemble_config(const std::string& text) {
  EnsembleConfig c;
  bool has_n = false, has_q = false;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "n") {
      c.n = static_cast<int>(parse_integer(key, value));
      has_n = true;
    } else if (key == "q") {
      c.q = parse_double(key, value);
      has_q = true;
    } else if (key == "f_override") {
      c.f_override = parse_double(key, value);
    } else if (key == "include_diagonal") {
      c.include_diagonal = parse_bool(key, value);
    } else if (key == "seed") {
      c.seed = parse_unsigned(key, value);
    } else {
      throw ValidationError("unknown ensemble key '" + key + "'");
    }
  }
  if (!has_n || !has_q) throw ValidationError("ensemble config requires keys 'n' and 'q'");
  return c;
}

EnsembleConfig load_ensemble_config(const std::filesystem::path& path) {
  return parse_ensemble_config(read_text_file(path.string()));
}

void write_edge_list(const std::filesystem::path& path, const std::vector<Edge>& edges) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  for (const auto& [i, j] : edges) out << i << ' ' << j << '\n';
}

std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<Edge> edges;
  int i = 0, j = 0;
  while (in >> i >> j) edges.emplace_back(i, j);
  return edges;
}

namespace {

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((v >> (8 * b)) & 0xFF);
  out.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw ValidationError("truncated matrix file");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return v;
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::ofstream open_binary_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_binary_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

void write_dense_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ValidationError("dense matrix export needs a square matrix");
  auto out = open_binary_out(path);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

Eigen::MatrixXd read_dense_matrix(const std::filesystem::path& path) {
  auto in = open_binary_in(path);
  const auto n = static_cast<Eigen::Index>(get_u64(in));
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = get_f64(in);
  return m;
}

void write_complex_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ValidationError("complex matrix export needs a square matrix");
  auto out = open_binary_out(path);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_f64(out, m(i, j).real());
      put_f64(out, m(i, j).imag());
    }
  }
}

Eigen::MatrixXcd read_complex_matrix(const std::filesystem::path& path) {
  auto in = open_binary_in(path);
  const auto n = static_cast<Eigen::Index>(get_u64(in));
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double re = get_f64(in);
      m(i, j) = {re, get_f64(in)};
    }
  }
  return m;
}

}  // namespace erlocal
