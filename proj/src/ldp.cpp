#include "erlocal/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <mutex>
#include <random>

#include "erlocal/ensemble.hpp"
#include "erlocal/errors.hpp"
#include "erlocal/keyvalue.hpp"
#include "erlocal/numerics.hpp"
#include "erlocal/parallel.hpp"
#include "erlocal/rng.hpp"

namespace erlocal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const std::vector<std::vector<cpp_int>>& stirling_table() {
  static const std::vector<std::vector<cpp_int>> table = [] {
    std::vector<std::vector<cpp_int>> t(kStirlingExactMax + 1);
    for (int r = 0; r <= kStirlingExactMax; ++r) {
      t[r].assign(static_cast<std::size_t>(r) + 1, cpp_int(0));
      t[r][0] = r == 0 ? 1 : 0;
      for (int k = 1; k <= r; ++k) {
        t[r][k] = t[r - 1].size() > static_cast<std::size_t>(k) ? k * t[r - 1][k] : cpp_int(0);
        t[r][k] += t[r - 1][k - 1];
      }
    }
    return t;
  }();
  return table;
}

double log_cpp_int(const cpp_int& v) {
  if (v <= 0) return kNegInf;
  const std::size_t bits = boost::multiprecision::msb(v) + 1;
  if (bits <= 1000) return std::log(v.convert_to<double>());
  const std::size_t shift = bits - 64;
  const cpp_int top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double positive_log_ratio(double psi, double gamma) {
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  if (psi == 0.0) return 0.0;
  return std::max(0.0, std::log(psi / gamma));
}

void check_r(int r) {
  if (r < 2 || r % 2 != 0)
    throw ValidationError("invalid r = " + std::to_string(r) + ": Let r be even (r >= 2)");
}

void check_gamma_psi(double gamma, double psi) {
  if (!(gamma >= 0.0) || !(psi >= 0.0))
    throw ValidationError("gamma and psi must be nonnegative");
}

double abs_pow(cplx v, int r) {
  const double base = std::norm(v);
  double out = 1.0;
  for (int k = 0; k < r / 2; ++k) out *= base;
  return out;
}

double sigma_of(const LdpInstance& inst) { return std::sqrt(inst.p * (1.0 - inst.p) * inst.n); }

}  // namespace

cpp_int stirling2(int r, int k) {
  if (r < 0 || k < 0 || k > r) throw ValidationError("stirling2 needs 0 <= k <= r");
  if (r > kStirlingExactMax)
    throw ValidationError("stirling2 exact mode supports r <= 64, got r = " + std::to_string(r));
  return stirling_table()[r][k];
}

double log_stirling2_upper(int r, int k) {
  if (k < 1 || k > r) return kNegInf;
  const double log_binom = std::lgamma(r + 1.0) - std::lgamma(k + 1.0) - std::lgamma(r - k + 1.0);
  return log_binom + (r - k) * std::log(static_cast<double>(k)) - std::log(2.0);
}

double log_stirling2(int r, int k) {
  if (r <= kStirlingExactMax) return log_cpp_int(stirling2(r, k));
  return log_stirling2_upper(r, k);
}

double log_R_r(int r, double gamma, double psi) {
  check_r(r);
  check_gamma_psi(gamma, psi);
  if (gamma == 0.0) return kNegInf;
  const double lg = std::log(gamma);
  if (psi == 0.0) return log_stirling2(r, r / 2) + r * lg;
  const double lp = std::log(psi);
  double acc = kNegInf;
  for (int k = 1; k <= r / 2; ++k)
    acc = log_add(acc, log_stirling2(r, k) + 2.0 * k * lg + (r - 2.0 * k) * lp);
  return acc;
}

double R_r(int r, double gamma, double psi) { return std::exp(log_R_r(r, gamma, psi)); }

double bound_linear(int r, double gamma, double psi) {
  check_r(r);
  check_gamma_psi(gamma, psi);
  const double pre = std::max(2.0 * r / (1.0 + 2.0 * positive_log_ratio(psi, gamma)), 2.0);
  return pre * std::max(gamma, psi);
}

double bound_squares(int r, double q, int n, double max_abs_a) {
  check_r(r);
  if (!(q >= 1.0) || q > std::sqrt(static_cast<double>(n)))
    throw ValidationError("q must satisfy 1 <= q <= sqrt(N)");
  const double ratio = r / (q * q);
  return 2.0 * (1.0 + 2.0 * q * q / n) * max_abs_a * std::max(ratio, std::sqrt(ratio));
}

double bound_bilinear(int r, double gamma, double psi) {
  check_r(r);
  check_gamma_psi(gamma, psi);
  const double pre = std::max(2.0 * r / (1.0 + positive_log_ratio(psi, gamma)), 2.0);
  return pre * pre * std::max(gamma, psi);
}

double bound_quadratic(int r, double gamma, double psi) {
  check_r(r);
  check_gamma_psi(gamma, psi);
  const double pre = std::max(4.0 * r / (1.0 + positive_log_ratio(psi, gamma)), 4.0);
  return pre * pre * std::max(gamma, psi);
}

const char* to_string(FormKind kind) {
  switch (kind) {
    case FormKind::linear: return "linear";
    case FormKind::squares: return "squares";
    case FormKind::bilinear: return "bilinear";
    case FormKind::quadratic: return "quadratic";
  }
  return "?";
}

FormKind parse_form_kind(const std::string& text) {
  for (FormKind k : {FormKind::linear, FormKind::squares, FormKind::bilinear, FormKind::quadratic})
    if (text == to_string(k)) return k;
  throw ValidationError("unknown form kind '" + text +
                        "' (expected linear, squares, bilinear or quadratic)");
}

bool is_matrix_kind(FormKind kind) {
  return kind == FormKind::bilinear || kind == FormKind::quadratic;
}

GammaPsi derive_gamma_psi(const Eigen::VectorXcd& a, int n, double q) {
  if (a.size() == 0) throw ValidationError("empty coefficient vector");
  GammaPsi out;
  out.gamma = std::sqrt(a.squaredNorm() / n);
  out.psi = a.cwiseAbs().maxCoeff() / q;
  return out;
}

GammaPsi derive_gamma_psi(const Eigen::MatrixXcd& a, int n, double q, FormKind kind) {
  if (a.size() == 0) throw ValidationError("empty coefficient matrix");
  Eigen::MatrixXd mag = a.cwiseAbs();
  if (kind == FormKind::quadratic) mag.diagonal().setZero();
  const Eigen::MatrixXd sq = mag.cwiseAbs2();
  const double row = sq.rowwise().sum().maxCoeff();
  const double col = sq.colwise().sum().maxCoeff();
  GammaPsi out;
  out.gamma = std::sqrt(std::max(row, col) / n);
  out.psi = mag.maxCoeff() / (q * q);
  return out;
}

void LdpInstance::validate() const {
  check_r(r);
  if (n < 1) throw ValidationError("N must be >= 1");
  if (!(q >= 1.0) || q > std::sqrt(static_cast<double>(n)) * (1.0 + 1e-12))
    throw ValidationError("q must satisfy 1 <= q <= sqrt(N)");
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("p must lie in (0, 1)");
  if (is_matrix_kind(kind)) {
    if (mat.rows() != n || mat.cols() != n)
      throw ValidationError(std::string(to_string(kind)) + " form needs an N x N coefficient matrix");
  } else if (vec.size() != n) {
    throw ValidationError(std::string(to_string(kind)) + " form needs N coefficients");
  }
  const GammaPsi tight = is_matrix_kind(kind) ? derive_gamma_psi(mat, n, q, kind)
                                              : derive_gamma_psi(vec, n, q);
  if (gamma < tight.gamma * (1.0 - 1e-12) || psi < tight.psi * (1.0 - 1e-12))
    throw ValidationError("gamma and psi must dominate the coefficient functionals");
  const double sigma = sigma_of(*this);
  const LawCheck law =
      check_entry_law(TwoPoint{(1.0 - p) / sigma, -p / sigma, p}, n, q, std::max(8, r));
  if (!law.ok)
    throw ValidationError("Bernoulli(p) entries violate moment condition " + law.failed_condition +
                          " at k = " + std::to_string(law.failed_k) + " for this q");
}

void LdpInstance::set_tight_gamma_psi() {
  const GammaPsi tight = is_matrix_kind(kind) ? derive_gamma_psi(mat, n, q, kind)
                                              : derive_gamma_psi(vec, n, q);
  gamma = tight.gamma;
  psi = tight.psi;
}

double LdpInstance::bound() const {
  switch (kind) {
    case FormKind::linear: return bound_linear(r, gamma, psi);
    case FormKind::squares: return bound_squares(r, q, n, vec.cwiseAbs().maxCoeff());
    case FormKind::bilinear: return bound_bilinear(r, gamma, psi);
    case FormKind::quadratic: return bound_quadratic(r, gamma, psi);
  }
  return 0.0;
}

LdpInstance make_instance(FormKind kind, int n, double q, double p, int r, Eigen::VectorXcd vec,
                          Eigen::MatrixXcd mat) {
  if (n < 1) throw ValidationError("N must be >= 1");
  LdpInstance inst;
  inst.kind = kind;
  inst.n = n;
  inst.r = r;
  if (q > 0.0 && p > 0.0) {
    inst.q = q;
    inst.p = p;
  } else if (p > 0.0) {
    inst.p = p;
    inst.q = std::sqrt(p * n);
  } else if (q > 0.0) {
    inst.q = q;
    inst.p = q * q / n;
  } else {
    throw ValidationError("give p, q or both");
  }
  inst.vec = std::move(vec);
  inst.mat = std::move(mat);
  if (is_matrix_kind(kind) ? inst.mat.size() == 0 : inst.vec.size() == 0)
    throw ValidationError("empty coefficients");
  inst.set_tight_gamma_psi();
  inst.validate();
  return inst;
}

cplx evaluate_form(const LdpInstance& inst, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  switch (inst.kind) {
    case FormKind::linear: return (inst.vec.array() * x.array()).sum();
    case FormKind::squares:
      return (inst.vec.array() * (x.array().square() - 1.0 / inst.n)).sum();
    case FormKind::bilinear: return x.cast<cplx>().dot(inst.mat * y);
    case FormKind::quadratic: {
      cplx acc = 0.0;
      for (int j = 0; j < inst.n; ++j)
        for (int i = 0; i < inst.n; ++i)
          if (i != j) acc += inst.mat(i, j) * x[i] * x[j];
      return acc;
    }
  }
  return 0.0;
}

double exact_lr_enumerate(const LdpInstance& inst, unsigned threads) {
  inst.validate();
  const bool bilinear = inst.kind == FormKind::bilinear;
  const int limit = bilinear ? kEnumerateMaxNBilinear : kEnumerateMaxN;
  if (inst.n > limit)
    throw ValidationError("enumeration budget exceeded: N = " + std::to_string(inst.n) +
                          " > " + std::to_string(limit) + " for " + to_string(inst.kind));
  if (inst.r > kEnumerateMaxR)
    throw ValidationError("enumeration supports r <= " + std::to_string(kEnumerateMaxR));

  const int n = inst.n;
  const double p = inst.p;
  const double sigma = sigma_of(inst);
  const double up = (1.0 - p) / sigma;
  const double down = -p / sigma;
  const std::size_t outcomes = std::size_t{1} << n;
  std::vector<double> weight(outcomes);
  std::vector<Eigen::VectorXd> values(outcomes, Eigen::VectorXd(n));
  for (std::size_t m = 0; m < outcomes; ++m) {
    int ones = 0;
    for (int i = 0; i < n; ++i) {
      const bool b = (m >> i) & 1U;
      ones += b;
      values[m][i] = b ? up : down;
    }
    weight[m] = std::pow(p, ones) * std::pow(1.0 - p, n - ones);
  }

  // One block per x outcome for bilinear forms, fixed-size outcome blocks
  // otherwise; block sums are combined in index order.
  constexpr std::size_t kBlock = 1024;
  const std::size_t blocks = bilinear ? outcomes : (outcomes + kBlock - 1) / kBlock;
  std::vector<double> partial(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    CompensatedSum acc;
    if (bilinear) {
      const Eigen::RowVectorXcd v = values[b].cast<cplx>().transpose() * inst.mat;
      for (std::size_t m = 0; m < outcomes; ++m) {
        const cplx form = (v.transpose().array() * values[m].array()).sum();
        acc.add(weight[b] * weight[m] * abs_pow(form, inst.r));
      }
    } else {
      const std::size_t end = std::min(outcomes, (b + 1) * kBlock);
      for (std::size_t m = b * kBlock; m < end; ++m)
        acc.add(weight[m] * abs_pow(evaluate_form(inst, values[m], values[m]), inst.r));
    }
    partial[b] = acc.value();
  });
  CompensatedSum total;
  for (double v : partial) total.add(v);
  return std::pow(total.value(), 1.0 / inst.r);
}

namespace {

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Indices of successes of N Bernoulli(p) trials via geometric gaps.
void bernoulli_support(std::mt19937_64& gen, int n, double log_q, std::vector<int>& out) {
  out.clear();
  long long i = -1;
  while (true) {
    const double u = 1.0 - unit_uniform(gen);  // (0, 1]
    i += 1 + static_cast<long long>(std::floor(std::log(u) / log_q));
    if (i >= n) break;
    out.push_back(static_cast<int>(i));
  }
}

}  // namespace

MonteCarloResult monte_carlo_lr(const LdpInstance& inst, long samples, std::uint64_t seed,
                                unsigned threads) {
  inst.validate();
  if (samples < kMonteCarloMinSamples)
    throw ValidationError("Monte Carlo needs at least 10000 samples");
  if (inst.r > kMonteCarloMaxR)
    throw ValidationError("Monte Carlo supports r <= " + std::to_string(kMonteCarloMaxR));

  const int n = inst.n;
  const double p = inst.p;
  const double sigma = sigma_of(inst);
  const double log_q = std::log1p(-p);
  const double s2 = sigma * sigma;

  // Precomputed sums reduce each sample to work on the support only.
  cplx vec_total = 0.0, sq_base = 0.0;
  Eigen::MatrixXcd mat;
  Eigen::VectorXcd row_sum, col_sum;
  cplx mat_total = 0.0;
  if (is_matrix_kind(inst.kind)) {
    mat = inst.mat;
    if (inst.kind == FormKind::quadratic) mat.diagonal().setZero();
    row_sum = mat.rowwise().sum();
    col_sum = mat.colwise().sum().transpose();
    mat_total = mat.sum();
  } else {
    vec_total = inst.vec.sum();
    sq_base = vec_total * (p * p / s2 - 1.0 / n);
  }
  const double sq_jump = ((1.0 - p) * (1.0 - p) - p * p) / s2;

  constexpr long kBlock = 1024;
  const long blocks = (samples + kBlock - 1) / kBlock;
  std::vector<RunningMoments> partial(static_cast<std::size_t>(blocks));
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    std::mt19937_64 gen(derive_seed(seed, b));
    const long count = std::min(kBlock, samples - static_cast<long>(b) * kBlock);
    std::vector<int> s, t;
    RunningMoments acc;
    for (long c = 0; c < count; ++c) {
      bernoulli_support(gen, n, log_q, s);
      cplx form = 0.0;
      switch (inst.kind) {
        case FormKind::linear: {
          cplx hit = 0.0;
          for (int i : s) hit += inst.vec[i];
          form = (hit - p * vec_total) / sigma;
          break;
        }
        case FormKind::squares: {
          cplx hit = 0.0;
          for (int i : s) hit += inst.vec[i];
          form = sq_base + sq_jump * hit;
          break;
        }
        case FormKind::quadratic: {
          cplx pair = 0.0, edge = 0.0;
          for (int i : s) {
            edge += row_sum[i] + col_sum[i];
            for (int j : s) pair += mat(i, j);
          }
          form = (pair - p * edge + p * p * mat_total) / s2;
          break;
        }
        case FormKind::bilinear: {
          bernoulli_support(gen, n, log_q, t);
          cplx pair = 0.0, edge = 0.0;
          for (int i : s) {
            edge += row_sum[i];
            for (int j : t) pair += mat(i, j);
          }
          for (int j : t) edge += col_sum[j];
          form = (pair - p * edge + p * p * mat_total) / s2;
          break;
        }
      }
      acc.add(abs_pow(form, inst.r));
    }
    partial[b] = acc;
  });
  RunningMoments total;
  for (const auto& m : partial) total.merge(m);

  MonteCarloResult out;
  out.samples = samples;
  out.mean_power = total.mean;
  out.mean_power_se = total.std_error();
  out.estimate = std::pow(total.mean, 1.0 / inst.r);
  out.std_error = total.mean > 0.0
                      ? out.mean_power_se * std::pow(total.mean, 1.0 / inst.r - 1.0) / inst.r
                      : 0.0;
  return out;
}

cplx parse_complex(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw ValidationError("empty complex number");
  if (text.back() != 'i') return {parse_double("coefficient", text), 0.0};
  const std::string body = text.substr(0, text.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_of = [&](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_double("coefficient", s);
  };
  if (split == std::string::npos) return {0.0, imag_of(body)};
  return {parse_double("coefficient", body.substr(0, split)), imag_of(body.substr(split))};
}

Eigen::VectorXcd parse_coefficient_vector(const std::string& text) {
  const auto parts = split(text, ',');
  Eigen::VectorXcd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t k = 0; k < parts.size(); ++k) v[static_cast<Eigen::Index>(k)] = parse_complex(parts[k]);
  return v;
}

Eigen::MatrixXcd parse_coefficient_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  std::vector<Eigen::VectorXcd> parsed;
  for (const auto& r : rows) parsed.push_back(parse_coefficient_vector(r));
  const auto n = static_cast<Eigen::Index>(parsed.size());
  Eigen::MatrixXcd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (parsed[static_cast<std::size_t>(i)].size() != n)
      throw ValidationError("coefficient matrix must be square");
    m.row(i) = parsed[static_cast<std::size_t>(i)].transpose();
  }
  return m;
}

LdpInstance parse_instance(const std::string& text, const std::string& base_dir) {
  const auto kv = parse_key_values(text);
  static const std::vector<std::string> known = {"kind", "n",      "q",     "p",  "r",
                                                 "coeffs", "coeffs_file", "gamma", "psi"};
  for (const auto& [k, v] : kv)
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw ValidationError("unknown instance key '" + k + "'");
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(std::string("instance file lacks '") + key + "'");
    return it->second;
  };
  const FormKind kind = parse_form_kind(need("kind"));
  const int n = static_cast<int>(parse_integer("n", need("n")));
  const int r = static_cast<int>(parse_integer("r", need("r")));
  const double q = kv.count("q") ? parse_double("q", kv.at("q")) : 0.0;
  const double p = kv.count("p") ? parse_double("p", kv.at("p")) : 0.0;

  Eigen::VectorXcd vec;
  Eigen::MatrixXcd mat;
  if (kv.count("coeffs") == kv.count("coeffs_file"))
    throw ValidationError("give exactly one of coeffs and coeffs_file");
  if (kv.count("coeffs")) {
    if (is_matrix_kind(kind))
      mat = parse_coefficient_matrix(kv.at("coeffs"));
    else
      vec = parse_coefficient_vector(kv.at("coeffs"));
  } else {
    std::filesystem::path path = kv.at("coeffs_file");
    if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
    if (is_matrix_kind(kind)) {
      mat = read_complex_matrix(path);
    } else {
      std::string body = read_text_file(path.string());
      std::replace_if(body.begin(), body.end(), [](char c) { return c == '\n' || c == ' ' || c == '\t' || c == '\r'; }, ',');
      std::string joined;
      for (const auto& part : split(body, ','))
        if (!trim(part).empty()) joined += (joined.empty() ? "" : ",") + trim(part);
      vec = parse_coefficient_vector(joined);
    }
  }
  LdpInstance inst = make_instance(kind, n, q, p, r, std::move(vec), std::move(mat));
  if (kv.count("gamma")) inst.gamma = parse_double("gamma", kv.at("gamma"));
  if (kv.count("psi")) inst.psi = parse_double("psi", kv.at("psi"));
  inst.validate();
  return inst;
}

LdpInstance load_instance(const std::string& path) {
  const std::filesystem::path p(path);
  return parse_instance(read_text_file(path), p.has_parent_path() ? p.parent_path().string() : ".");
}

std::string ldp_csv_header() {
  return "kind,N,q,r,gamma,psi,bound,exact_or_mc,estimate,stderr,pass";
}

std::string ldp_csv_row(const LdpRow& row) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%d,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%s",
                to_string(row.kind), row.n, row.q, row.r, row.gamma, row.psi, row.bound,
                row.method.c_str(), row.estimate, row.std_error, row.pass ? "true" : "false");
  return buf;
}

}  // namespace erlocal
