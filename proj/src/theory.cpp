#include "netgt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "netgt/error.hpp"

namespace netgt {

namespace {

constexpr double kProbTol = 1e-12;

void validate_theory_inputs(const Matrix& P, std::span<const double> h, std::size_t n) {
  const std::size_t K = P.rows();
  if (K == 0 || !P.square()) throw ParameterError("P must be a nonempty square matrix");
  if (P.asymmetry() > 1e-12) throw ParameterError("P must be symmetric");
  for (double x : P.data())
    if (!(x >= 0.0) || !std::isfinite(x)) throw ParameterError("P must be entrywise nonnegative");
  if (h.size() != K) throw ParameterError("h must have length K");
  double s = 0.0;
  for (double x : h) {
    if (!(x >= 0.0)) throw ParameterError("h must be entrywise nonnegative");
    s += x;
  }
  if (std::abs(s - 1.0) > kProbTol) throw ParameterError("h must sum to 1");
  if (n < 2) throw ParameterError("n must be at least 2");
}

RegularityDiagnostics diagnose(std::span<const double> h, const Matrix& G, double alpha0,
                               std::size_t n, const RegularityThresholds& t) {
  RegularityDiagnostics d;
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  d.h_ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  const auto eig = symmetric_eigen(G);
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : eig.values) smallest = std::min(smallest, std::abs(v));
  d.g_inverse_norm = smallest > 1e-14 ? 1.0 / smallest : std::numeric_limits<double>::infinity();
  d.alpha0 = alpha0;
  d.n_alpha0 = static_cast<double>(n) * alpha0;

  if (d.h_ratio > t.balance_bound) d.warnings.push_back("community sizes unbalanced: max h / min h exceeds bound");
  if (d.g_inverse_norm > t.balance_bound) d.warnings.push_back("||G^-1|| exceeds bound");
  if (alpha0 > t.sparsity_bound) d.warnings.push_back("alpha0 exceeds sparsity bound");
  if (d.n_alpha0 < 1.0 / t.sparsity_bound) d.warnings.push_back("n * alpha0 below sparsity bound");
  return d;
}

// --- presets ------------------------------------------------------------------

struct PresetDef {
  std::string name;
  std::vector<std::pair<std::string, double>> defaults;  // NaN: derived from other knobs
  std::function<void(const Knobs&, PresetScenario&)> build;
};

std::size_t node_count(const Knobs& k) {
  const double n = k.at("n");
  if (!(n >= 2.0) || n != std::floor(n)) throw ParameterError("knob n must be an integer >= 2");
  return static_cast<std::size_t>(n);
}

Matrix two_block(double a, double b, double d) { return Matrix::from_rows({{a, b}, {b, d}}); }

// (a - b) I_K + b 11'
Matrix planted_partition(std::size_t K, double a, double b) {
  Matrix p(K, K, b);
  for (std::size_t k = 0; k < K; ++k) p(k, k) = a;
  return p;
}

// c * eta eta' with eta = (a, b) / sqrt(a^2 + b^2)
Matrix rank_one(double a, double b, double c) {
  const double s = a * a + b * b;
  return Matrix::from_rows({{c * a * a / s, c * a * b / s}, {c * a * b / s, c * b * b / s}});
}

// First round(eps * n) nodes pure in community 1, the rest in community 2.
Matrix split_memberships(std::size_t n, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw ParameterError("knob eps must lie in (0, 1)");
  const auto first = static_cast<std::size_t>(std::llround(eps * static_cast<double>(n)));
  Matrix pi(n, 2);
  for (std::size_t i = 0; i < n; ++i) pi(i, i < first ? 0 : 1) = 1.0;
  return pi;
}

double derived_or(const Knobs& k, const std::string& key, double fallback) {
  const double v = k.at(key);
  return std::isnan(v) ? fallback : v;
}

const std::vector<PresetDef>& registry() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  static const std::vector<PresetDef> defs = {
      {"er",
       {{"n", 500}, {"alpha", 0.2}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {1, Matrix(1, 1, k.at("alpha")), FixedMembership{balanced_memberships(n, 1)}, n};
       }},
      {"example1_S",
       {{"n", 500}, {"a", 0.2}, {"b", 0.05}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, two_block(k.at("a"), k.at("b"), k.at("a")),
                     FixedMembership{split_memberships(n, 0.5)}, n};
       }},
      {"example1_AS1",
       {{"n", 500}, {"a", 0.2}, {"b", 0.05}, {"eps", 0.3}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, two_block(k.at("a"), k.at("b"), k.at("a")),
                     FixedMembership{split_memberships(n, k.at("eps"))}, n};
       }},
      {"example1_AS2",
       {{"n", 500}, {"a", 0.1}, {"b", 0.2}, {"d", 0.3}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, two_block(k.at("a"), k.at("b"), k.at("d")),
                     FixedMembership{split_memberships(n, 0.5)}, n};
       }},
      {"example1_AS3",
       {{"n", 500}, {"a", 0.2}, {"b", 0.05}, {"d", 0.22}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, two_block(k.at("a"), k.at("b"), k.at("d")),
                     FixedMembership{split_memberships(n, 0.5)}, n};
       }},
      {"example2_rank1",
       {{"n", 500}, {"a", 2.0}, {"b", 1.0}, {"c", 0.5}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, rank_one(k.at("a"), k.at("b"), k.at("c")),
                     FixedMembership{balanced_memberships(n, 2)}, n};
       }},
      {"exp2_1",
       {{"n", 300}, {"K", 5}, {"a", 0.2}, {"b", 0.05}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const auto K = static_cast<std::size_t>(k.at("K"));
         s.params = {K, planted_partition(K, k.at("a"), k.at("b")),
                     FixedMembership{balanced_memberships(n, K)}, n};
       }},
      {"exp2_2",
       {{"n", 200}, {"a", nan}, {"b", 1.0}, {"c", 0.2}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const double a = derived_or(k, "a", 1.0 + std::pow(static_cast<double>(n), -0.25));
         s.knobs["a"] = a;
         s.params = {2, rank_one(a, k.at("b"), k.at("c")), FixedMembership{balanced_memberships(n, 2)}, n};
       }},
      {"exp3_1",
       {{"n", 300}, {"K", 5}, {"a", 0.2}, {"b", 0.1}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const auto K = static_cast<std::size_t>(k.at("K"));
         s.params = {K, planted_partition(K, k.at("a"), k.at("b")),
                     FixedMembership{balanced_memberships(n, K)}, n};
       }},
      {"exp3_2",
       {{"n", 300}, {"a", nan}, {"b", 1.0}, {"c", 0.06}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const double a = derived_or(k, "a", 1.0 + std::pow(static_cast<double>(n), -0.25));
         s.knobs["a"] = a;
         s.params = {2, rank_one(a, k.at("b"), k.at("c")), FixedMembership{balanced_memberships(n, 2)}, n};
       }},
      {"exp4_symmetric",
       {{"n", 500}, {"a", 0.2}, {"b", 0.05}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, planted_partition(2, k.at("a"), k.at("b")),
                     FixedMembership{balanced_memberships(n, 2)}, n};
       }},
      {"exp4_asymmetric",
       {{"n", 500}, {"a", 0.2}, {"b_lo", 0.125}, {"b_hi", 0.175}, {"eps", 0.2}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const double eps = k.at("eps");
         s.random_offdiagonal = UniformRange{k.at("b_lo"), k.at("b_hi")};
         s.params = {2, planted_partition(2, k.at("a"), 0.5 * (k.at("b_lo") + k.at("b_hi"))),
                     PureMembership{{eps, 1.0 - eps}}, n};
       }},
      {"exp4_rank1",
       {{"n", 500}, {"a", nan}, {"b", 1.0}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const double a = derived_or(k, "a", 1.0 + std::pow(static_cast<double>(n), -0.5));
         s.knobs["a"] = a;
         s.params = {2, rank_one(a, k.at("b"), 1.0), FixedMembership{balanced_memberships(n, 2)}, n};
       }},
      {"exp4_symmetric_mm",
       {{"n", 500}, {"a", 0.2}, {"b", 0.05}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.params = {2, planted_partition(2, k.at("a"), k.at("b")), DirichletMembership{{0.1, 0.1}}, n};
       }},
      {"exp4_asymmetric_mm",
       {{"n", 500}, {"a", 0.2}, {"b_lo", 0.125}, {"b_hi", 0.175}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         s.random_offdiagonal = UniformRange{k.at("b_lo"), k.at("b_hi")};
         s.params = {2, planted_partition(2, k.at("a"), 0.5 * (k.at("b_lo") + k.at("b_hi"))),
                     DirichletMembership{{0.2, 0.8}}, n};
       }},
      {"exp4_rank1_mm",
       {{"n", 500}, {"a", nan}, {"b", 1.0}},
       [](const Knobs& k, PresetScenario& s) {
         const std::size_t n = node_count(k);
         const double a = derived_or(k, "a", 1.0 + std::pow(static_cast<double>(n), -0.2));
         s.knobs["a"] = a;
         s.params = {2, rank_one(a, k.at("b"), 1.0), DirichletMembership{{0.4, 0.6}}, n};
       }},
  };
  return defs;
}

const PresetDef& find_preset(const std::string& name) {
  for (const auto& d : registry())
    if (d.name == name) return d;
  throw ParameterError("unknown scenario preset: " + name);
}

// Every realizable pi_i' P pi_j is a convex combination of P entries, so the
// entrywise bound on P is the exact condition.
void check_realizable(const Matrix& P) {
  for (double x : P.data())
    if (x > 1.0 + kProbTol || x < 0.0) throw ParameterError("scenario yields edge probabilities outside [0, 1]");
}

}  // namespace

TheoryReport theory_report(const Matrix& P, std::span<const double> h, std::size_t n,
                           std::optional<Matrix> G, const RegularityThresholds& thresholds) {
  validate_theory_inputs(P, h, n);
  const std::size_t K = P.rows();
  TheoryReport r;
  r.n = n;
  r.h.assign(h.begin(), h.end());
  const auto ph = mat_vec(P, h);
  r.alpha0 = dot(h, ph);
  if (!(r.alpha0 > 0.0)) throw DegenerateError("alpha0 = h'Ph must be positive");

  r.M = Matrix(K, K);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b) r.M(a, b) = P(a, b) - r.alpha0;

  if (G) {
    if (G->rows() != K || G->cols() != K) throw ParameterError("G must be K x K");
    r.G = *G;
  } else {
    r.G = Matrix(K, K);
    for (std::size_t k = 0; k < K; ++k) r.G(k, k) = h[k];
  }

  double gap = 0.0;
  for (double x : ph) gap += (x - r.alpha0) * (x - r.alpha0);
  const double nn = static_cast<double>(n);
  r.delta_n = std::pow(nn, 1.5) * gap / r.alpha0;
  const double m_norm = spectral_norm_symmetric(r.M);
  r.tau_n = nn * nn * std::pow(m_norm, 4) / (r.alpha0 * r.alpha0);
  r.beta_n = std::max(r.delta_n, r.tau_n);
  r.diagnostics = diagnose(r.h, r.G, r.alpha0, n, thresholds);
  return r;
}

TheoryReport theory_report(const MmsbmParams& params, const RegularityThresholds& thresholds) {
  params.validate();
  auto h = mean_membership(params);
  // Row means of a fixed matrix can drift from 1 by rounding.
  double s = 0.0;
  for (double x : h) s += x;
  for (double& x : h) x /= s;
  return theory_report(params.P, h, params.n, membership_second_moment(params), thresholds);
}

ExactSnrReport exact_snr(const ProbabilityMatrix& omega) {
  const std::size_t n = omega.size();
  const Matrix centered = centered_signal_matrix(omega);
  Matrix noise(n, n);
  bool all_binary = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double p = omega(i, j);
      noise(i, j) = p * (1.0 - p);
      if (noise(i, j) != 0.0) all_binary = false;
    }
  if (all_binary) throw DegenerateError("every entry of Omega is 0 or 1");

  const std::vector<double> ones(n, 1.0);
  const auto centered_ones = mat_vec(centered, ones);
  const auto noise_ones = mat_vec(noise, ones);

  ExactSnrReport r;
  r.chi2_numerator = dot(centered_ones, centered_ones);
  r.chi2_denominator = std::sqrt(2.0 * dot(noise_ones, noise_ones));
  r.osq_numerator = frobenius_norm_squared(multiply_symmetric(centered));
  r.osq_denominator = std::sqrt(8.0 * frobenius_norm_squared(multiply_symmetric(noise)));
  r.snr_chi2 = r.chi2_numerator / r.chi2_denominator;
  r.snr_osq = r.osq_numerator / r.osq_denominator;
  return r;
}

MmsbmParams PresetScenario::draw_params(StreamKey key) const {
  if (!random_offdiagonal) return params;
  MmsbmParams p = params;
  const double u = uniform_at(purpose_key(key, StreamPurpose::parameters), 0);
  const double b = random_offdiagonal->lo + u * (random_offdiagonal->hi - random_offdiagonal->lo);
  for (std::size_t i = 0; i < p.K; ++i)
    for (std::size_t j = 0; j < p.K; ++j)
      if (i != j) p.P(i, j) = b;
  return p;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& d : registry()) out.push_back(d.name);
  return out;
}

std::vector<std::string> preset_knobs(const std::string& name) {
  std::vector<std::string> out;
  for (const auto& [key, value] : find_preset(name).defaults) out.push_back(key);
  return out;
}

PresetScenario preset_scenario(const std::string& name, const Knobs& knobs) {
  const auto& def = find_preset(name);
  PresetScenario s;
  s.name = name;
  for (const auto& [key, value] : def.defaults) s.knobs[key] = value;
  for (const auto& [key, value] : knobs) {
    if (!s.knobs.contains(key)) throw ParameterError("scenario " + name + " has no knob '" + key + "'");
    s.knobs[key] = value;
  }
  def.build(s.knobs, s);
  if (s.random_offdiagonal) {
    const auto [lo, hi] = *s.random_offdiagonal;
    if (!(lo <= hi)) throw ParameterError("random off-diagonal range must satisfy lo <= hi");
    if (lo < 0.0 || hi > 1.0) throw ParameterError("scenario yields edge probabilities outside [0, 1]");
  }
  check_realizable(s.params.P);
  s.params.validate();
  s.theory = theory_report(s.params);
  return s;
}

}  // namespace netgt
