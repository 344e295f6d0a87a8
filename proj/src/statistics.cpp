#include "netgt/statistics.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <vector>

#include "netgt/distributions.hpp"
#include "netgt/error.hpp"

namespace netgt {

namespace {

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("test level must lie in (0, 1)");
}

void require_nodes(const AdjacencyMatrix& a, std::size_t minimum, const char* what) {
  if (a.size() < minimum) {
    throw InstanceTooSmall(std::string(what) + " needs at least " + std::to_string(minimum) +
                           " nodes, got " + std::to_string(a.size()));
  }
}

void require_guard(const AdjacencyMatrix& a) {
  if (a.size() > kNaiveGuard) {
    throw GuardError("exhaustive sum refused for n = " + std::to_string(a.size()) + " > " +
                     std::to_string(kNaiveGuard));
  }
}

// Depth-first enumeration of ordered distinct index sequences, carrying the
// running product of consecutive centered entries.
class DistinctWalker {
 public:
  DistinctWalker(const Matrix& b, std::size_t length, bool close_cycle)
      : b_(b), length_(length), close_(close_cycle), used_(b.rows(), false), seq_(length) {}

  double run() {
    double total = 0.0;
    for (std::size_t s = 0; s < b_.rows(); ++s) {
      used_[s] = true;
      seq_[0] = s;
      total += extend(1, 1.0);
      used_[s] = false;
    }
    return total;
  }

 private:
  double extend(std::size_t depth, double product) {
    if (depth == length_) return close_ ? product * b_(seq_[depth - 1], seq_[0]) : product;
    double total = 0.0;
    const std::size_t prev = seq_[depth - 1];
    for (std::size_t v = 0; v < b_.rows(); ++v) {
      if (used_[v]) continue;
      used_[v] = true;
      seq_[depth] = v;
      total += extend(depth + 1, product * b_(prev, v));
      used_[v] = false;
    }
    return total;
  }

  const Matrix& b_;
  std::size_t length_;
  bool close_;
  std::vector<bool> used_;
  std::vector<std::size_t> seq_;
};

__extension__ typedef __int128 i128;

// alpha-hat after clamping, as p / q with q = n(n-1)/2.
struct Fraction {
  std::int64_t p = 0;
  std::int64_t q = 1;
};

Fraction clamped_fraction(const AdjacencyMatrix& a) {
  const auto n = static_cast<std::int64_t>(a.size());
  const std::int64_t q = n * (n - 1) / 2;
  auto p = static_cast<std::int64_t>(a.edge_count());
  if (p == 0) p = 1;
  else if (p == q) p = q - 1;
  return {p, q};
}

bool mul(i128 x, i128 y, i128& out) { return !__builtin_mul_overflow(x, y, &out); }
bool add(i128 x, i128 y, i128& out) { return !__builtin_add_overflow(x, y, &out); }

// Degree-4 polynomial in alpha with integer coefficients.
struct Quartic {
  std::array<i128, 5> c{};

  long double at(long double x) const {
    long double v = 0.0L;
    for (std::size_t k = c.size(); k-- > 0;) v = v * x + static_cast<long double>(c[k]);
    return v;
  }

  // Exact at x = p / q while sum_k c_k p^k q^(4-k) fits in 128 bits.
  double at(Fraction f) const {
    i128 total = 0;
    bool ok = true;
    for (std::size_t k = 0; k < c.size() && ok; ++k) {
      i128 term = c[k];
      for (std::size_t e = 0; e < k && ok; ++e) ok = mul(term, f.p, term);
      for (std::size_t e = k; e < 4 && ok; ++e) ok = mul(term, f.q, term);
      ok = ok && add(total, term, total);
    }
    if (!ok) return static_cast<double>(at(static_cast<long double>(f.p) / static_cast<long double>(f.q)));
    long double v = static_cast<long double>(total);
    for (int e = 0; e < 4; ++e) v /= static_cast<long double>(f.q);
    return static_cast<double>(v);
  }
};

struct SignedPolynomials {
  Quartic path2, cycle3, cycle4;
};

// With B = A - alpha (J - I), c_ij = (A^2)_ij and s_ij = d_i + d_j - 2 A_ij,
//   (B^2)_ij = m_ij = c_ij - alpha s_ij + alpha^2 (n - 2)   (i != j),
//   (B^2)_ii = r_i  = d_i (1 - 2 alpha) + (n - 1) alpha^2.
// Distinct 4-cycles drop the i3 == i1 and i4 == i2 coincidences:
//   Q  = tr(B^4) - 2 sum_i r_i^2 + sum_{i != j} b_ij^4,
//   U3 = tr(B^3) = sum_{i != j} b_ij m_ij,
//   V2 = 1'B^2 1 - tr(B^2).
// One pass over node pairs collects the integer sums; the rest is closed form.
SignedPolynomials signed_polynomials(const AdjacencyMatrix& a) {
  const std::size_t n = a.size();
  const auto deg = a.degrees();
  const std::size_t words = a.words_per_row();

  i128 cc = 0, cs = 0, ss = 0, c1 = 0, s1 = 0, ac = 0, as = 0;  // over i < j
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t* ri = a.row_bits(i).data();
    const auto di = static_cast<std::int64_t>(deg[i]);
    std::int64_t rcc = 0, rcs = 0, rss = 0, rc = 0, rs = 0, rac = 0, ras = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint64_t* rj = a.row_bits(j).data();
      std::int64_t c = 0;
      for (std::size_t w = 0; w < words; ++w) c += std::popcount(ri[w] & rj[w]);
      const std::int64_t aij = a(i, j) ? 1 : 0;
      const std::int64_t s = di + static_cast<std::int64_t>(deg[j]) - 2 * aij;
      rcc += c * c;
      rcs += c * s;
      rss += s * s;
      rc += c;
      rs += s;
      rac += aij * c;
      ras += aij * s;
    }
    cc += rcc;
    cs += rcs;
    ss += rss;
    c1 += rc;
    s1 += rs;
    ac += rac;
    as += ras;
  }

  const i128 nn = static_cast<i128>(n);
  const i128 t = nn - 2, pairs = nn * (nn - 1) / 2, e = static_cast<i128>(a.edge_count());
  i128 d2 = 0;
  for (auto d : deg) d2 += static_cast<i128>(d) * static_cast<i128>(d);

  const Quartic m2{{cc, -2 * cs, ss + 2 * t * c1, -2 * t * s1, t * t * pairs}};  // sum_{i<j} m^2
  const Quartic bm{{ac, -(as + c1), t * e + s1, -t * pairs, 0}};                  // sum_{i<j} b m
  const Quartic r1{{2 * e, -4 * e, nn * (nn - 1), 0, 0}};                         // sum_i r_i
  const Quartic r2{{d2, -4 * d2, 4 * d2 + 4 * (nn - 1) * e, -8 * (nn - 1) * e,
                    nn * (nn - 1) * (nn - 1)}};                                   // sum_i r_i^2
  const Quartic s2{{d2, -4 * (nn - 1) * e, nn * (nn - 1) * (nn - 1), 0, 0}};      // sum_i (d_i - alpha (n-1))^2
  const Quartic b4{{2 * e, -8 * e, 12 * e, -8 * e, 2 * pairs}};                   // sum_{i != j} b_ij^4

  SignedPolynomials out;
  for (std::size_t k = 0; k < 5; ++k) {
    out.path2.c[k] = s2.c[k] - r1.c[k];
    out.cycle3.c[k] = 2 * bm.c[k];
    out.cycle4.c[k] = 2 * m2.c[k] - r2.c[k] + b4.c[k];
  }
  return out;
}

// X_n = sum_i (d_i - dbar)^2 / ((n - 1) alpha (1 - alpha))
//     = (n sum d_i^2 - (2E)^2) q^2 / (n (n - 1) p (q - p)) at alpha = p / q.
double chi2_raw(const AdjacencyMatrix& a) {
  const auto f = clamped_fraction(a);
  const auto deg = a.degrees();
  const auto nn = static_cast<i128>(a.size());
  i128 d2 = 0;
  for (auto d : deg) d2 += static_cast<i128>(d) * static_cast<i128>(d);
  const i128 twice_e = 2 * static_cast<i128>(a.edge_count());
  i128 num = 0, den = 0, q2 = 0;
  bool ok = mul(f.q, f.q, q2) && mul(nn * d2 - twice_e * twice_e, q2, num) &&
            mul(nn * (nn - 1) * f.p, f.q - f.p, den);
  if (ok) return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
  const long double alpha = static_cast<long double>(f.p) / static_cast<long double>(f.q);
  const long double ss = static_cast<long double>(nn * d2 - twice_e * twice_e) / static_cast<long double>(nn);
  return static_cast<double>(ss / ((static_cast<long double>(nn) - 1.0L) * alpha * (1.0L - alpha)));
}

// (n - 1) alpha (1 - alpha)(X_n - n) is the distinct 2-path sum; at alpha-hat its
// null mean is -2(n - 2) alpha (1 - alpha) and its variance 2n(n - 1)(n - 2) alpha^2 (1 - alpha)^2.
double chi2_normalize(double x_n, std::size_t n, Normalization norm) {
  const double nn = static_cast<double>(n);
  if (norm == Normalization::asymptotic) return (x_n - nn) / std::sqrt(2.0 * nn);
  return ((nn - 1.0) * (x_n - nn) + 2.0 * (nn - 2.0)) / std::sqrt(2.0 * nn * (nn - 1.0) * (nn - 2.0));
}

// Each unordered 4-cycle appears 8 times in Q_n; there are 3 C(n, 4) of them.
double osq_normalize(double q_n, std::size_t n, double alpha, Normalization norm) {
  const double nn = static_cast<double>(n);
  if (norm == Normalization::asymptotic) return q_n / (2.0 * std::numbers::sqrt2 * nn * nn * alpha * alpha);
  const double v = alpha * (1.0 - alpha);
  return q_n / (2.0 * std::sqrt(2.0 * nn * (nn - 1.0) * (nn - 2.0) * (nn - 3.0)) * v * v);
}

TestReport make_report(StatisticKind kind, std::size_t n, const EdgeDensityEstimate& est,
                       double raw, double normalized, double p_value, double level, Normalization norm) {
  TestReport r;
  r.normalization = norm;
  r.kind = kind;
  r.raw = raw;
  r.normalized = normalized;
  r.p_value = p_value;
  r.level = level;
  r.reject = p_value < level;
  r.n = n;
  r.alpha_hat = est;
  return r;
}

double osq_raw(const AdjacencyMatrix& a) { return signed_sums(a).cycle4; }

}  // namespace

std::string TestReport::statistic_name() const {
  switch (kind) {
    case StatisticKind::chi2: return "chi2";
    case StatisticKind::osq: return "osq";
    case StatisticKind::pe: return "pe";
    case StatisticKind::signed_cycle: return "signed_cycle(" + std::to_string(order) + ")";
    case StatisticKind::signed_path: return "signed_path(" + std::to_string(order) + ")";
  }
  return "unknown";
}

EdgeDensityEstimate alpha_hat(const AdjacencyMatrix& a) {
  require_nodes(a, 2, "edge density");
  const double pairs = static_cast<double>(a.size()) * static_cast<double>(a.size() - 1);
  const double ones = 2.0 * static_cast<double>(a.edge_count());
  EdgeDensityEstimate est{ones / pairs, ones / pairs, false};
  if (ones == 0.0) {
    est.clamped = 2.0 / pairs;
    est.was_clamped = true;
  } else if (ones == pairs) {
    est.clamped = (pairs - 2.0) / pairs;
    est.was_clamped = true;
  }
  return est;
}

CenteredAdjacency center_adjacency(const AdjacencyMatrix& a, double alpha) {
  const std::size_t n = a.size();
  CenteredAdjacency c{alpha, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) c.B(i, j) = (a(i, j) ? 1.0 : 0.0) - alpha;
  return c;
}

CenteredAdjacency center_adjacency(const AdjacencyMatrix& a) {
  return center_adjacency(a, alpha_hat(a).clamped);
}

SignedSums signed_sums(const AdjacencyMatrix& a, double alpha) {
  const auto poly = signed_polynomials(a);
  const long double x = alpha;
  return {static_cast<double>(poly.path2.at(x)), static_cast<double>(poly.cycle3.at(x)),
          static_cast<double>(poly.cycle4.at(x))};
}

SignedSums signed_sums(const AdjacencyMatrix& a) {
  const auto poly = signed_polynomials(a);
  const auto f = clamped_fraction(a);
  return {poly.path2.at(f), poly.cycle3.at(f), poly.cycle4.at(f)};
}

SignedSums signed_sums_dense(const CenteredAdjacency& centered) {
  const Matrix& b = centered.B;
  const Matrix b2 = multiply_symmetric(b);  // B symmetric, so B B' = B^2
  const std::size_t n = b.rows();
  double tr4 = 0.0, tr3 = 0.0, r_sq = 0.0, b4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      tr4 += b2(i, j) * b2(i, j);
      tr3 += b(i, j) * b2(i, j);
      const double sq = b(i, j) * b(i, j);
      b4 += sq * sq;
    }
    r_sq += b2(i, i) * b2(i, i);
  }
  SignedSums out;
  out.path2 = grand_sum(b2) - trace(b2);
  out.cycle3 = tr3;
  out.cycle4 = tr4 - 2.0 * r_sq + b4;
  return out;
}

TestReport chi2_statistic(const AdjacencyMatrix& a, double level, Normalization norm) {
  require_level(level);
  require_nodes(a, 3, "chi2 statistic");
  const auto est = alpha_hat(a);
  const double x_n = chi2_raw(a);
  const double psi = chi2_normalize(x_n, a.size(), norm);
  return make_report(StatisticKind::chi2, a.size(), est, x_n, psi, normal_survival(psi), level, norm);
}

TestReport osq_statistic(const AdjacencyMatrix& a, double level, Normalization norm) {
  require_level(level);
  require_nodes(a, 4, "oSQ statistic");
  const auto est = alpha_hat(a);
  const double q_n = osq_raw(a);
  const double psi = osq_normalize(q_n, a.size(), est.clamped, norm);
  return make_report(StatisticKind::osq, a.size(), est, q_n, psi, normal_survival(psi), level, norm);
}

GlobalTests global_tests(const AdjacencyMatrix& a, double level, Normalization norm) {
  require_level(level);
  require_nodes(a, 4, "PE statistic");
  const auto est = alpha_hat(a);
  const std::size_t n = a.size();
  const double x_n = chi2_raw(a);
  const double psi1 = chi2_normalize(x_n, n, norm);
  const double q_n = osq_raw(a);
  const double psi2 = osq_normalize(q_n, n, est.clamped, norm);
  const double s_n = psi1 * psi1 + psi2 * psi2;
  return {make_report(StatisticKind::chi2, n, est, x_n, psi1, normal_survival(psi1), level, norm),
          make_report(StatisticKind::osq, n, est, q_n, psi2, normal_survival(psi2), level, norm),
          make_report(StatisticKind::pe, n, est, s_n, s_n, chi2_2_survival(s_n), level, norm)};
}

TestReport pe_statistic(const AdjacencyMatrix& a, double level, Normalization norm) {
  return global_tests(a, level, norm).pe;
}

double osq_naive(const AdjacencyMatrix& a) {
  require_nodes(a, 4, "oSQ statistic");
  return signed_cycle_naive(a, 4);
}

double signed_cycle_naive(const AdjacencyMatrix& a, int m) {
  if (m < 3) throw DomainError("signed cycle order must be >= 3");
  require_nodes(a, static_cast<std::size_t>(m), "signed cycle");
  require_guard(a);
  const auto c = center_adjacency(a);
  return DistinctWalker(c.B, static_cast<std::size_t>(m), true).run();
}

double signed_path_naive(const AdjacencyMatrix& a, int m) {
  if (m < 2) throw DomainError("signed path length must be >= 2");
  require_nodes(a, static_cast<std::size_t>(m) + 1, "signed path");
  require_guard(a);
  const auto c = center_adjacency(a);
  return DistinctWalker(c.B, static_cast<std::size_t>(m) + 1, false).run();
}

double signed_cycle(const AdjacencyMatrix& a, int m) {
  if (m < 3) throw DomainError("signed cycle order must be >= 3");
  require_nodes(a, static_cast<std::size_t>(m), "signed cycle");
  if (m == 4) return osq_raw(a);
  if (m == 3) return signed_sums(a).cycle3;
  return signed_cycle_naive(a, m);
}

double signed_path(const AdjacencyMatrix& a, int m) {
  if (m < 2) throw DomainError("signed path length must be >= 2");
  require_nodes(a, static_cast<std::size_t>(m) + 1, "signed path");
  if (m == 2) return signed_sums(a).path2;
  return signed_path_naive(a, m);
}

}  // namespace netgt
