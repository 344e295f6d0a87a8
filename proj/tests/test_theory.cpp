#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netgt/error.hpp"
#include "netgt/theory.hpp"

using namespace netgt;

namespace {

Matrix sym2(double a, double b, double d) { return Matrix::from_rows({{a, b}, {b, d}}); }

// delta_n recomputed with plain loops.
double delta_by_hand(const Matrix& P, const std::vector<double>& h, double n) {
  const std::size_t K = h.size();
  std::vector<double> ph(K, 0.0);
  double alpha0 = 0.0;
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) ph[a] += P(a, b) * h[b];
    alpha0 += h[a] * ph[a];
  }
  double gap = 0.0;
  for (double x : ph) gap += (x - alpha0) * (x - alpha0);
  return std::pow(n, 1.5) * gap / alpha0;
}

// Remark-4 ratios with explicit loops, no library matrix products.
std::pair<double, double> snr_by_hand(const Matrix& omega) {
  const std::size_t n = omega.rows();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) mean += omega(i, j);
  mean /= static_cast<double>(n * n);
  std::vector<std::vector<double>> c(n, std::vector<double>(n)), h(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      c[i][j] = omega(i, j) - mean;
      h[i][j] = omega(i, j) * (1.0 - omega(i, j));
    }
  auto square = [n](const std::vector<std::vector<double>>& m) {
    std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) out[i][j] += m[i][k] * m[k][j];
    return out;
  };
  auto c2 = square(c), h2 = square(h);
  auto c4 = square(c2), h4 = square(h2);
  double num1 = 0.0, den1 = 0.0, tr_c4 = 0.0, tr_h4 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      num1 += c2[i][j];
      den1 += h2[i][j];
    }
    tr_c4 += c4[i][i];
    tr_h4 += h4[i][i];
  }
  return {num1 / std::sqrt(2.0 * den1), tr_c4 / std::sqrt(8.0 * tr_h4)};
}

}  // namespace

TEST_CASE("two-block symmetric model: alpha0, M, tau") {
  const std::vector<double> h{0.5, 0.5};
  const auto r = theory_report(sym2(0.2, 0.05, 0.2), h, 300);
  CHECK(r.alpha0 == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(r.M(0, 0) == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(r.M(0, 1) == doctest::Approx(-0.075).epsilon(1e-14));
  CHECK(r.tau_n == doctest::Approx(2916.0).epsilon(1e-12));
  CHECK(std::abs(r.delta_n) <= 1e-12);
  CHECK(r.beta_n == std::max(r.delta_n, r.tau_n));
}

TEST_CASE("Example 1 case S has zero chi2 signal across a grid") {
  for (double a = 0.05; a <= 0.5 + 1e-9; a += 0.05)
    for (double b = 0.05; b <= 0.5 + 1e-9; b += 0.05) {
      const auto s = preset_scenario("example1_S", {{"a", a}, {"b", b}});
      CHECK(std::abs(s.theory.delta_n) <= 1e-12);
      CHECK(s.theory.alpha0 == doctest::Approx((a + b) / 2.0).epsilon(1e-13));
      CHECK(s.theory.beta_n == std::max(s.theory.delta_n, s.theory.tau_n));
    }
}

TEST_CASE("rank-one example: closed-form alpha0") {
  const auto s = preset_scenario("example2_rank1", {{"a", 2.0}, {"b", 1.0}, {"c", 0.5}});
  const double a = 2.0, b = 1.0, c = 0.5;
  const double closed = c * (a + b) * (a + b) / (4.0 * (a * a + b * b));
  CHECK(closed == doctest::Approx(0.225).epsilon(1e-15));
  CHECK(std::abs(s.theory.alpha0 - closed) <= 1e-12);

  const auto flat = preset_scenario("example2_rank1", {{"a", 1.0}, {"b", 1.0}});
  CHECK(std::abs(flat.theory.delta_n) <= 1e-12);
  CHECK(std::abs(flat.theory.tau_n) <= 1e-12);
}

TEST_CASE("null-compatible P has no signal") {
  for (double alpha : {0.05, 0.3, 0.9}) {
    const auto r = theory_report(Matrix(3, 3, alpha), std::vector<double>{0.2, 0.3, 0.5}, 100);
    CHECK(std::abs(r.delta_n) <= 1e-12);
    CHECK(std::abs(r.tau_n) <= 1e-12);
    CHECK(std::abs(r.beta_n) <= 1e-12);
  }
}

TEST_CASE("h'Mh vanishes and delta is permutation invariant") {
  const Matrix P = Matrix::from_rows({{0.3, 0.1, 0.05}, {0.1, 0.2, 0.15}, {0.05, 0.15, 0.4}});
  const std::vector<double> h{0.2, 0.5, 0.3};
  const auto r = theory_report(P, h, 400);
  double hmh = 0.0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) hmh += h[a] * r.M(a, b) * h[b];
  CHECK(std::abs(hmh) <= 1e-12);
  CHECK(r.delta_n == doctest::Approx(delta_by_hand(P, h, 400.0)).epsilon(1e-12));

  const std::vector<std::size_t> perm{2, 0, 1};
  Matrix P2(3, 3);
  std::vector<double> h2(3);
  for (std::size_t a = 0; a < 3; ++a) {
    h2[a] = h[perm[a]];
    for (std::size_t b = 0; b < 3; ++b) P2(a, b) = P(perm[a], perm[b]);
  }
  const auto r2 = theory_report(P2, h2, 400);
  CHECK(r2.delta_n == doctest::Approx(r.delta_n).epsilon(1e-12));
  CHECK(r2.tau_n == doctest::Approx(r.tau_n).epsilon(1e-12));
}

TEST_CASE("asymmetric two-community presets match a direct delta evaluation") {
  for (const char* name : {"example1_AS1", "example1_AS2", "example1_AS3"}) {
    const auto s = preset_scenario(name);
    const double direct = delta_by_hand(s.params.P, s.theory.h, static_cast<double>(s.params.n));
    CHECK(s.theory.delta_n == doctest::Approx(direct).epsilon(1e-12));
    CHECK(s.theory.delta_n > 0.0);
  }
}

TEST_CASE("regularity diagnostics are warnings") {
  const auto balanced = theory_report(sym2(0.2, 0.05, 0.2), std::vector<double>{0.5, 0.5}, 300);
  CHECK(balanced.diagnostics.warnings.empty());
  CHECK(balanced.diagnostics.h_ratio == 1.0);
  CHECK(balanced.diagnostics.g_inverse_norm == doctest::Approx(2.0));

  const auto skewed = theory_report(sym2(0.2, 0.05, 0.2), std::vector<double>{0.02, 0.98}, 5);
  CHECK(skewed.diagnostics.h_ratio == doctest::Approx(49.0));
  CHECK(skewed.diagnostics.warnings.size() >= 2);
}

TEST_CASE("theory input validation") {
  CHECK_THROWS_AS(theory_report(sym2(0.2, 0.05, 0.2), std::vector<double>{0.6, 0.6}, 10), ParameterError);
  CHECK_THROWS_AS(theory_report(Matrix::from_rows({{0.2, 0.1}, {0.0, 0.2}}), std::vector<double>{0.5, 0.5}, 10),
                  ParameterError);
  CHECK_THROWS_AS(theory_report(sym2(0.2, 0.05, 0.2), std::vector<double>{0.5, 0.5}, 1), ParameterError);
  CHECK_THROWS_AS(theory_report(Matrix(2, 2, 0.0), std::vector<double>{0.5, 0.5}, 10), DegenerateError);
}

TEST_CASE("exact finite-n SNR") {
  const auto flat = exact_snr(ProbabilityMatrix(Matrix(6, 6, 0.3)));
  CHECK(std::abs(flat.snr_chi2) <= 1e-20);
  CHECK(std::abs(flat.snr_osq) <= 1e-20);

  // n = 4, two pure communities of two nodes.
  const Matrix pi = Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
  const MmsbmParams p{2, sym2(0.2, 0.05, 0.2), FixedMembership{pi}, 4};
  const auto omega = omega_matrix(p, pi);
  const auto r = exact_snr(omega);
  const auto [chi2, osq] = snr_by_hand(omega.values());
  CHECK(r.snr_chi2 == doctest::Approx(chi2).epsilon(1e-12));
  CHECK(r.snr_osq == doctest::Approx(osq).epsilon(1e-12));
  CHECK(r.snr_osq > 0.0);

  // Unequal sizes give chi2 signal; permuting nodes changes nothing.
  const Matrix pi2 = Matrix::from_rows({{1, 0}, {0, 1}, {0, 1}, {0, 1}, {0.5, 0.5}});
  const auto o2 = omega_matrix({2, sym2(0.3, 0.05, 0.1), FixedMembership{pi2}, 5}, pi2);
  Matrix shuffled(5, 5);
  const std::size_t perm[] = {4, 2, 0, 3, 1};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) shuffled(i, j) = o2(perm[i], perm[j]);
  const auto a = exact_snr(o2), b = exact_snr(ProbabilityMatrix(shuffled));
  CHECK(a.snr_chi2 == doctest::Approx(b.snr_chi2).epsilon(1e-9));
  CHECK(a.snr_osq == doctest::Approx(b.snr_osq).epsilon(1e-9));
  const auto [c2, q2] = snr_by_hand(o2.values());
  CHECK(a.snr_chi2 == doctest::Approx(c2).epsilon(1e-12));
  CHECK(a.snr_osq == doctest::Approx(q2).epsilon(1e-12));

  CHECK_THROWS_AS(exact_snr(ProbabilityMatrix(Matrix::from_rows({{0, 1}, {1, 0}}))), DegenerateError);
}

TEST_CASE("presets") {
  const auto names = preset_names();
  CHECK(names.size() == 16);
  for (const auto& name : names) {
    const auto s = preset_scenario(name);
    CHECK(s.name == name);
    CHECK(s.theory.beta_n == std::max(s.theory.delta_n, s.theory.tau_n));
    CHECK_NOTHROW(s.params.validate());
  }
  CHECK_THROWS_AS(preset_scenario("nope"), ParameterError);
  CHECK_THROWS_AS(preset_scenario("er", {{"beta", 1.0}}), ParameterError);
  CHECK_THROWS_AS(preset_scenario("er", {{"alpha", 1.5}}), ParameterError);
  CHECK_THROWS_AS(preset_scenario("er", {{"n", 10.5}}), ParameterError);
  CHECK_THROWS_AS(preset_scenario("exp4_asymmetric", {{"b_hi", 1.2}}), ParameterError);

  const auto e22 = preset_scenario("exp2_2", {{"n", 256}});
  CHECK(e22.knobs.at("a") == doctest::Approx(1.0 + 0.25).epsilon(1e-15));
  const auto r1 = preset_scenario("exp4_rank1", {{"n", 400}});
  CHECK(r1.knobs.at("a") == doctest::Approx(1.05).epsilon(1e-15));
  // P = c eta eta' with eta normalized: the trace is c.
  CHECK(trace(e22.params.P) == doctest::Approx(0.2).epsilon(1e-14));
  const auto e31 = preset_scenario("exp3_1", {{"n", 10}});
  CHECK(e31.params.K == 5);
}

TEST_CASE("random off-diagonal draws stay in range and are reproducible") {
  const auto s = preset_scenario("exp4_asymmetric");
  CHECK(s.params.P(0, 1) == doctest::Approx(0.15));
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto p = s.draw_params(StreamKey{k});
    CHECK(p.P(0, 1) >= 0.125);
    CHECK(p.P(0, 1) <= 0.175);
    CHECK(p.P(0, 1) == p.P(1, 0));
    CHECK(p.P(0, 0) == 0.2);
    CHECK(p.P == s.draw_params(StreamKey{k}).P);
  }
}
