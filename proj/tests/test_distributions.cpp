#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "netgt/distributions.hpp"
#include "netgt/error.hpp"

using namespace netgt;

namespace {

// Composite Simpson on the density from 0 to x, plus 1/2: an independent route to Phi.
double phi_by_quadrature(double x) {
  const int steps = 20000;
  const double h = x / steps;
  auto f = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
  double s = f(0.0) + f(x);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return 0.5 + s * h / 3.0;
}

}  // namespace

TEST_CASE("normal cdf: symmetry and center") {
  CHECK(normal_cdf(0.0) == 0.5);
  for (double x : {0.5, 1.0, 2.0, 5.0}) CHECK(std::abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-12);
}

TEST_CASE("normal cdf agrees with quadrature of the density") {
  for (double x : {-4.0, -1.7, -0.3, 0.25, 1.0, 1.959963985, 3.3, 6.0})
    CHECK(std::abs(normal_cdf(x) - phi_by_quadrature(x)) <= 1e-12);
  CHECK(std::abs(normal_cdf(1.959963985) - 0.975) <= 1e-9);
}

TEST_CASE("normal survival keeps relative accuracy in the upper tail") {
  // Mills ratio bound: phi(x)/x (1 - 1/x^2) < S(x) < phi(x)/x
  const double x = 12.0;
  const double dens = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  CHECK(normal_survival(x) < dens / x);
  CHECK(normal_survival(x) > dens / x * (1.0 - 1.0 / (x * x)));
  CHECK(normal_tail(1.0, TailSide::lower).value == normal_cdf(1.0));
  CHECK(normal_tail(1.0, TailSide::upper).value == normal_survival(1.0));
}

TEST_CASE("normal quantile round trip") {
  CHECK(std::abs(normal_quantile(0.5)) <= 1e-12);
  for (double p : {1e-12, 1e-6, 0.01, 0.02425, 0.05, 0.3, 0.5, 0.7, 0.95, 0.97575, 0.99, 1 - 1e-9})
    CHECK(std::abs(normal_cdf(normal_quantile(p)) - p) <= 1e-10);
  CHECK(normal_quantile(0.95) == doctest::Approx(1.6449).epsilon(1e-3 / 1.6449));
}

TEST_CASE("normal functions are monotone on a grid") {
  double prev = -1.0;
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double v = normal_cdf(x);
    if (x < 7.0) CHECK(v > prev);
    else CHECK(v >= prev);  // within a few ulps of 1 here
    prev = v;
  }
  double prev_q = -std::numeric_limits<double>::infinity();
  for (double p = 0.001; p < 1.0; p += 0.001) {
    const double q = normal_quantile(p);
    CHECK(q > prev_q);
    prev_q = q;
  }
}

TEST_CASE("chi-squared with two degrees of freedom") {
  CHECK(chi2_2_survival(0.0) == 1.0);
  CHECK(chi2_2_quantile(0.95) == doctest::Approx(-2.0 * std::log(0.05)).epsilon(1e-15));
  CHECK(chi2_2_quantile(0.95) == doctest::Approx(5.9915).epsilon(1e-4));
  for (double p : {0.9, 0.95, 0.99}) CHECK(std::abs(chi2_2_survival(chi2_2_quantile(p)) - (1.0 - p)) <= 1e-14);
  CHECK(chi2_2_cdf(3.0) + chi2_2_survival(3.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(normal_cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
  CHECK_THROWS_AS(normal_cdf(std::numeric_limits<double>::infinity()), DomainError);
  CHECK_THROWS_AS(normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(chi2_2_survival(-1.0), DomainError);
  CHECK_THROWS_AS(chi2_2_quantile(1.0), DomainError);
}
