#include "netgt/distributions.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "netgt/error.hpp"

namespace netgt {

namespace {

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) throw DomainError(std::string(fn) + ": argument must be finite");
}

void require_open_unit(double p, const char* fn) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(fn) + ": probability must lie in (0, 1)");
}

// Acklam's rational approximation to the normal quantile (relative error
// about 1.15e-9 before refinement).
double acklam_quantile(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_cdf(double x) {
  require_finite(x, "normal_cdf");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double normal_survival(double x) {
  require_finite(x, "normal_survival");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

TailProbability normal_tail(double x, TailSide side) {
  return {side == TailSide::upper ? normal_survival(x) : normal_cdf(x), side};
}

double normal_quantile(double p) {
  require_open_unit(p, "normal_quantile");
  double x = acklam_quantile(p);
  // Halley refinement against the erfc-based CDF; work in the smaller tail.
  const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_survival(x);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double chi2_2_survival(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("chi2_2_survival: argument must be >= 0");
  return std::exp(-0.5 * x);
}

double chi2_2_cdf(double x) {
  if (std::isnan(x) || x < 0.0) throw DomainError("chi2_2_cdf: argument must be >= 0");
  return -std::expm1(-0.5 * x);
}

double chi2_2_quantile(double p) {
  require_open_unit(p, "chi2_2_quantile");
  return -2.0 * std::log1p(-p);
}

}  // namespace netgt
