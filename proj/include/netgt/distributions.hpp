#pragma once

namespace netgt {

enum class TailSide { upper, lower };

struct TailProbability {
  double value;
  TailSide side;
};

// Standard normal CDF, via erfc. Throws DomainError for non-finite x.
double normal_cdf(double x);

// 1 - Phi(x), computed without cancellation in the upper tail.
double normal_survival(double x);

TailProbability normal_tail(double x, TailSide side);

// Inverse of normal_cdf on (0, 1): rational approximation plus one Halley step.
double normal_quantile(double p);

// Chi-squared with two degrees of freedom: S(x) = exp(-x / 2).
double chi2_2_survival(double x);
double chi2_2_cdf(double x);

// x with chi2_2_cdf(x) = p, i.e. -2 log(1 - p).
double chi2_2_quantile(double p);

}  // namespace netgt
