#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netgt/matrix.hpp"
#include "netgt/model.hpp"
#include "netgt/rng.hpp"

namespace netgt {

// Thresholds for the balance / sparsity regularity checks. Violations are
// reported as warnings; nothing is refused.
struct RegularityThresholds {
  double balance_bound = 10.0;  // C: max h / min h <= C and ||G^-1|| <= C
  double sparsity_bound = 0.5;  // c: alpha0 <= c and n alpha0 >= 1 / c
};

struct RegularityDiagnostics {
  double h_ratio = 0.0;         // max_k h_k / min_k h_k (inf if some h_k == 0)
  double g_inverse_norm = 0.0;  // ||G^-1|| (inf if G singular)
  double alpha0 = 0.0;
  double n_alpha0 = 0.0;
  std::vector<std::string> warnings;
};

struct TheoryReport {
  double alpha0 = 0.0;  // h'Ph
  Matrix M;             // P - alpha0 11'
  std::vector<double> h;
  Matrix G;  // n^-1 sum pi_i pi_i'
  double delta_n = 0.0;
  double tau_n = 0.0;
  double beta_n = 0.0;
  std::size_t n = 0;
  RegularityDiagnostics diagnostics;
};

// delta_n = n^{3/2} ||Ph - alpha0 1||^2 / alpha0, tau_n = n^2 ||M||^4 / alpha0^2
// (spectral norm), beta_n = max of the two. When G is not supplied it is taken
// as diag(h), the pure-membership value.
TheoryReport theory_report(const Matrix& P, std::span<const double> h, std::size_t n,
                           std::optional<Matrix> G = std::nullopt,
                           const RegularityThresholds& thresholds = {});

// Uses mean_membership / membership_second_moment of the parameters.
TheoryReport theory_report(const MmsbmParams& params, const RegularityThresholds& thresholds = {});

struct ExactSnrReport {
  double snr_chi2 = 0.0;
  double snr_osq = 0.0;
  double chi2_numerator = 0.0;    // 1' Omega~^2 1
  double chi2_denominator = 0.0;  // sqrt(2 * 1' H^2 1), H = Omega o (1 - Omega)
  double osq_numerator = 0.0;     // tr(Omega~^4)
  double osq_denominator = 0.0;   // sqrt(8 tr(H^4))
};

// Finite-n signal-to-noise ratios on a concrete Omega. Throws DegenerateError
// when every entry of Omega is 0 or 1.
ExactSnrReport exact_snr(const ProbabilityMatrix& omega);

using Knobs = std::map<std::string, double>;

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct PresetScenario {
  std::string name;
  Knobs knobs;  // every knob resolved, defaults filled in
  MmsbmParams params;
  // When set, every off-diagonal entry of P is redrawn per replication from
  // Uniform[lo, hi]; params and theory use the midpoint.
  std::optional<UniformRange> random_offdiagonal;
  TheoryReport theory;

  // Parameters for one replication (draws the off-diagonal when random).
  MmsbmParams draw_params(StreamKey key) const;
};

std::vector<std::string> preset_names();

// Knob names accepted by a preset (n is always accepted).
std::vector<std::string> preset_knobs(const std::string& name);

// Builds the named scenario; unspecified knobs take their defaults. Throws
// ParameterError for unknown names or knobs, or when some pi_i' P pi_j > 1.
PresetScenario preset_scenario(const std::string& name, const Knobs& knobs = {});

}  // namespace netgt
