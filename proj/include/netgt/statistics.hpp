#pragma once

#include <cstddef>
#include <string>

#include "netgt/matrix.hpp"
#include "netgt/model.hpp"

namespace netgt {

// Edge density with the boundary clamp applied: an empty graph uses
// 2 / (n(n-1)), a complete graph (n(n-1) - 2) / (n(n-1)).
struct EdgeDensityEstimate {
  double raw = 0.0;
  double clamped = 0.0;
  bool was_clamped = false;
};

EdgeDensityEstimate alpha_hat(const AdjacencyMatrix& a);

// B = A - alpha (11' - I): symmetric, hollow, off-diagonals in {-alpha, 1 - alpha}.
struct CenteredAdjacency {
  double alpha = 0.0;
  Matrix B;

  std::size_t size() const noexcept { return B.rows(); }
};

CenteredAdjacency center_adjacency(const AdjacencyMatrix& a, double alpha);
CenteredAdjacency center_adjacency(const AdjacencyMatrix& a);  // uses the clamped alpha_hat

enum class StatisticKind { chi2, osq, pe, signed_cycle, signed_path };

// Null standardization of X_n and Q_n.
//   finite_sample: finite-n null moments at alpha-hat,
//     psi1 = ((n - 1)(X_n - n) + 2(n - 2)) / sqrt(2n(n - 1)(n - 2)),
//     psi2 = Q_n / (2 sqrt(2n(n - 1)(n - 2)(n - 3)) alpha^2 (1 - alpha)^2).
//   asymptotic: the limits (X_n - n) / sqrt(2n) and Q_n / (2 sqrt(2) n^2 alpha^2),
//     which agree with the above only as n alpha -> inf and alpha -> 0.
enum class Normalization { finite_sample, asymptotic };

struct TestReport {
  StatisticKind kind = StatisticKind::chi2;
  int order = 0;  // m for signed_cycle / signed_path
  double raw = 0.0;
  double normalized = 0.0;
  double p_value = 1.0;
  double level = 0.05;
  bool reject = false;
  Normalization normalization = Normalization::finite_sample;
  std::size_t n = 0;
  EdgeDensityEstimate alpha_hat;

  // "chi2", "osq", "pe", "signed_cycle(3)", ...
  std::string statistic_name() const;
};

// Distinct-index signed sums on the centered adjacency, evaluated in one pass
// over node pairs with bitset common-neighbour counts: O(n^3 / 64).
struct SignedSums {
  double path2 = 0.0;   // V^(2): sum over distinct (i, j, k) of b_ij b_jk
  double cycle3 = 0.0;  // U^(3) = tr(B^3)
  double cycle4 = 0.0;  // U^(4) = Q_n
};

SignedSums signed_sums(const AdjacencyMatrix& a, double alpha);

// The same sums at the clamped alpha-hat. alpha-hat is rational, so the sums are
// evaluated exactly while the integer intermediates fit in 128 bits (exact
// zeros come out as 0.0); larger inputs fall back to long double.
SignedSums signed_sums(const AdjacencyMatrix& a);

// The same three sums from dense matrix products on B (independent route).
SignedSums signed_sums_dense(const CenteredAdjacency& centered);

// Degree-variance statistic X_n, upper tail. Requires n >= 3.
TestReport chi2_statistic(const AdjacencyMatrix& a, double level = 0.05,
                          Normalization norm = Normalization::finite_sample);

// Signed quadrilateral Q_n, upper tail. Requires n >= 4.
TestReport osq_statistic(const AdjacencyMatrix& a, double level = 0.05,
                         Normalization norm = Normalization::finite_sample);

// S_n = psi1^2 + psi2^2; p-value exp(-S_n / 2).
TestReport pe_statistic(const AdjacencyMatrix& a, double level = 0.05,
                        Normalization norm = Normalization::finite_sample);

struct GlobalTests {
  TestReport chi2;
  TestReport osq;
  TestReport pe;
};

// All three reports from a single kernel pass.
GlobalTests global_tests(const AdjacencyMatrix& a, double level = 0.05,
                         Normalization norm = Normalization::finite_sample);

// Largest n the exhaustive oracles accept.
inline constexpr std::size_t kNaiveGuard = 14;

// Literal sum over ordered distinct 4-tuples. Guarded to n <= 14.
double osq_naive(const AdjacencyMatrix& a);

// U^(m): m = 3 and 4 use trace identities, m >= 5 the exhaustive sum.
double signed_cycle(const AdjacencyMatrix& a, int m);

// V^(m): m = 2 uses 1'B^2 1 - tr(B^2), m >= 3 the exhaustive sum.
double signed_path(const AdjacencyMatrix& a, int m);

// Exhaustive versions of both families (all m), guarded to n <= 14.
double signed_cycle_naive(const AdjacencyMatrix& a, int m);
double signed_path_naive(const AdjacencyMatrix& a, int m);

}  // namespace netgt
