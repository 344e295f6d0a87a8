#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "netgt/matrix.hpp"
#include "netgt/rng.hpp"

namespace netgt {

// Symmetric, hollow, binary n x n matrix. Rows are stored as bitsets so that
// common-neighbour counts reduce to AND + popcount.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(std::size_t n);

  static AdjacencyMatrix from_edges(std::size_t n,
                                    std::span<const std::pair<std::size_t, std::size_t>> edges);
  // Validates symmetry, hollowness and binarity.
  static AdjacencyMatrix from_dense(const Matrix& dense);

  std::size_t size() const noexcept { return n_; }
  std::size_t words_per_row() const noexcept { return words_; }

  bool operator()(std::size_t i, std::size_t j) const noexcept {
    return (bits_[i * words_ + (j >> 6)] >> (j & 63)) & 1U;
  }

  // Sets A_ij = A_ji = 1. Throws ParameterError for i == j or out of range.
  void add_edge(std::size_t i, std::size_t j);

  std::span<const std::uint64_t> row_bits(std::size_t i) const noexcept {
    return {bits_.data() + i * words_, words_};
  }

  std::size_t degree(std::size_t i) const noexcept;
  std::vector<std::size_t> degrees() const;
  std::size_t edge_count() const noexcept;

  // Relabel: node i of the result is node perm[i] of this matrix.
  AdjacencyMatrix permuted(std::span<const std::size_t> perm) const;

  Matrix to_dense() const;
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

struct FixedMembership {
  Matrix pi;  // n x K, row-stochastic
};

struct PureMembership {
  std::vector<double> h;  // categorical probabilities
};

struct DirichletMembership {
  std::vector<double> concentration;
};

using MembershipSpec = std::variant<FixedMembership, PureMembership, DirichletMembership>;

struct MmsbmParams {
  std::size_t K = 1;
  Matrix P;
  MembershipSpec membership;
  std::size_t n = 0;

  // Throws ParameterError describing the first violated invariant.
  void validate() const;
};

// n x K membership matrix with community sizes differing by at most one, nodes
// assigned in contiguous blocks.
Matrix balanced_memberships(std::size_t n, std::size_t K);

// Expected membership vector h: row mean for Fixed, h for Pure, a / sum(a) for Dirichlet.
std::vector<double> mean_membership(const MmsbmParams& params);

// G = E[pi pi'] (row average for Fixed, diag(h) for Pure, Dirichlet second moment).
Matrix membership_second_moment(const MmsbmParams& params);

// Symmetric matrix with entries in [0, 1].
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(Matrix values);

  std::size_t size() const noexcept { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  const Matrix& values() const noexcept { return values_; }

 private:
  Matrix values_;
};

struct GeneratedNetwork {
  AdjacencyMatrix adjacency;
  Matrix pi;
};

// Draws memberships per the spec (Fixed is returned as is).
Matrix realize_memberships(const MmsbmParams& params, StreamKey key);

// Upper-triangle Bernoulli(pi_i' P pi_j) draws keyed by edge index i * n + j.
AdjacencyMatrix sample_network(const Matrix& pi, const Matrix& P, StreamKey key);

GeneratedNetwork generate_network_with_memberships(const MmsbmParams& params, StreamKey key);

// Memberships from purpose "memberships", edges from purpose "edges" of StreamKey{seed}.
AdjacencyMatrix generate_network(const MmsbmParams& params, std::uint64_t seed);

// Omega = Pi P Pi'.
ProbabilityMatrix omega_matrix(const MmsbmParams& params, const Matrix& realized_pi);

// Omega - mean(Omega) * 11'.
Matrix centered_signal_matrix(const ProbabilityMatrix& omega);

// Edge-list text format: first line n, then one "i j" pair per line, 0-based,
// i < j; '#' lines are comments. Duplicates and self-loops are parse errors.
AdjacencyMatrix read_edge_list(std::istream& in);
AdjacencyMatrix read_edge_list(const std::filesystem::path& path);
void write_edge_list(std::ostream& out, const AdjacencyMatrix& a);

// Whitespace-separated dense matrix, one row per line, '#' comments.
Matrix read_dense_matrix(std::istream& in);
Matrix read_dense_matrix(const std::filesystem::path& path);

}  // namespace netgt
