#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "netgt/matrix.hpp"
#include "netgt/model.hpp"

namespace netgt {

struct HullDistance {
  double distance = 0.0;
  double duality_gap = 0.0;  // ||y||^2 - min_i <y, q_i> at the returned point y
  std::vector<double> weights;
};

// Euclidean distance from `point` to the convex hull of `others` by Wolfe's
// minimum-norm-point method on the shifted set {others_i - point}.
HullDistance hull_distance(std::span<const double> point, const std::vector<std::vector<double>>& others);

double min_distance_to_hull(std::span<const double> point, const std::vector<std::vector<double>>& others);

struct IncResult {
  std::size_t rank = 0;
  std::vector<double> eigenvalues;  // the retained ones, descending |lambda|
  Matrix embedding;                 // n x rank
  std::size_t vertex_count = 0;
  std::vector<std::size_t> vertex_indices;     // representative node per vertex
  std::vector<std::size_t> ambiguous_indices;  // hull distance in (hull_tol, 10 hull_tol]
  std::size_t distinct_rows = 0;
  double rank_tol = 0.0;
  double hull_tol = 0.0;
};

// Intrinsic number of communities: the number of vertices of the convex hull
// of the rows of the eigenvectors of Omega for nonzero eigenvalues.
// rank_tol defaults to 1e-8 * ||Omega||, hull_tol to 1e-8.
IncResult intrinsic_num_communities(const ProbabilityMatrix& omega,
                                    std::optional<double> rank_tol = std::nullopt,
                                    double hull_tol = 1e-8);

}  // namespace netgt
