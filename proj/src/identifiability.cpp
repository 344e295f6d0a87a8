#include "netgt/identifiability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "netgt/error.hpp"

namespace netgt {

namespace {

constexpr int kMaxWolfeIterations = 10000;

// Affine minimizer over the active set: minimize ||sum v_i q_i|| subject to
// sum v_i = 1, via the bordered Gram system.
std::optional<std::vector<double>> affine_minimizer(const std::vector<std::vector<double>>& q,
                                                    const std::vector<std::size_t>& active) {
  const std::size_t m = active.size();
  Matrix system(m + 1, m + 1);
  std::vector<double> rhs(m + 1, 0.0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) system(a, b) = dot(q[active[a]], q[active[b]]);
    system(a, m) = 1.0;
    system(m, a) = 1.0;
  }
  rhs[m] = 1.0;
  try {
    auto sol = solve_linear(std::move(system), std::move(rhs), 1e-13);
    sol.pop_back();
    return sol;
  } catch (const ParameterError&) {
    return std::nullopt;
  }
}

std::vector<double> combine(const std::vector<std::vector<double>>& q,
                            const std::vector<std::size_t>& active, const std::vector<double>& w) {
  std::vector<double> x(q.front().size(), 0.0);
  for (std::size_t a = 0; a < active.size(); ++a)
    for (std::size_t d = 0; d < x.size(); ++d) x[d] += w[a] * q[active[a]][d];
  return x;
}

}  // namespace

HullDistance hull_distance(std::span<const double> point, const std::vector<std::vector<double>>& others) {
  if (others.empty()) throw ParameterError("hull of an empty point set");
  const std::size_t dim = point.size();
  std::vector<std::vector<double>> q(others.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < others.size(); ++i) {
    if (others[i].size() != dim) throw ParameterError("hull point dimension mismatch");
    q[i].resize(dim);
    for (std::size_t d = 0; d < dim; ++d) q[i][d] = others[i][d] - point[d];
    scale = std::max(scale, dot(q[i], q[i]));
  }
  const double gap_tol = 1e-13 * std::max(scale, 1e-300);

  std::size_t start = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (dot(q[i], q[i]) < dot(q[start], q[start])) start = i;
  std::vector<std::size_t> active{start};
  std::vector<double> w{1.0};
  std::vector<double> x = q[start];
  double gap = 0.0;

  for (int iter = 0; iter < kMaxWolfeIterations; ++iter) {
    const double xx = dot(x, x);
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double v = dot(x, q[i]);
      if (v < best_val) {
        best_val = v;
        best = i;
      }
    }
    gap = xx - best_val;
    if (gap <= gap_tol || xx <= 1e-30 * std::max(scale, 1e-300)) break;
    if (std::find(active.begin(), active.end(), best) != active.end()) break;
    active.push_back(best);
    w.push_back(0.0);

    bool stalled = false;
    for (;;) {
      const auto v = affine_minimizer(q, active);
      if (!v) {
        // Affinely dependent set: drop the newcomer and stop improving.
        active.pop_back();
        w.pop_back();
        stalled = true;
        break;
      }
      if (std::all_of(v->begin(), v->end(), [](double t) { return t > 1e-15; })) {
        w = *v;
        break;
      }
      double theta = 1.0;
      for (std::size_t a = 0; a < active.size(); ++a)
        if ((*v)[a] <= 1e-15) theta = std::min(theta, w[a] / (w[a] - (*v)[a]));
      for (std::size_t a = 0; a < active.size(); ++a) w[a] += theta * ((*v)[a] - w[a]);
      std::vector<std::size_t> kept;
      std::vector<double> kept_w;
      for (std::size_t a = 0; a < active.size(); ++a) {
        if (w[a] > 1e-15) {
          kept.push_back(active[a]);
          kept_w.push_back(w[a]);
        }
      }
      if (kept.empty()) {  // numerical corner; keep the heaviest
        kept.push_back(active.back());
        kept_w.push_back(1.0);
      }
      double total = 0.0;
      for (double t : kept_w) total += t;
      for (double& t : kept_w) t /= total;
      active = std::move(kept);
      w = std::move(kept_w);
    }
    x = combine(q, active, w);
    if (stalled) {
      double bv = std::numeric_limits<double>::infinity();
      for (const auto& qi : q) bv = std::min(bv, dot(x, qi));
      gap = dot(x, x) - bv;
      break;
    }
  }

  HullDistance out;
  out.distance = norm(x);
  out.duality_gap = std::max(0.0, gap);
  out.weights.assign(others.size(), 0.0);
  for (std::size_t a = 0; a < active.size(); ++a) out.weights[active[a]] = w[a];
  return out;
}

double min_distance_to_hull(std::span<const double> point, const std::vector<std::vector<double>>& others) {
  return hull_distance(point, others).distance;
}

IncResult intrinsic_num_communities(const ProbabilityMatrix& omega, std::optional<double> rank_tol,
                                    double hull_tol) {
  const std::size_t n = omega.size();
  if (!(hull_tol > 0.0)) throw ParameterError("hull tolerance must be positive");
  const auto eig = symmetric_eigen(omega.values());
  const double spectral = n == 0 ? 0.0 : std::abs(eig.values.front());
  if (spectral == 0.0) throw DegenerateError("Omega is the zero matrix");

  IncResult r;
  r.rank_tol = rank_tol.value_or(1e-8 * spectral);
  r.hull_tol = hull_tol;
  if (!(r.rank_tol > 0.0)) throw ParameterError("rank tolerance must be positive");
  for (double v : eig.values)
    if (std::abs(v) > r.rank_tol) ++r.rank;
  if (r.rank == 0) throw DegenerateError("Omega has numerical rank 0");

  r.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(r.rank));
  r.embedding = Matrix(n, r.rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < r.rank; ++k) r.embedding(i, k) = eig.vectors(i, k);

  // Collapse rows that coincide within hull_tol; keep the first node as representative.
  std::vector<std::vector<double>> reps;
  std::vector<std::size_t> rep_node;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(r.embedding.row(i).begin(), r.embedding.row(i).end());
    const bool seen = std::any_of(reps.begin(), reps.end(), [&](const std::vector<double>& p) {
      double s = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) s += (row[k] - p[k]) * (row[k] - p[k]);
      return std::sqrt(s) <= hull_tol;
    });
    if (!seen) {
      reps.push_back(std::move(row));
      rep_node.push_back(i);
    }
  }
  r.distinct_rows = reps.size();

  if (reps.size() == 1) {
    r.vertex_count = 1;
    r.vertex_indices = {rep_node.front()};
    return r;
  }
  for (std::size_t p = 0; p < reps.size(); ++p) {
    std::vector<std::vector<double>> others;
    others.reserve(reps.size() - 1);
    for (std::size_t o = 0; o < reps.size(); ++o)
      if (o != p) others.push_back(reps[o]);
    const double d = min_distance_to_hull(reps[p], others);
    if (d > hull_tol) {
      r.vertex_indices.push_back(rep_node[p]);
      if (d <= 10.0 * hull_tol) r.ambiguous_indices.push_back(rep_node[p]);
    }
  }
  r.vertex_count = r.vertex_indices.size();
  return r;
}

}  // namespace netgt
