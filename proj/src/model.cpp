#include "netgt/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "netgt/error.hpp"

namespace netgt {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_probability_vector(std::span<const double> v, std::size_t K, const char* what) {
  if (v.size() != K) {
    throw ParameterError(std::string(what) + " has length " + std::to_string(v.size()) +
                         ", expected K = " + std::to_string(K));
  }
  double s = 0.0;
  for (double x : v) {
    if (!(x >= 0.0)) throw ParameterError(std::string(what) + " has a negative entry");
    s += x;
  }
  if (std::abs(s - 1.0) > kStochasticTol) {
    throw ParameterError(std::string(what) + " does not sum to 1");
  }
}

// Strips comments and surrounding whitespace; returns false for blank lines.
bool content_of(std::string& line) {
  const auto hash = line.find('#');
  if (hash != std::string::npos) line.erase(hash);
  const auto first = line.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return false;
  line = line.substr(first, line.find_last_not_of(" \t\r\n") - first + 1);
  return true;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return in;
}

}  // namespace

// --- AdjacencyMatrix --------------------------------------------------------

AdjacencyMatrix::AdjacencyMatrix(std::size_t n)
    : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {}

AdjacencyMatrix AdjacencyMatrix::from_edges(
    std::size_t n, std::span<const std::pair<std::size_t, std::size_t>> edges) {
  AdjacencyMatrix a(n);
  for (auto [i, j] : edges) a.add_edge(i, j);
  return a;
}

AdjacencyMatrix AdjacencyMatrix::from_dense(const Matrix& dense) {
  if (!dense.square()) throw ParameterError("adjacency matrix must be square");
  const std::size_t n = dense.rows();
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (dense(i, i) != 0.0) throw ParameterError("adjacency matrix must be hollow");
    for (std::size_t j = i + 1; j < n; ++j) {
      const double x = dense(i, j);
      if (x != dense(j, i)) throw ParameterError("adjacency matrix must be symmetric");
      if (x != 0.0 && x != 1.0) throw ParameterError("adjacency entries must be 0 or 1");
      if (x == 1.0) a.add_edge(i, j);
    }
  }
  return a;
}

void AdjacencyMatrix::add_edge(std::size_t i, std::size_t j) {
  if (i >= n_ || j >= n_) throw ParameterError("edge endpoint out of range");
  if (i == j) throw ParameterError("self-loops are not allowed");
  bits_[i * words_ + (j >> 6)] |= std::uint64_t{1} << (j & 63);
  bits_[j * words_ + (i >> 6)] |= std::uint64_t{1} << (i & 63);
}

std::size_t AdjacencyMatrix::degree(std::size_t i) const noexcept {
  std::size_t d = 0;
  for (auto w : row_bits(i)) d += static_cast<std::size_t>(std::popcount(w));
  return d;
}

std::vector<std::size_t> AdjacencyMatrix::degrees() const {
  std::vector<std::size_t> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = degree(i);
  return d;
}

std::size_t AdjacencyMatrix::edge_count() const noexcept {
  std::size_t total = 0;
  for (auto w : bits_) total += static_cast<std::size_t>(std::popcount(w));
  return total / 2;
}

AdjacencyMatrix AdjacencyMatrix::permuted(std::span<const std::size_t> perm) const {
  if (perm.size() != n_) throw ParameterError("permutation length mismatch");
  AdjacencyMatrix out(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(perm[i], perm[j])) out.add_edge(i, j);
  return out;
}

Matrix AdjacencyMatrix::to_dense() const {
  Matrix m(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j) ? 1.0 : 0.0;
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> AdjacencyMatrix::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if ((*this)(i, j)) out.emplace_back(i, j);
  return out;
}

// --- parameters -------------------------------------------------------------

void MmsbmParams::validate() const {
  if (K < 1) throw ParameterError("K must be at least 1");
  if (n < 2) throw ParameterError("n must be at least 2");
  if (P.rows() != K || P.cols() != K) throw ParameterError("P must be K x K");
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t b = 0; b < K; ++b) {
      const double x = P(a, b);
      if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("P entries must lie in [0, 1]");
      if (x != P(b, a)) throw ParameterError("P must be symmetric");
    }
  }
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedMembership>) {
          if (m.pi.rows() != n || m.pi.cols() != K) {
            throw ParameterError("membership matrix must be n x K");
          }
          for (std::size_t i = 0; i < n; ++i) check_probability_vector(m.pi.row(i), K, "membership row");
        } else if constexpr (std::is_same_v<T, PureMembership>) {
          check_probability_vector(m.h, K, "h");
        } else {
          if (m.concentration.size() != K) throw ParameterError("Dirichlet concentration must have length K");
          for (double x : m.concentration)
            if (!(x > 0.0) || !std::isfinite(x)) throw ParameterError("Dirichlet concentration must be positive");
        }
      },
      membership);
}

Matrix balanced_memberships(std::size_t n, std::size_t K) {
  if (K == 0) throw ParameterError("K must be at least 1");
  Matrix pi(n, K);
  for (std::size_t i = 0; i < n; ++i) pi(i, i * K / n) = 1.0;
  return pi;
}

std::vector<double> mean_membership(const MmsbmParams& params) {
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedMembership>) {
          std::vector<double> h(m.pi.cols(), 0.0);
          for (std::size_t i = 0; i < m.pi.rows(); ++i)
            for (std::size_t k = 0; k < h.size(); ++k) h[k] += m.pi(i, k);
          for (double& x : h) x /= static_cast<double>(m.pi.rows());
          return h;
        } else if constexpr (std::is_same_v<T, PureMembership>) {
          return m.h;
        } else {
          double s = 0.0;
          for (double x : m.concentration) s += x;
          std::vector<double> h = m.concentration;
          for (double& x : h) x /= s;
          return h;
        }
      },
      params.membership);
}

Matrix membership_second_moment(const MmsbmParams& params) {
  const std::size_t K = params.K;
  return std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        Matrix g(K, K);
        if constexpr (std::is_same_v<T, FixedMembership>) {
          for (std::size_t i = 0; i < m.pi.rows(); ++i)
            for (std::size_t a = 0; a < K; ++a)
              for (std::size_t b = 0; b < K; ++b) g(a, b) += m.pi(i, a) * m.pi(i, b);
          return (1.0 / static_cast<double>(m.pi.rows())) * g;
        } else if constexpr (std::is_same_v<T, PureMembership>) {
          for (std::size_t a = 0; a < K; ++a) g(a, a) = m.h[a];
          return g;
        } else {
          double a0 = 0.0;
          for (double x : m.concentration) a0 += x;
          for (std::size_t a = 0; a < K; ++a)
            for (std::size_t b = 0; b < K; ++b)
              g(a, b) = (m.concentration[a] * m.concentration[b] + (a == b ? m.concentration[a] : 0.0)) /
                        (a0 * (a0 + 1.0));
          return g;
        }
      },
      params.membership);
}

ProbabilityMatrix::ProbabilityMatrix(Matrix values) : values_(std::move(values)) {
  if (!values_.square()) throw ParameterError("probability matrix must be square");
  for (double x : values_.data())
    if (!(x >= 0.0 && x <= 1.0)) throw ParameterError("probability matrix entries must lie in [0, 1]");
  if (values_.asymmetry() > 1e-9) throw ParameterError("probability matrix must be symmetric");
  for (std::size_t i = 0; i < values_.rows(); ++i)
    for (std::size_t j = i + 1; j < values_.cols(); ++j) {
      const double avg = 0.5 * (values_(i, j) + values_(j, i));
      values_(i, j) = avg;
      values_(j, i) = avg;
    }
}

// --- generation -------------------------------------------------------------

Matrix realize_memberships(const MmsbmParams& params, StreamKey key) {
  params.validate();
  const std::size_t n = params.n, K = params.K;
  return std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedMembership>) {
          return m.pi;
        } else if constexpr (std::is_same_v<T, PureMembership>) {
          Matrix pi(n, K);
          for (std::size_t i = 0; i < n; ++i) {
            const double u = uniform_at(key, i);
            double cum = 0.0;
            std::size_t pick = K - 1;
            for (std::size_t k = 0; k < K; ++k) {
              cum += m.h[k];
              if (u < cum && m.h[k] > 0.0) {
                pick = k;
                break;
              }
            }
            while (m.h[pick] == 0.0 && pick > 0) --pick;  // rounding tail
            pi(i, pick) = 1.0;
          }
          return pi;
        } else {
          Matrix pi(n, K);
          for (std::size_t i = 0; i < n; ++i) {
            CounterEngine engine(key.derive(i));
            double total = 0.0;
            while (total <= 0.0) {
              total = 0.0;
              for (std::size_t k = 0; k < K; ++k) {
                std::gamma_distribution<double> gamma(m.concentration[k], 1.0);
                pi(i, k) = gamma(engine);
                total += pi(i, k);
              }
            }
            for (double& x : pi.row(i)) x /= total;
          }
          return pi;
        }
      },
      params.membership);
}

AdjacencyMatrix sample_network(const Matrix& pi, const Matrix& P, StreamKey key) {
  const std::size_t n = pi.rows(), K = pi.cols();
  if (P.rows() != K || P.cols() != K) throw ParameterError("P must be K x K");
  const Matrix pi_p = multiply(pi, P);
  AdjacencyMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto left = pi_p.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = dot(left, pi.row(j));
      if (uniform_at(key, i * n + j) < p) a.add_edge(i, j);
    }
  }
  return a;
}

GeneratedNetwork generate_network_with_memberships(const MmsbmParams& params, StreamKey key) {
  Matrix pi = realize_memberships(params, purpose_key(key, StreamPurpose::memberships));
  AdjacencyMatrix a = sample_network(pi, params.P, purpose_key(key, StreamPurpose::edges));
  return {std::move(a), std::move(pi)};
}

AdjacencyMatrix generate_network(const MmsbmParams& params, std::uint64_t seed) {
  return generate_network_with_memberships(params, StreamKey{seed}).adjacency;
}

ProbabilityMatrix omega_matrix(const MmsbmParams& params, const Matrix& realized_pi) {
  if (realized_pi.cols() != params.K || params.P.rows() != params.K || params.P.cols() != params.K) {
    throw ParameterError("membership / P dimension mismatch");
  }
  for (std::size_t i = 0; i < realized_pi.rows(); ++i)
    check_probability_vector(realized_pi.row(i), params.K, "membership row");
  Matrix omega = multiply(multiply(realized_pi, params.P), realized_pi.transposed());
  // Symmetrize exactly: the two triangles are computed with different rounding.
  for (std::size_t i = 0; i < omega.rows(); ++i)
    for (std::size_t j = i + 1; j < omega.cols(); ++j) omega(j, i) = omega(i, j);
  for (std::size_t i = 0; i < omega.rows(); ++i)
    for (double& x : omega.row(i)) x = std::clamp(x, 0.0, 1.0);
  return ProbabilityMatrix(std::move(omega));
}

Matrix centered_signal_matrix(const ProbabilityMatrix& omega) {
  const std::size_t n = omega.size();
  if (n == 0) throw ParameterError("empty probability matrix");
  const double mean = grand_sum(omega.values()) / (static_cast<double>(n) * static_cast<double>(n));
  Matrix out = omega.values();
  for (std::size_t i = 0; i < n; ++i)
    for (double& x : out.row(i)) x -= mean;
  return out;
}

// --- text formats -----------------------------------------------------------

AdjacencyMatrix read_edge_list(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::size_t n = 0;
  bool have_header = false;
  AdjacencyMatrix a;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_of(line)) continue;
    std::istringstream fields(line);
    if (!have_header) {
      long long value = -1;
      std::string extra;
      if (!(fields >> value) || (fields >> extra) || value < 2) {
        throw ParseError("expected node count n >= 2 on the first line", line_no);
      }
      n = static_cast<std::size_t>(value);
      a = AdjacencyMatrix(n);
      have_header = true;
      continue;
    }
    long long i = -1, j = -1;
    std::string extra;
    if (!(fields >> i >> j) || (fields >> extra)) throw ParseError("expected \"i j\"", line_no);
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= n || static_cast<std::size_t>(j) >= n) {
      throw ParseError("node index out of range [0, " + std::to_string(n) + ")", line_no);
    }
    if (i >= j) throw ParseError("edges must satisfy i < j", line_no);
    if (a(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) {
      throw ParseError("duplicate edge " + std::to_string(i) + " " + std::to_string(j), line_no);
    }
    a.add_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  if (!have_header) throw ParseError("missing node count header", line_no);
  return a;
}

AdjacencyMatrix read_edge_list(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const AdjacencyMatrix& a) {
  out << a.size() << '\n';
  for (auto [i, j] : a.edges()) out << i << ' ' << j << '\n';
}

Matrix read_dense_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!content_of(line)) continue;
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw ParseError("not a number: " + token, line_no);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("ragged matrix row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("empty matrix", line_no);
  return Matrix::from_rows(rows);
}

Matrix read_dense_matrix(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return read_dense_matrix(in);
}

}  // namespace netgt
