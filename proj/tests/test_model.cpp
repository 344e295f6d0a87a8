#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "netgt/error.hpp"
#include "netgt/model.hpp"

using namespace netgt;

namespace {

void check_invariants(const AdjacencyMatrix& a) {
  const std::size_t n = a.size();
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE_FALSE(a(i, i));
    for (std::size_t j = 0; j < n; ++j) {
      REQUIRE(a(i, j) == a(j, i));
      ones += a(i, j) ? 1 : 0;
    }
  }
  REQUIRE(ones == 2 * a.edge_count());
  // No stray bits past column n.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t bits = 0;
    for (auto w : a.row_bits(i)) bits += static_cast<std::size_t>(std::popcount(w));
    REQUIRE(bits == a.degree(i));
  }
}

MmsbmParams two_block_pure(std::size_t n) {
  return {2, Matrix::from_rows({{0.2, 0.05}, {0.05, 0.2}}), PureMembership{{0.5, 0.5}}, n};
}

// Example 3: P = (H eta)(H eta)', four communities collapsing to two.
Matrix example3_P() {
  return (0.01) * Matrix::from_rows({{1, 2, 1.8, 3}, {2, 4, 3.6, 6}, {1.8, 3.6, 3.24, 5.4}, {3, 6, 5.4, 9}});
}

}  // namespace

TEST_CASE("adjacency construction and validation") {
  AdjacencyMatrix a(70);
  a.add_edge(0, 69);
  a.add_edge(3, 64);
  CHECK(a(69, 0));
  CHECK(a(64, 3));
  CHECK(a.edge_count() == 2);
  CHECK(a.degree(0) == 1);
  CHECK_THROWS_AS(a.add_edge(4, 4), ParameterError);
  CHECK_THROWS_AS(a.add_edge(4, 70), ParameterError);
  check_invariants(a);

  Matrix d = a.to_dense();
  CHECK(AdjacencyMatrix::from_dense(d) == a);
  d(1, 2) = 1.0;
  CHECK_THROWS_AS(AdjacencyMatrix::from_dense(d), ParameterError);  // asymmetric
  Matrix loop(3, 3);
  loop(1, 1) = 1.0;
  CHECK_THROWS_AS(AdjacencyMatrix::from_dense(loop), ParameterError);
  Matrix frac(3, 3);
  frac(0, 1) = frac(1, 0) = 0.5;
  CHECK_THROWS_AS(AdjacencyMatrix::from_dense(frac), ParameterError);
}

TEST_CASE("permutation relabels nodes") {
  const std::vector<std::pair<std::size_t, std::size_t>> edges{{0, 1}, {1, 2}};
  const auto a = AdjacencyMatrix::from_edges(4, edges);
  const std::vector<std::size_t> perm{3, 2, 1, 0};
  const auto b = a.permuted(perm);
  CHECK(b(3, 2));
  CHECK(b(2, 1));
  CHECK(b.edge_count() == 2);
  check_invariants(b);
}

TEST_CASE("edge list round trip and strict parsing") {
  std::istringstream in("# a path\n3\n0 1\n\n1 2  # trailing comment\n");
  const auto a = read_edge_list(in);
  CHECK(a.size() == 3);
  CHECK(a.edge_count() == 2);
  std::ostringstream out;
  write_edge_list(out, a);
  CHECK(out.str() == "3\n0 1\n1 2\n");

  auto error_line = [](const std::string& text) {
    std::istringstream s(text);
    try {
      read_edge_list(s);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  CHECK(error_line("3\n0 1\n0 1\n") == 3);  // duplicate
  CHECK(error_line("3\n1 0\n") == 2);       // i > j
  CHECK(error_line("3\n1 1\n") == 2);       // self-loop
  CHECK(error_line("3\n0 3\n") == 2);       // out of range
  CHECK(error_line("3\n0 1 2\n") == 2);     // extra field
  CHECK(error_line("3\n0 x\n") == 2);
  CHECK(error_line("1\n") == 1);  // n < 2
  CHECK(error_line("# only\n") == 1);
  CHECK_THROWS_WITH_AS(read_edge_list(std::filesystem::path("/nonexistent/graph.txt")),
                       doctest::Contains("/nonexistent/graph.txt"), ParseError);
}

TEST_CASE("dense matrix reader") {
  std::istringstream in("# omega\n0.1 0.2\n0.2 0.3\n");
  const Matrix m = read_dense_matrix(in);
  CHECK(m.rows() == 2);
  CHECK(m(1, 0) == 0.2);
  std::istringstream ragged("1 2\n3\n");
  CHECK_THROWS_AS(read_dense_matrix(ragged), ParseError);
}

TEST_CASE("parameter validation") {
  auto p = two_block_pure(10);
  CHECK_NOTHROW(p.validate());
  p.P(0, 1) = 0.06;
  CHECK_THROWS_AS(p.validate(), ParameterError);  // asymmetric
  p = two_block_pure(10);
  p.P(0, 0) = 1.2;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = two_block_pure(10);
  p.membership = PureMembership{{0.6, 0.5}};
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.membership = DirichletMembership{{0.1, 0.0}};
  CHECK_THROWS_AS(p.validate(), ParameterError);
  Matrix pi = balanced_memberships(10, 2);
  pi(0, 0) = 0.5;
  p.membership = FixedMembership{pi};
  CHECK_THROWS_AS(p.validate(), ParameterError);
  CHECK_THROWS_AS(generate_network(p, 1), ParameterError);
}

TEST_CASE("balanced memberships split sizes by at most one") {
  const Matrix pi = balanced_memberships(10, 3);
  std::vector<double> sizes(3, 0.0);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t k = 0; k < 3; ++k) sizes[k] += pi(i, k);
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1.0);
}

TEST_CASE("generation is deterministic and valid") {
  const auto p = two_block_pure(150);
  const auto a = generate_network(p, 42);
  CHECK(a == generate_network(p, 42));
  CHECK_FALSE(a == generate_network(p, 43));
  check_invariants(a);
  MmsbmParams d{2, p.P, DirichletMembership{{0.3, 0.7}}, 90};
  check_invariants(generate_network(d, 5));
  CHECK(generate_network(d, 5) == generate_network(d, 5));
}

TEST_CASE("ER edge count over 500 seeds") {
  const MmsbmParams er{1, Matrix(1, 1, 0.1), FixedMembership{balanced_memberships(200, 1)}, 200};
  const double pairs = 200.0 * 199.0 / 2.0;
  const double expected = 0.1 * pairs;  // 1990
  CHECK(expected == doctest::Approx(1990.0));
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto a = generate_network(er, s);
    check_invariants(a);
    sum += static_cast<double>(a.edge_count());
  }
  const double mean = sum / 500.0;
  const double sd_of_mean = std::sqrt(pairs * 0.1 * 0.9 / 500.0);
  CHECK(std::abs(mean - expected) <= 3.0 * sd_of_mean);
}

TEST_CASE("pure-membership SBM: mean edge density near alpha0") {
  // alpha0 = h'Ph = 0.25 (0.2 + 0.05 + 0.05 + 0.2) = 0.125
  const auto p = two_block_pure(500);
  std::vector<double> dens;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto a = generate_network(p, 1000 + s);
    dens.push_back(2.0 * static_cast<double>(a.edge_count()) / (500.0 * 499.0));
  }
  const double mean = std::accumulate(dens.begin(), dens.end(), 0.0) / 200.0;
  double ss = 0.0;
  for (double x : dens) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / 199.0 / 200.0);
  CHECK(std::abs(mean - 0.125) <= 4.0 * se);
}

TEST_CASE("per-edge frequencies on a fixed five-node instance") {
  Matrix pi = Matrix::from_rows({{1, 0}, {0, 1}, {0.5, 0.5}, {0.2, 0.8}, {1, 0}});
  const Matrix P = Matrix::from_rows({{0.6, 0.1}, {0.1, 0.3}});
  const MmsbmParams p{2, P, FixedMembership{pi}, 5};
  const std::size_t R = 10000;
  Matrix counts(5, 5);
  for (std::size_t s = 0; s < R; ++s) {
    const auto a = generate_network(p, s);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) counts(i, j) += a(i, j) ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j) {
      double prob = 0.0;
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) prob += pi(i, a) * P(a, b) * pi(j, b);
      const double freq = counts(i, j) / static_cast<double>(R);
      CHECK(std::abs(freq - prob) <= 4.0 * std::sqrt(prob * (1.0 - prob) / static_cast<double>(R)));
    }
}

TEST_CASE("Dirichlet memberships are on the simplex with the right mean") {
  MmsbmParams p{3, Matrix(3, 3, 0.1), DirichletMembership{{0.2, 0.5, 1.3}}, 4000};
  const Matrix pi = realize_memberships(p, StreamKey{11});
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK(pi(i, k) >= 0.0);
      s += pi(i, k);
      mean[k] += pi(i, k) / 4000.0;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  const auto h = mean_membership(p);
  const Matrix G = membership_second_moment(p);
  for (std::size_t k = 0; k < 3; ++k) {
    // Var(pi_k) = G_kk - h_k^2
    const double se = std::sqrt((G(k, k) - h[k] * h[k]) / 4000.0);
    CHECK(std::abs(mean[k] - h[k]) <= 4.0 * se);
  }
  CHECK(h[2] == doctest::Approx(1.3 / 2.0));
}

TEST_CASE("pure memberships draw each community with probability h") {
  MmsbmParams p{2, Matrix(2, 2, 0.1), PureMembership{{0.2, 0.8}}, 5000};
  const Matrix pi = realize_memberships(p, StreamKey{3});
  double first = 0.0;
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    CHECK(pi(i, 0) + pi(i, 1) == 1.0);
    first += pi(i, 0);
  }
  CHECK(std::abs(first / 5000.0 - 0.2) <= 4.0 * std::sqrt(0.16 / 5000.0));
}

TEST_CASE("omega from identity memberships is P, and K = 1 is constant") {
  const Matrix P = Matrix::from_rows({{0.2, 0.05, 0.1}, {0.05, 0.3, 0.0}, {0.1, 0.0, 0.4}});
  const MmsbmParams p{3, P, FixedMembership{Matrix::identity(3)}, 3};
  CHECK(omega_matrix(p, Matrix::identity(3)).values() == P);
  const MmsbmParams er{1, Matrix(1, 1, 0.3), FixedMembership{balanced_memberships(6, 1)}, 6};
  const auto o = omega_matrix(er, balanced_memberships(6, 1));
  for (double x : o.values().data()) CHECK(x == 0.3);
  CHECK_THROWS_AS(omega_matrix(p, balanced_memberships(6, 2)), ParameterError);
}

TEST_CASE("Example 3: the four-community and two-community factorizations agree") {
  const Matrix P = example3_P();
  // H columns h1 = (0, .5, .4, 1), h2 = (1, .5, .6, 0); eta* = (0.3, 0.1).
  const Matrix H = Matrix::from_rows({{0, 1}, {0.5, 0.5}, {0.4, 0.6}, {1, 0}});
  const Matrix Pstar = 0.01 * Matrix::from_rows({{9, 3}, {3, 1}});
  // Pure rows in all four communities plus some mixed rows.
  const Matrix Pi = Matrix::from_rows({{1, 0, 0, 0},
                                       {0, 1, 0, 0},
                                       {0, 0, 1, 0},
                                       {0, 0, 0, 1},
                                       {0.25, 0.25, 0.25, 0.25},
                                       {0.5, 0, 0, 0.5},
                                       {0, 0.3, 0.7, 0}});
  const Matrix PiStar = multiply(Pi, H);
  const MmsbmParams four{4, P, FixedMembership{Pi}, 7};
  const MmsbmParams two{2, Pstar, FixedMembership{PiStar}, 7};
  const auto o4 = omega_matrix(four, Pi);
  const auto o2 = omega_matrix(two, PiStar);
  double diff = 0.0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) diff = std::max(diff, std::abs(o4(i, j) - o2(i, j)));
  CHECK(diff <= 1e-12);
}

TEST_CASE("omega is invariant to relabeling communities") {
  const Matrix P = Matrix::from_rows({{0.2, 0.05, 0.1}, {0.05, 0.3, 0.0}, {0.1, 0.0, 0.4}});
  const Matrix Pi = Matrix::from_rows({{0.2, 0.3, 0.5}, {1, 0, 0}, {0, 0.5, 0.5}, {0.1, 0.8, 0.1}});
  const std::vector<std::size_t> perm{2, 0, 1};
  Matrix P2(3, 3), Pi2(4, 3);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) P2(a, b) = P(perm[a], perm[b]);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t a = 0; a < 3; ++a) Pi2(i, a) = Pi(i, perm[a]);
  const auto o1 = omega_matrix({3, P, FixedMembership{Pi}, 4}, Pi);
  const auto o2 = omega_matrix({3, P2, FixedMembership{Pi2}, 4}, Pi2);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(o1(i, j) == doctest::Approx(o2(i, j)).epsilon(1e-14));
}

TEST_CASE("centered signal matrix") {
  const auto flat = centered_signal_matrix(ProbabilityMatrix(Matrix(5, 5, 0.3)));
  for (double x : flat.data()) CHECK(std::abs(x) <= 1e-15);

  const auto c = centered_signal_matrix(ProbabilityMatrix(Matrix::from_rows({{0.2, 0.05}, {0.05, 0.2}})));
  CHECK(c(0, 0) == doctest::Approx(0.075).epsilon(1e-14));
  CHECK(c(0, 1) == doctest::Approx(-0.075).epsilon(1e-14));

  const auto p = two_block_pure(40);
  const auto pi = realize_memberships(p, StreamKey{9});
  const auto ct = centered_signal_matrix(omega_matrix(p, pi));
  CHECK(std::abs(grand_sum(ct)) <= 1e-9 * 40.0 * 40.0);
}

TEST_CASE("probability matrix guards") {
  CHECK_THROWS_AS(ProbabilityMatrix(Matrix::from_rows({{0.1, 0.2}, {0.3, 0.1}})), ParameterError);
  CHECK_THROWS_AS(ProbabilityMatrix(Matrix::from_rows({{1.1, 0.2}, {0.2, 0.1}})), ParameterError);
  CHECK_THROWS_AS(ProbabilityMatrix(Matrix(2, 3)), ParameterError);
  const ProbabilityMatrix nearly(Matrix::from_rows({{0.1, 0.2 + 1e-12}, {0.2, 0.1}}));
  CHECK(nearly(0, 1) == nearly(1, 0));
}
