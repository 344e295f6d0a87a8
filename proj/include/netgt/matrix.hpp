#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace netgt {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  std::vector<std::vector<double>> to_rows() const;

  // max |a_ij - a_ji|; +inf for non-square.
  double asymmetry() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Blocked product with a fixed summation order, so results do not depend on
// how many threads call it or in which order.
Matrix multiply(const Matrix& a, const Matrix& b);

// A * A' for symmetric use; only the upper triangle is computed then mirrored.
Matrix multiply_symmetric(const Matrix& a);

Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double trace(const Matrix& a);
double frobenius_norm_squared(const Matrix& a);

// 1' A 1
double grand_sum(const Matrix& a);

std::vector<double> mat_vec(const Matrix& a, std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);

struct SymmetricEigen {
  std::vector<double> values;  // sorted by descending |lambda|
  Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi for real symmetric matrices. Eigenvector signs are fixed so the
// largest-magnitude entry of each column is positive.
SymmetricEigen symmetric_eigen(const Matrix& a, double tolerance = 1e-14, int max_sweeps = 100);

// Spectral norm of a symmetric matrix (largest |eigenvalue|).
double spectral_norm_symmetric(const Matrix& a);

// Solves the square system A x = b by partial-pivoting elimination. Throws
// ParameterError when a pivot falls below `singular_tol` times the max entry.
std::vector<double> solve_linear(Matrix a, std::vector<double> b, double singular_tol = 1e-14);

}  // namespace netgt
