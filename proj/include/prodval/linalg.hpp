#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace prodval {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double max_abs(std::span<const double> a);

// Dense row-major matrix for the small systems used by the market checks.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  Vector column(std::size_t c) const;
  Vector multiply(std::span<const double> x) const;
  Vector multiply_transposed(std::span<const double> y) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Square solve with partial pivoting; nullopt when numerically singular.
std::optional<Vector> solve_square(Matrix a, Vector b, double pivot_tol = 1e-12);

// Least squares min |A x - b| for a tall matrix with full column rank via
// Householder QR; nullopt when rank deficient.
std::optional<Vector> least_squares(const Matrix& a, std::span<const double> b, double rank_tol = 1e-12);

struct LpResult {
  bool feasible = false;
  Vector x;
  double objective = 0.0;
};

// maximize c.x subject to A x <= b, by enumerating every basis of n active
// constraints. The feasible set must be pointed (add bounds if needed).
// Ties keep the first basis in lexicographic order.
LpResult solve_lp_vertices(const Matrix& a, std::span<const double> b, std::span<const double> c,
                           double feas_tol = 1e-9);

}  // namespace prodval
