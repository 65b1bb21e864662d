#include "prodval/linalg.hpp"

#include <cmath>

#include "prodval/error.hpp"

namespace prodval {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "dot product of vectors with different lengths");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vector Matrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Vector Matrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) fail(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
  Vector out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = dot(row(r), x);
  return out;
}

Vector Matrix::multiply_transposed(std::span<const double> y) const {
  if (y.size() != rows_) fail(ErrorCode::DimensionMismatch, "matrix-vector size mismatch");
  Vector out(cols_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[c] += (*this)(r, c) * y[r];
  }
  return out;
}

std::optional<Vector> solve_square(Matrix a, Vector b, double pivot_tol) {
  const std::size_t n = a.rows();
  double scale = 0.0;
  for (std::size_t r = 0; r < n; ++r) scale = std::max(scale, max_abs(a.row(r)));
  if (scale == 0.0) return n == 0 ? std::optional<Vector>(Vector{}) : std::nullopt;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a(r, k)) > std::abs(a(p, k))) p = r;
    }
    if (std::abs(a(p, k)) <= pivot_tol * scale) return std::nullopt;
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(p, c));
      std::swap(b[k], b[p]);
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a(r, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      b[r] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a(k, c) * x[c];
    x[k] = s / a(k, k);
  }
  return x;
}

std::optional<Vector> least_squares(const Matrix& a_in, std::span<const double> b_in, double rank_tol) {
  const std::size_t m = a_in.rows();
  const std::size_t n = a_in.cols();
  if (b_in.size() != m) fail(ErrorCode::DimensionMismatch, "least squares size mismatch");
  if (n > m) return std::nullopt;
  Matrix a = a_in;
  Vector b(b_in.begin(), b_in.end());
  double scale = 0.0;
  for (std::size_t r = 0; r < m; ++r) scale = std::max(scale, max_abs(a.row(r)));
  if (scale == 0.0) return n == 0 ? std::optional<Vector>(Vector{}) : std::nullopt;
  for (std::size_t k = 0; k < n; ++k) {
    double norm = 0.0;
    for (std::size_t r = k; r < m; ++r) norm += a(r, k) * a(r, k);
    norm = std::sqrt(norm);
    if (norm <= rank_tol * scale) return std::nullopt;
    const double alpha = a(k, k) > 0 ? -norm : norm;
    Vector v(m - k);
    for (std::size_t r = k; r < m; ++r) v[r - k] = a(r, k);
    v[0] -= alpha;
    double vnorm2 = 0.0;
    for (double x : v) vnorm2 += x * x;
    if (vnorm2 > 0.0) {
      for (std::size_t c = k; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = k; r < m; ++r) s += v[r - k] * a(r, c);
        s = 2.0 * s / vnorm2;
        for (std::size_t r = k; r < m; ++r) a(r, c) -= s * v[r - k];
      }
      double s = 0.0;
      for (std::size_t r = k; r < m; ++r) s += v[r - k] * b[r];
      s = 2.0 * s / vnorm2;
      for (std::size_t r = k; r < m; ++r) b[r] -= s * v[r - k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t c = k + 1; c < n; ++c) s -= a(k, c) * x[c];
    x[k] = s / a(k, k);
  }
  return x;
}

namespace {

bool next_combination(std::vector<std::size_t>& idx, std::size_t m) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < m - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

LpResult solve_lp_vertices(const Matrix& a, std::span<const double> b, std::span<const double> c, double feas_tol) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  if (b.size() != m || c.size() != n) fail(ErrorCode::DimensionMismatch, "LP dimensions disagree");
  LpResult best;
  if (n == 0) {
    for (std::size_t r = 0; r < m; ++r) {
      if (b[r] < -feas_tol) return best;
    }
    best.feasible = true;
    return best;
  }
  if (m < n) return best;
  std::vector<std::size_t> idx(n);
  for (std::size_t k = 0; k < n; ++k) idx[k] = k;
  std::size_t visited = 0;
  do {
    if (++visited > 5'000'000) fail(ErrorCode::NumericalFailure, "LP too large for vertex enumeration");
    Matrix sub(n, n);
    Vector rhs(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t col = 0; col < n; ++col) sub(k, col) = a(idx[k], col);
      rhs[k] = b[idx[k]];
    }
    auto x = solve_square(std::move(sub), std::move(rhs), 1e-10);
    if (!x) continue;
    bool ok = true;
    for (std::size_t r = 0; r < m && ok; ++r) {
      const double lhs = dot(a.row(r), *x);
      ok = lhs <= b[r] + feas_tol * (1.0 + std::abs(b[r]));
    }
    if (!ok) continue;
    const double obj = dot(c, *x);
    if (!best.feasible || obj > best.objective + 1e-12 * (1.0 + std::abs(best.objective))) {
      best.feasible = true;
      best.objective = obj;
      best.x = std::move(*x);
    }
  } while (next_combination(idx, m));
  return best;
}

}  // namespace prodval
