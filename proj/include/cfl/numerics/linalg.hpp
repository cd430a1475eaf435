#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfl {

using Vector = std::vector<double>;

/// Dense row-major matrix for the small (n <= 8) systems the geometry needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector operator*(std::span<const double> x) const {
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  Matrix operator*(const Matrix& o) const {
    Matrix r(rows_, o.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k)
        for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
    return r;
  }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Input vectors to gram_schmidt are (numerically) linearly dependent.
class DegenerateChartError : public std::runtime_error {
 public:
  DegenerateChartError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// A metric (or any matrix handed to spd_solve) is not positive definite.
class DegenerateMetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector operator+(Vector a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vector operator-(Vector a, std::span<const double> b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vector operator*(double s, Vector a) {
  for (double& v : a) v *= s;
  return a;
}

/// a += s * b
inline void axpy(double s, std::span<const double> b, std::span<double> a) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline constexpr double kGramSchmidtPivot = 1e-10;
inline constexpr double kCholeskyPivot = 1e-14;

/// Orthonormalizes the first `count` vectors in index order (modified
/// Gram-Schmidt with one reorthogonalization pass). Each output vector has a
/// positive inner product with its input.
inline std::vector<Vector> gram_schmidt(std::span<const Vector> vectors, std::size_t count) {
  if (count > vectors.size()) throw std::invalid_argument("gram_schmidt: count exceeds input size");
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector v = vectors[i];
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& e : out) axpy(-dot(v, e), e, v);
    const double len = norm(v);
    if (len <= kGramSchmidtPivot * std::max(1.0, norm(vectors[i]))) {
      throw DegenerateChartError(i, "gram_schmidt: vector " + std::to_string(i) +
                                        " is dependent on its predecessors");
    }
    for (double& x : v) x /= len;
    out.push_back(std::move(v));
  }
  return out;
}

/// Lower-triangular Cholesky factor L with A = L L^T.
inline Matrix cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky: matrix is not square");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * std::max(1.0, std::abs(a(i, j))))
        throw DegenerateMetricError("cholesky: matrix is not symmetric");
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > kCholeskyPivot)) {
      throw DegenerateMetricError("cholesky: non-positive pivot " + std::to_string(d) +
                                  " at row " + std::to_string(j));
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

inline Vector cholesky_solve(const Matrix& l, std::span<const double> rhs) {
  const std::size_t n = l.rows();
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) y[i] -= l(i, k) * y[k];
    y[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) y[i] -= l(k, i) * y[k];
    y[i] /= l(i, i);
  }
  return y;
}

/// Solves A x = rhs for symmetric positive definite A.
inline Vector spd_solve(const Matrix& a, std::span<const double> rhs) {
  if (rhs.size() != a.rows()) throw std::invalid_argument("spd_solve: size mismatch");
  return cholesky_solve(cholesky(a), rhs);
}

inline Matrix spd_inverse(const Matrix& a) {
  const Matrix l = cholesky(a);
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  Vector unit(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    unit.assign(n, 0.0);
    unit[j] = 1.0;
    const Vector col = cholesky_solve(l, unit);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  // Symmetrize away round-off so downstream contractions stay symmetric.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) inv(i, j) = inv(j, i) = 0.5 * (inv(i, j) + inv(j, i));
  return inv;
}

inline double spd_determinant(const Matrix& a) {
  const Matrix l = cholesky(a);
  double d = 1.0;
  for (std::size_t i = 0; i < a.rows(); ++i) d *= l(i, i) * l(i, i);
  return d;
}

}  // namespace cfl
