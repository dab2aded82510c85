#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <cnode/errors.hpp>

namespace cnode {

/**
 * @brief Dense real matrix, row-major.
 *
 * Vectors are represented as single-column (or single-row) matrices; there
 * is no separate vector type. Storage length is always rows * cols.
 */
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_{rows}, cols_{cols}, data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_{rows}, cols_{cols}, data_{std::move(data)} {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Matrix: data length " + std::to_string(data_.size()) +
                           " does not match " + std::to_string(rows_) + "x" +
                           std::to_string(cols_));
    }
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    std::vector<double> data;
    data.reserve(r * c);
    for (const auto& row : rows) {
      if (row.size() != c) {
        throw DimensionError("Matrix::from_rows: ragged rows");
      }
      data.insert(data.end(), row.begin(), row.end());
    }
    return Matrix(r, c, std::move(data));
  }

  static Matrix column(std::span<const double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
  }

  static Matrix column(std::initializer_list<double> values) {
    return Matrix(values.size(), 1, std::vector<double>(values));
  }

  static Matrix row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
  }

  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator[](std::size_t k) noexcept { return data_[k]; }
  double operator[](std::size_t k) const noexcept { return data_[k]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  /// Scalar value of a 1x1 matrix.
  double item() const {
    if (data_.size() != 1) throw DimensionError("Matrix::item: not a 1x1 matrix");
    return data_[0];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  std::string shape_string() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                         b.shape_string());
  }
}

/// out += a * b, shapes already checked.
namespace detail {

// Kernels over raw row-major storage. M is the output width when it is known
// at compile time (0 = runtime width m); state models here are 1 to 8 wide.

template <std::size_t M>
void gemm_nn(std::size_t n, std::size_t inner, std::size_t m, const double* pa, const double* pb, double* po) {
  const std::size_t w = M ? M : m;
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * w;
    const double* arow = pa + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      const double* brow = pb + k * w;
      for (std::size_t j = 0; j < w; ++j) orow[j] += aik * brow[j];
    }
  }
}

// out(n x inner) += a(n x m) * b(inner x m)'
template <std::size_t M>
void gemm_nt(std::size_t n, std::size_t inner, std::size_t m, const double* pa, const double* pb, double* po) {
  const std::size_t w = M ? M : m;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * w;
    double* orow = po + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double* brow = pb + k * w;
      double s = 0.0;
      for (std::size_t j = 0; j < w; ++j) s += arow[j] * brow[j];
      orow[k] += s;
    }
  }
}

// out(inner x m) += a(n x inner)' * b(n x m)
template <std::size_t M>
void gemm_tn(std::size_t n, std::size_t inner, std::size_t m, const double* pa, const double* pb, double* po) {
  const std::size_t w = M ? M : m;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * inner;
    const double* brow = pb + i * w;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      double* orow = po + k * w;
      for (std::size_t j = 0; j < w; ++j) orow[j] += aik * brow[j];
    }
  }
}

#define CNODE_GEMM_DISPATCH(name)                                                                              \
  inline void name##_any(std::size_t n, std::size_t inner, std::size_t m, const double* a, const double* b, \
                         double* o) {                                                                        \
    switch (m) {                                                                                             \
      case 1: return name<1>(n, inner, m, a, b, o);                                                          \
      case 2: return name<2>(n, inner, m, a, b, o);                                                          \
      case 3: return name<3>(n, inner, m, a, b, o);                                                          \
      case 4: return name<4>(n, inner, m, a, b, o);                                                          \
      case 8: return name<8>(n, inner, m, a, b, o);                                                          \
      default: return name<0>(n, inner, m, a, b, o);                                                         \
    }                                                                                                        \
  }
CNODE_GEMM_DISPATCH(gemm_nn)
CNODE_GEMM_DISPATCH(gemm_nt)
CNODE_GEMM_DISPATCH(gemm_tn)
#undef CNODE_GEMM_DISPATCH

}  // namespace detail

/// out += a * b. Shapes are the caller's responsibility.
inline void matmul_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  detail::gemm_nn_any(a.rows(), a.cols(), b.cols(), a.values().data(), b.values().data(), out.values().data());
}

/// out += a * b' for a (n x m), b (k x m), out (n x k).
inline void matmul_nt_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  detail::gemm_nt_any(a.rows(), b.rows(), a.cols(), a.values().data(), b.values().data(), out.values().data());
}

/// out += a' * b for a (n x k), b (n x m), out (k x m).
inline void matmul_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& out) {
  detail::gemm_tn_any(a.rows(), a.cols(), b.cols(), a.values().data(), b.values().data(), out.values().data());
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ " + a.shape_string() + " * " +
                         b.shape_string());
  }
  Matrix out(a.rows(), b.cols());
  matmul_accumulate(a, b, out);
  return out;
}

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

template <typename F>
Matrix zip_with(const Matrix& a, const Matrix& b, const char* op, F f) {
  require_same_shape(a, b, op);
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k], b[k]);
  return out;
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = f(a[k]);
  return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  return zip_with(a, b, "add", [](double x, double y) { return x + y; });
}
inline Matrix operator-(const Matrix& a, const Matrix& b) {
  return zip_with(a, b, "subtract", [](double x, double y) { return x - y; });
}
inline Matrix operator*(double s, const Matrix& a) {
  return map(a, [s](double x) { return s * x; });
}
inline Matrix hadamard(const Matrix& a, const Matrix& b) {
  return zip_with(a, b, "hadamard", [](double x, double y) { return x * y; });
}

inline bool all_finite(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(),
                     [](double v) { return std::isfinite(v); });
}

inline void require_finite(const Matrix& m, const std::string& what) {
  if (!all_finite(m)) throw NumericError(what + ": non-finite entry");
}

inline double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double v : m.values()) r = std::max(r, std::abs(v));
  return r;
}

/// Maximum absolute row sum.
inline double norm_inf(const Matrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    r = std::max(r, s);
  }
  return r;
}

inline double norm_frobenius(const Matrix& m) {
  double s = 0.0;
  for (double v : m.values()) s += v * v;
  return std::sqrt(s);
}

inline std::vector<double> row_sums(const Matrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double v : m.row(i)) out[i] += v;
  return out;
}

/// Rows [r0, r1) and columns [c0, c1) copied into a new matrix.
inline Matrix block(const Matrix& m, std::size_t r0, std::size_t r1, std::size_t c0,
                    std::size_t c1) {
  if (r0 > r1 || r1 > m.rows() || c0 > c1 || c1 > m.cols()) {
    throw DimensionError("block: range out of bounds for " + m.shape_string());
  }
  Matrix out(r1 - r0, c1 - c0);
  for (std::size_t i = r0; i < r1; ++i)
    std::copy_n(m.row(i).data() + c0, c1 - c0, out.row(i - r0).data());
  return out;
}

}  // namespace cnode
