#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/matrix.hpp>

namespace cnode {

using ComplexScalar = std::complex<double>;

struct EigenOptions {
  /// Total QR sweeps allowed is iteration_factor * n.
  std::size_t iteration_factor = 100;
  /// Relative deflation threshold on subdiagonal entries.
  double tolerance = std::numeric_limits<double>::epsilon();
};

namespace detail {

  inline bool is_lower_triangular(const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = i + 1; j < m.cols(); ++j)
        if (m(i, j) != 0.0) return false;
    return true;
  }

  // Householder reduction to upper Hessenberg form, in place.
  inline void reduce_to_hessenberg(Matrix& a) {
    const std::size_t n = a.rows();
    if (n < 3) return;
    std::vector<double> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
      double alpha = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
      double tail = 0.0;
      for (std::size_t i = k + 2; i < n; ++i) tail += a(i, k) * a(i, k);
      if (tail == 0.0) continue;  // column already in Hessenberg form
      alpha = std::sqrt(alpha);
      if (a(k + 1, k) > 0.0) alpha = -alpha;
      std::fill(v.begin(), v.end(), 0.0);
      v[k + 1] = a(k + 1, k) - alpha;
      for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
      double vnorm2 = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
      // A <- (I - 2vv'/v'v) A (I - 2vv'/v'v)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
        s = 2.0 * s / vnorm2;
        for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
      }
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
        s = 2.0 * s / vnorm2;
        for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
      }
      a(k + 1, k) = alpha;
      for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
    }
  }

  // Francis double-shift QR on an upper Hessenberg matrix (destroyed). Real
  // arithmetic throughout; complex pairs come out of 2x2 blocks as exact
  // conjugates.
  inline std::vector<ComplexScalar> hessenberg_qr(Matrix& a, const EigenOptions& opt) {
    const int n = static_cast<int>(a.rows());
    std::vector<ComplexScalar> w(static_cast<std::size_t>(n));
    const double eps = opt.tolerance;
    const std::size_t cap = opt.iteration_factor * static_cast<std::size_t>(n);
    std::size_t total_its = 0;

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));

    auto sign = [](double x, double y) { return y >= 0.0 ? std::abs(x) : -std::abs(x); };

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
      int its = 0;
      int l = 0;
      do {
        for (l = nn; l > 0; --l) {
          double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
          if (s == 0.0) s = anorm;
          if (std::abs(a(l, l - 1)) <= eps * s) {
            a(l, l - 1) = 0.0;
            break;
          }
        }
        double x = a(nn, nn);
        if (l == nn) {
          w[nn--] = ComplexScalar(x + t, 0.0);
        } else {
          double y = a(nn - 1, nn - 1);
          double ww = a(nn, nn - 1) * a(nn - 1, nn);
          if (l == nn - 1) {
            const double p = 0.5 * (y - x);
            const double q = p * p + ww;
            double z = std::sqrt(std::abs(q));
            x += t;
            if (q >= 0.0) {
              z = p + sign(z, p);
              w[nn - 1] = w[nn] = ComplexScalar(x + z, 0.0);
              if (z != 0.0) w[nn] = ComplexScalar(x - ww / z, 0.0);
            } else {
              w[nn - 1] = ComplexScalar(x + p, z);
              w[nn] = ComplexScalar(x + p, -z);
            }
            nn -= 2;
          } else {
            if (++total_its > cap) {
              throw ConvergenceError("eigenvalues: QR iteration cap reached",
                                     std::abs(a(nn, nn - 1)));
            }
            if (its == 10 || its == 20) {  // exceptional shift
              t += x;
              for (int i = 0; i <= nn; ++i) a(i, i) -= x;
              const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
              y = x = 0.75 * s;
              ww = -0.4375 * s * s;
            }
            ++its;
            int m = nn - 2;
            double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
            for (; m >= l; --m) {
              z = a(m, m);
              r = x - z;
              double s = y - z;
              p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
              q = a(m + 1, m + 1) - z - r - s;
              r = a(m + 2, m + 1);
              s = std::abs(p) + std::abs(q) + std::abs(r);
              p /= s;
              q /= s;
              r /= s;
              if (m == l) break;
              const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
              const double v =
                  std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
              if (u <= eps * v) break;
            }
            for (int i = m; i < nn - 1; ++i) {
              a(i + 2, i) = 0.0;
              if (i != m) a(i + 2, i - 1) = 0.0;
            }
            for (int k = m; k < nn; ++k) {
              if (k != m) {
                p = a(k, k - 1);
                q = a(k + 1, k - 1);
                r = 0.0;
                if (k + 1 != nn) r = a(k + 2, k - 1);
                if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                  p /= x;
                  q /= x;
                  r /= x;
                }
              }
              const double s = sign(std::sqrt(p * p + q * q + r * r), p);
              if (s == 0.0) continue;
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k + 1 != nn) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k + 1 != nn) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      } while (l + 1 < nn);
    }
    return w;
  }

}  // namespace detail

/// Descending magnitude, then descending real part, then descending imaginary part.
inline void sort_eigenvalues(std::vector<ComplexScalar>& values) {
  std::sort(values.begin(), values.end(), [](const ComplexScalar& x, const ComplexScalar& y) {
    const double mx = std::abs(x), my = std::abs(y);
    if (mx != my) return mx > my;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

/**
 * @brief All eigenvalues of a real square matrix, with multiplicity.
 *
 * Householder reduction to Hessenberg form followed by shifted (Francis
 * double-shift) QR with deflation. Triangular inputs are handled without
 * rotation so their diagonal comes back exactly. Output is sorted by
 * sort_eigenvalues().
 */
inline std::vector<ComplexScalar> eigenvalues(const Matrix& m, const EigenOptions& opt = {}) {
  if (!m.is_square()) throw DimensionError("eigenvalues: matrix is not square (" + m.shape_string() + ")");
  require_finite(m, "eigenvalues");
  if (m.rows() == 0) return {};
  // A lower-triangular matrix shares its spectrum with its (upper-triangular) transpose.
  Matrix work = detail::is_lower_triangular(m) ? transpose(m) : m;
  detail::reduce_to_hessenberg(work);
  auto values = detail::hessenberg_qr(work, opt);
  sort_eigenvalues(values);
  return values;
}

inline double spectral_radius(const Matrix& m) {
  double r = 0.0;
  for (const auto& v : eigenvalues(m)) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace cnode
