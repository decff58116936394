/*
 * Copyright 2026 The trimabs authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace trimabs {

using Complex = std::complex<double>;
using Vec = std::vector<double>;

// Raised when an iterative routine fails to converge or a computation
// produces non-finite values.  Distinct from std::invalid_argument, which
// signals a contract violation by the caller.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles.  Dimensions are fixed at construction
// and are always >= 1.  Entries are finite; ops that could overflow check
// their result.
class Matrix {
 public:
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("Matrix: dimensions must be positive");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw std::invalid_argument("Matrix: no rows");
    const std::size_t nc = rows.begin()->size();
    Matrix m(rows.size(), nc);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != nc) throw std::invalid_argument("Matrix: ragged rows");
      std::size_t j = 0;
      for (double v : r) {
        if (!std::isfinite(v)) throw std::invalid_argument("Matrix: non-finite entry");
        m(i, j++) = v;
      }
      ++i;
    }
    return m;
  }

  static Matrix from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) throw std::invalid_argument("Matrix: no rows");
    const std::size_t nc = rows.front().size();
    Matrix m(rows.size(), nc);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != nc) throw std::invalid_argument("Matrix: ragged rows");
      for (std::size_t j = 0; j < nc; ++j) {
        if (!std::isfinite(rows[i][j]))
          throw std::invalid_argument("Matrix: non-finite entry");
        m(i, j) = rows[i][j];
      }
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("Matrix +: dimension mismatch");
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) + b(i, j);
  return r;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("Matrix -: dimension mismatch");
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) - b(i, j);
  return r;
}

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw std::invalid_argument("Matrix *: dimension mismatch");
  Matrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

inline Matrix operator*(const Matrix& a, double s) {
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) r(i, j) = a(i, j) * s;
  return r;
}

inline Matrix operator*(double s, const Matrix& a) { return a * s; }

inline Vec mat_vec(const Matrix& a, const Vec& x) {
  if (a.cols() != x.size())
    throw std::invalid_argument("mat_vec: dimension mismatch");
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline double inf_norm(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Operator norm induced by the L-infinity vector norm: max absolute row sum.
inline double induced_inf_norm(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

namespace detail {

// Solves A X = B by Gaussian elimination with partial pivoting.  A is
// consumed as the workspace.  Throws NumericalError on a (near-)singular
// pivot.
inline Matrix solve_lu(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n)
    throw std::invalid_argument("solve_lu: dimension mismatch");
  const double tiny = 1e-300;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) { best = v; piv = i; }
    }
    if (best < tiny) throw NumericalError("solve_lu: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    const double inv = 1.0 / a(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) * inv;
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  Matrix x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      double s = b(ii, c);
      for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * x(j, c);
      x(ii, c) = s / a(ii, ii);
    }
  }
  return x;
}

// Householder reduction to upper Hessenberg form, in place.
inline void to_hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  if (n < 3) return;
  std::vector<double> v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double scale = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) scale += std::abs(a(i, k));
    if (scale == 0.0) continue;
    double sigma = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = a(i, k) / scale;
      sigma += v[i] * v[i];
    }
    double alpha = std::sqrt(sigma);
    if (v[k + 1] >= 0.0) alpha = -alpha;
    const double beta = sigma - v[k + 1] * alpha;  // = u'u / 2 with u = v - alpha*e1
    if (beta == 0.0) continue;
    v[k + 1] -= alpha;
    // Left: rows k+1..n-1 of columns k..n-1.
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s /= beta;
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    // Right: columns k+1..n-1 of all rows.
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s /= beta;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
    a(k + 1, k) = alpha * scale;
    for (std::size_t i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

// Eigenvalues of an upper Hessenberg matrix by the implicit double-shift
// QR iteration with exceptional shifts.  a is destroyed.  deflate_tol is
// the absolute threshold under which a subdiagonal entry is treated as
// zero; budget bounds the total number of QR sweeps.
inline std::vector<Complex> hqr_eigen(Matrix& a, double deflate_tol, std::size_t budget) {
  const int n = static_cast<int>(a.rows());
  std::vector<Complex> out;
  out.reserve(n);
  int nn = n - 1;
  double t = 0.0;  // accumulated exceptional-shift offset
  std::size_t sweeps = 0;
  while (nn >= 0) {
    int its = 0;
    for (;;) {
      int l;
      for (l = nn; l >= 1; --l) {
        if (std::abs(a(l, l - 1)) <= deflate_tol) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {  // single real root
        out.emplace_back(x + t, 0.0);
        --nn;
        break;
      }
      double y = a(nn - 1, nn - 1);
      double w = a(nn, nn - 1) * a(nn - 1, nn);
      if (l == nn - 1) {  // trailing 2x2 block
        double p = 0.5 * (y - x);
        double q = p * p + w;
        double z = std::sqrt(std::abs(q));
        x += t;
        if (q >= 0.0) {
          z = p + (p >= 0.0 ? z : -z);
          out.emplace_back(x + z, 0.0);
          out.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
        } else {
          out.emplace_back(x + p, z);
          out.emplace_back(x + p, -z);
        }
        nn -= 2;
        break;
      }
      if (sweeps++ >= budget)
        throw NumericalError("eigenvalues: QR iteration budget exhausted");
      if (its == 10 || its == 20) {  // exceptional shift
        t += x;
        for (int i = 0; i <= nn; ++i) a(i, i) -= x;
        double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
        y = x = 0.75 * s;
        w = -0.4375 * s * s;
      }
      ++its;
      int m;
      double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
      for (m = nn - 2; m >= l; --m) {
        z = a(m, m);
        const double rr = x - z;
        const double ss = y - z;
        p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
        q = a(m + 1, m + 1) - z - rr - ss;
        r = a(m + 2, m + 1);
        const double sc = std::abs(p) + std::abs(q) + std::abs(r);
        p /= sc;
        q /= sc;
        r /= sc;
        if (m == l) break;
        const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
        const double v = std::abs(p) *
            (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
        if (u <= 2.220446049250313e-16 * v) break;
      }
      for (int i = m + 2; i <= nn; ++i) {
        a(i, i - 2) = 0.0;
        if (i != m + 2) a(i, i - 3) = 0.0;
      }
      for (int k = m; k <= nn - 1; ++k) {  // bulge chase
        if (k != m) {
          p = a(k, k - 1);
          q = a(k + 1, k - 1);
          r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x != 0.0) {
            p /= x;
            q /= x;
            r /= x;
          }
        }
        double s = std::sqrt(p * p + q * q + r * r);
        if (p < 0.0) s = -s;
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
          double pp = a(k, j) + q * a(k + 1, j);
          if (k != nn - 1) {
            pp += r * a(k + 2, j);
            a(k + 2, j) -= pp * z;
          }
          a(k + 1, j) -= pp * y;
          a(k, j) -= pp * x;
        }
        const int mmin = (nn < k + 3) ? nn : k + 3;
        for (int i = l; i <= mmin; ++i) {
          double pp = x * a(i, k) + y * a(i, k + 1);
          if (k != nn - 1) {
            pp += z * a(i, k + 2);
            a(i, k + 2) -= pp * r;
          }
          a(i, k + 1) -= pp * q;
          a(i, k) -= pp;
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/**
 * Matrix exponential exp(m * t) by scaling-and-squaring around a degree-13
 * Pade approximant.  m must be square.  Relative accuracy is far below the
 * 1e-9 contract for the matrix sizes this library targets.
 */
inline Matrix mat_exp(const Matrix& m, double t = 1.0) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("mat_exp: matrix must be square");
  if (!std::isfinite(t)) throw std::invalid_argument("mat_exp: non-finite t");
  const std::size_t n = m.rows();
  Matrix x = m * t;
  const double mu = induced_inf_norm(x);
  if (!std::isfinite(mu)) throw NumericalError("mat_exp: non-finite input");
  static const double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;
  int s = 0;
  if (mu > theta13) s = static_cast<int>(std::ceil(std::log2(mu / theta13)));
  if (s > 0) x = x * std::ldexp(1.0, -s);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x2 * x4;
  const Matrix eye = Matrix::identity(n);
  const Matrix u =
      x * (x6 * (x6 * b[13] + x4 * b[11] + x2 * b[9]) + x6 * b[7] + x4 * b[5] +
           x2 * b[3] + eye * b[1]);
  const Matrix v = x6 * (x6 * b[12] + x4 * b[10] + x2 * b[8]) + x6 * b[6] +
                   x4 * b[4] + x2 * b[2] + eye * b[0];
  Matrix f = detail::solve_lu(v - u, v + u);
  for (int i = 0; i < s; ++i) f = f * f;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!std::isfinite(f(i, j))) throw NumericalError("mat_exp: overflow");
  return f;
}

/**
 * All eigenvalues of a square matrix, sorted by (real, imag).  Closed-form
 * for n <= 2; Householder Hessenberg reduction followed by double-shift QR
 * otherwise, with deflation threshold 1e-12 * ||m|| and a budget of 100*n
 * sweeps.  Complex pairs are exact conjugates.
 */
inline std::vector<Complex> eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("eigenvalues: matrix must be square");
  const std::size_t n = m.rows();
  std::vector<Complex> out;
  if (n == 1) {
    out.emplace_back(m(0, 0), 0.0);
  } else if (n == 2) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double l1 = (tr >= 0.0) ? 0.5 * (tr + sq) : 0.5 * (tr - sq);
      const double l2 = (l1 != 0.0) ? det / l1 : tr - l1;
      out.emplace_back(l1, 0.0);
      out.emplace_back(l2, 0.0);
    } else {
      const double im = 0.5 * std::sqrt(-disc);
      out.emplace_back(0.5 * tr, im);
      out.emplace_back(0.5 * tr, -im);
    }
  } else {
    Matrix h = m;
    detail::to_hessenberg(h);
    const double tol = 1e-12 * induced_inf_norm(m);
    out = detail::hqr_eigen(h, tol, 100 * n);
  }
  std::sort(out.begin(), out.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return out;
}

// True iff every eigenvalue has real part < -tol.
inline bool is_hurwitz(const Matrix& m, double tol = 1e-9) {
  for (const Complex& l : eigenvalues(m))
    if (!(l.real() < -tol)) return false;
  return true;
}

// Smallest real part over the spectrum.
inline double min_real_part(const Matrix& m) {
  double r = std::numeric_limits<double>::infinity();
  for (const Complex& l : eigenvalues(m)) r = std::min(r, l.real());
  return r;
}

// Largest real part over the spectrum.
inline double max_real_part(const Matrix& m) {
  double r = -std::numeric_limits<double>::infinity();
  for (const Complex& l : eigenvalues(m)) r = std::max(r, l.real());
  return r;
}

}  // namespace trimabs
