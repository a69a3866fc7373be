#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace riesz {

/// All arithmetic is complex double precision. Real inputs are promoted on
/// load so that shifted systems with complex shifts share one code path.
using Scalar = std::complex<double>;
using Vector = std::vector<Scalar>;
using index_t = std::size_t;

inline bool is_finite(Scalar v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}

inline bool all_finite(const Vector& v) {
  for (Scalar s : v) {
    if (!is_finite(s)) { return false; }
  }
  return true;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) { throw std::invalid_argument(what); }
}

/// Conjugated inner product x^H y.
inline Scalar hdot(const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "hdot: length mismatch");
  Scalar acc{0.0, 0.0};
  for (index_t i = 0; i < x.size(); ++i) {
    acc += std::conj(x[i]) * y[i];
  }
  return acc;
}

inline double norm2(const Vector& x) {
  double acc = 0.0;
  for (Scalar s : x) {
    acc += s.real() * s.real() + s.imag() * s.imag();
  }
  return std::sqrt(acc);
}

/// y += a*x. x and y must not alias.
inline void axpy(Scalar a, const Vector& x, Vector& y) {
  require(x.size() == y.size(), "axpy: length mismatch");
  for (index_t i = 0; i < x.size(); ++i) {
    y[i] += a * x[i];
  }
}

inline void scal(Scalar a, Vector& x) {
  for (Scalar& s : x) {
    s *= a;
  }
}

inline Vector subtract(const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "subtract: length mismatch");
  Vector r(x.size());
  for (index_t i = 0; i < x.size(); ++i) {
    r[i] = x[i] - y[i];
  }
  return r;
}

inline Vector add(const Vector& x, const Vector& y) {
  require(x.size() == y.size(), "add: length mismatch");
  Vector r(x.size());
  for (index_t i = 0; i < x.size(); ++i) {
    r[i] = x[i] + y[i];
  }
  return r;
}

/// Dense column-major matrix. Columns are contiguous: the deflation basis and
/// the quadrature accumulation both consume columns.
struct DenseMatrix {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<Scalar> data;  // column-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(index_t r, index_t c) : rows(r), cols(c), data(r * c, Scalar{0.0, 0.0}) {}

  Scalar& operator()(index_t i, index_t j) { return data[j * rows + i]; }
  const Scalar& operator()(index_t i, index_t j) const { return data[j * rows + i]; }

  Scalar* col(index_t j) { return data.data() + j * rows; }
  const Scalar* col(index_t j) const { return data.data() + j * rows; }

  Vector col_vector(index_t j) const {
    return Vector(col(j), col(j) + rows);
  }

  void set_col(index_t j, const Vector& v) {
    require(v.size() == rows, "set_col: length mismatch");
    std::copy(v.begin(), v.end(), col(j));
  }

  static DenseMatrix identity(index_t n) {
    DenseMatrix m(n, n);
    for (index_t i = 0; i < n; ++i) {
      m(i, i) = Scalar{1.0, 0.0};
    }
    return m;
  }

  double max_abs() const {
    double v = 0.0;
    for (Scalar s : data) {
      v = std::max(v, std::abs(s));
    }
    return v;
  }

  double frobenius_norm() const {
    double acc = 0.0;
    for (Scalar s : data) {
      acc += s.real() * s.real() + s.imag() * s.imag();
    }
    return std::sqrt(acc);
  }
};

/// y = A x.
inline Vector gemv(const DenseMatrix& a, const Vector& x) {
  require(x.size() == a.cols, "gemv: dimension mismatch");
  Vector y(a.rows, Scalar{0.0, 0.0});
  for (index_t j = 0; j < a.cols; ++j) {
    const Scalar* cj = a.col(j);
    const Scalar xj = x[j];
    for (index_t i = 0; i < a.rows; ++i) {
      y[i] += cj[i] * xj;
    }
  }
  return y;
}

/// y = A^H x. With column-major storage each output entry is one
/// contiguous conjugated dot product.
inline Vector gemv_adjoint(const DenseMatrix& a, const Vector& x) {
  require(x.size() == a.rows, "gemv_adjoint: dimension mismatch");
  Vector y(a.cols, Scalar{0.0, 0.0});
  for (index_t j = 0; j < a.cols; ++j) {
    const Scalar* cj = a.col(j);
    Scalar acc{0.0, 0.0};
    for (index_t i = 0; i < a.rows; ++i) {
      acc += std::conj(cj[i]) * x[i];
    }
    y[j] = acc;
  }
  return y;
}

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.rows, "matmul: dimension mismatch");
  DenseMatrix c(a.rows, b.cols);
  for (index_t j = 0; j < b.cols; ++j) {
    for (index_t k = 0; k < a.cols; ++k) {
      const Scalar bkj = b(k, j);
      const Scalar* ak = a.col(k);
      Scalar* cj = c.col(j);
      for (index_t i = 0; i < a.rows; ++i) {
        cj[i] += ak[i] * bkj;
      }
    }
  }
  return c;
}

/// C = A^H B.
inline DenseMatrix matmul_adjoint_left(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows == b.rows, "matmul_adjoint_left: dimension mismatch");
  DenseMatrix c(a.cols, b.cols);
  for (index_t j = 0; j < b.cols; ++j) {
    for (index_t i = 0; i < a.cols; ++i) {
      const Scalar* ai = a.col(i);
      const Scalar* bj = b.col(j);
      Scalar acc{0.0, 0.0};
      for (index_t k = 0; k < a.rows; ++k) {
        acc += std::conj(ai[k]) * bj[k];
      }
      c(i, j) = acc;
    }
  }
  return c;
}

/// LU factorization with partial pivoting of a square dense matrix.
/// Solves with M and M^H share the one factorization.
class DenseLU {
 public:
  static DenseLU factor(const DenseMatrix& m) {
    require(m.rows == m.cols, "DenseLU: matrix must be square");
    DenseLU f;
    f.n_ = m.rows;
    f.lu_ = m.data;
    f.piv_.resize(f.n_);
    f.source_max_abs_ = m.max_abs();
    f.min_pivot_ = std::numeric_limits<double>::infinity();
    const index_t n = f.n_;
    auto at = [&](index_t i, index_t j) -> Scalar& { return f.lu_[j * n + i]; };
    for (index_t k = 0; k < n; ++k) {
      index_t p = k;
      double best = std::abs(at(k, k));
      for (index_t i = k + 1; i < n; ++i) {
        const double v = std::abs(at(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      f.piv_[k] = p;
      if (p != k) {
        for (index_t j = 0; j < n; ++j) {
          std::swap(at(k, j), at(p, j));
        }
      }
      const Scalar pivot = at(k, k);
      f.min_pivot_ = std::min(f.min_pivot_, std::abs(pivot));
      if (pivot == Scalar{0.0, 0.0}) { continue; }  // leaves a zero pivot; caller checks
      for (index_t i = k + 1; i < n; ++i) {
        at(i, k) /= pivot;
        const Scalar lik = at(i, k);
        if (lik == Scalar{0.0, 0.0}) { continue; }
        for (index_t j = k + 1; j < n; ++j) {
          at(i, j) -= lik * at(k, j);
        }
      }
    }
    return f;
  }

  index_t size() const { return n_; }
  double min_pivot() const { return min_pivot_; }
  double source_max_abs() const { return source_max_abs_; }

  bool nearly_singular(double rel_tol = 1e-14) const {
    return min_pivot_ <= rel_tol * source_max_abs_;
  }

  /// x <- M^{-1} x.
  void solve_in_place(Vector& x) const {
    require(x.size() == n_, "DenseLU::solve: length mismatch");
    for (index_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) { std::swap(x[k], x[piv_[k]]); }
    }
    // L y = Px (unit lower)
    for (index_t i = 0; i < n_; ++i) {
      Scalar acc = x[i];
      for (index_t j = 0; j < i; ++j) {
        acc -= lu_[j * n_ + i] * x[j];
      }
      x[i] = acc;
    }
    // U x = y
    for (index_t ii = n_; ii-- > 0;) {
      Scalar acc = x[ii];
      for (index_t j = ii + 1; j < n_; ++j) {
        acc -= lu_[j * n_ + ii] * x[j];
      }
      x[ii] = acc / lu_[ii * n_ + ii];
    }
  }

  Vector solve(Vector x) const {
    solve_in_place(x);
    return x;
  }

  /// x <- M^{-H} x, using M = P^T L U, so M^H y = c solves
  /// U^H z = c, L^H w = z, y = P^T w.
  void solve_adjoint_in_place(Vector& x) const {
    require(x.size() == n_, "DenseLU::solve_adjoint: length mismatch");
    // U^H z = c (lower triangular, non-unit)
    for (index_t i = 0; i < n_; ++i) {
      Scalar acc = x[i];
      for (index_t j = 0; j < i; ++j) {
        acc -= std::conj(lu_[i * n_ + j]) * x[j];
      }
      x[i] = acc / std::conj(lu_[i * n_ + i]);
    }
    // L^H w = z (upper triangular, unit)
    for (index_t ii = n_; ii-- > 0;) {
      Scalar acc = x[ii];
      for (index_t j = ii + 1; j < n_; ++j) {
        acc -= std::conj(lu_[ii * n_ + j]) * x[j];
      }
      x[ii] = acc;
    }
    // y = P^T w: undo row swaps in reverse order
    for (index_t kk = n_; kk-- > 0;) {
      if (piv_[kk] != kk) { std::swap(x[kk], x[piv_[kk]]); }
    }
  }

  Vector solve_adjoint(Vector x) const {
    solve_adjoint_in_place(x);
    return x;
  }

 private:
  index_t n_ = 0;
  std::vector<Scalar> lu_;
  std::vector<index_t> piv_;
  double min_pivot_ = 0.0;
  double source_max_abs_ = 0.0;
};

/// splitmix64 step; used to derive independent per-system seeds so results
/// do not depend on thread count.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Real standard-normal entries promoted to complex (the probe matrices Y
/// and random initial guesses are real Gaussian draws).
inline Vector randn_vector(index_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Vector v(n);
  for (index_t i = 0; i < n; ++i) {
    v[i] = Scalar{dist(rng), 0.0};
  }
  return v;
}

inline DenseMatrix randn_matrix(index_t rows, index_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (index_t j = 0; j < cols; ++j) {
    Scalar* cj = m.col(j);
    for (index_t i = 0; i < rows; ++i) {
      cj[i] = Scalar{dist(rng), 0.0};
    }
  }
  return m;
}

}  // namespace riesz
