#pragma once

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>

#include "riesz/core.hpp"

namespace riesz {

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row; values are finite.
struct SparseMatrix {
  index_t n_rows = 0;
  index_t n_cols = 0;
  std::vector<index_t> row_ptr;  // n_rows + 1 offsets, nondecreasing
  std::vector<index_t> col_idx;
  std::vector<Scalar> values;

  index_t nnz() const { return values.size(); }

  double max_abs() const {
    double v = 0.0;
    for (Scalar s : values) {
      v = std::max(v, std::abs(s));
    }
    return v;
  }

  /// Value at (i, j), zero when outside the pattern.
  Scalar at(index_t i, index_t j) const {
    for (index_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
      if (col_idx[k] == j) { return values[k]; }
      if (col_idx[k] > j) { break; }
    }
    return Scalar{0.0, 0.0};
  }

  /// Builds from (row, col, value) triplets. Duplicate coordinates are
  /// summed; the count of summed duplicates is reported through
  /// `duplicates` when given.
  static SparseMatrix from_triplets(index_t n_rows, index_t n_cols,
                                    std::vector<std::tuple<index_t, index_t, Scalar>> triplets,
                                    index_t* duplicates = nullptr) {
    for (const auto& [i, j, v] : triplets) {
      require(i < n_rows && j < n_cols, "from_triplets: index out of range");
      require(is_finite(v), "from_triplets: non-finite value");
    }
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& a, const auto& b) {
                return std::tie(std::get<0>(a), std::get<1>(a)) <
                       std::tie(std::get<0>(b), std::get<1>(b));
              });
    SparseMatrix m;
    m.n_rows = n_rows;
    m.n_cols = n_cols;
    m.row_ptr.assign(n_rows + 1, 0);
    index_t dups = 0;
    for (index_t k = 0; k < triplets.size();) {
      const index_t i = std::get<0>(triplets[k]);
      const index_t j = std::get<1>(triplets[k]);
      Scalar v = std::get<2>(triplets[k]);
      index_t k2 = k + 1;
      while (k2 < triplets.size() && std::get<0>(triplets[k2]) == i &&
             std::get<1>(triplets[k2]) == j) {
        v += std::get<2>(triplets[k2]);
        ++k2;
        ++dups;
      }
      m.col_idx.push_back(j);
      m.values.push_back(v);
      ++m.row_ptr[i + 1];
      k = k2;
    }
    for (index_t i = 0; i < n_rows; ++i) {
      m.row_ptr[i + 1] += m.row_ptr[i];
    }
    if (duplicates != nullptr) { *duplicates = dups; }
    return m;
  }

  static SparseMatrix identity(index_t n) {
    std::vector<std::tuple<index_t, index_t, Scalar>> t;
    t.reserve(n);
    for (index_t i = 0; i < n; ++i) {
      t.emplace_back(i, i, Scalar{1.0, 0.0});
    }
    return from_triplets(n, n, std::move(t));
  }
};

/// y = A x, exact to floating-point rounding. Inputs must not alias the
/// output.
inline void spmv(const SparseMatrix& a, const Vector& x, Vector& y) {
  require(x.size() == a.n_cols, "spmv: dimension mismatch");
  y.assign(a.n_rows, Scalar{0.0, 0.0});
  for (index_t i = 0; i < a.n_rows; ++i) {
    Scalar acc{0.0, 0.0};
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      acc += a.values[k] * x[a.col_idx[k]];
    }
    y[i] = acc;
  }
}

inline Vector spmv(const SparseMatrix& a, const Vector& x) {
  Vector y;
  spmv(a, x, y);
  return y;
}

/// Explicit A^H as a CSR matrix. Row access of the conjugate transpose is
/// what makes adjoint products cache-friendly for BiCG.
inline SparseMatrix conj_transpose(const SparseMatrix& a) {
  SparseMatrix t;
  t.n_rows = a.n_cols;
  t.n_cols = a.n_rows;
  t.row_ptr.assign(t.n_rows + 1, 0);
  for (index_t c : a.col_idx) {
    ++t.row_ptr[c + 1];
  }
  for (index_t i = 0; i < t.n_rows; ++i) {
    t.row_ptr[i + 1] += t.row_ptr[i];
  }
  t.col_idx.resize(a.nnz());
  t.values.resize(a.nnz());
  std::vector<index_t> fill(t.n_rows, 0);
  for (index_t i = 0; i < a.n_rows; ++i) {
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      const index_t j = a.col_idx[k];
      const index_t pos = t.row_ptr[j] + fill[j]++;
      t.col_idx[pos] = i;
      t.values[pos] = std::conj(a.values[k]);
    }
  }
  return t;
}

inline DenseMatrix to_dense(const SparseMatrix& a) {
  DenseMatrix d(a.n_rows, a.n_cols);
  for (index_t i = 0; i < a.n_rows; ++i) {
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      d(i, a.col_idx[k]) = a.values[k];
    }
  }
  return d;
}

/// A Z column by column.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& z) {
  require(z.rows == a.n_cols, "spmm: dimension mismatch");
  DenseMatrix r(a.n_rows, z.cols);
  Vector x(a.n_cols), y;
  for (index_t j = 0; j < z.cols; ++j) {
    std::copy(z.col(j), z.col(j) + z.rows, x.begin());
    spmv(a, x, y);
    r.set_col(j, y);
  }
  return r;
}

}  // namespace riesz
