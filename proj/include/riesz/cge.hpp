#pragma once

#include "riesz/core.hpp"

namespace riesz {

/// Parameters of the complete-pivot rank detector. alpha gates the all-zero
/// case only: once a first pivot exists its magnitude replaces alpha, and
/// tol_cge is relative to that largest pivot.
struct CgeParams {
  double alpha = 1e-8;
  double tol_cge = 1e-2;
};

struct CgeResult {
  DenseMatrix z;                  // selected columns of the input, possibly reordered
  index_t rank = 0;
  std::vector<index_t> selected;  // original column indices, in output order
};

/// Gaussian elimination with complete pivoting on Z-hat = Z^H Z to detect
/// the numerical rank of Z and select independent columns. Row and column
/// swaps of Z-hat move each complete pivot to the diagonal; only the column
/// swaps are mirrored onto Z, so the output columns are columns of the
/// input, never recombined. Z-hat loses Hermitian symmetry after the first
/// elimination and is kept as a general dense matrix. Pivot ties break to
/// the smallest (i, j).
inline CgeResult cge(const DenseMatrix& z, const CgeParams& params) {
  require(params.alpha > 0.0, "cge: alpha must be positive");
  require(params.tol_cge > 0.0 && params.tol_cge < 1.0, "cge: tol_cge must be in (0, 1)");
  require(z.cols >= 1, "cge: Z must have at least one column");
  const index_t m = z.cols;

  DenseMatrix zh = matmul_adjoint_left(z, z);
  std::vector<index_t> cols(m);
  for (index_t j = 0; j < m; ++j) {
    cols[j] = j;
  }

  auto find_pivot = [&](index_t from) {
    index_t pi = from;
    index_t pj = from;
    double best = -1.0;
    for (index_t i = from; i < m; ++i) {
      for (index_t j = from; j < m; ++j) {
        const double v = std::abs(zh(i, j));
        if (v > best) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    }
    return std::tuple<index_t, index_t, double>{pi, pj, best};
  };
  auto swap_rows = [&](index_t a, index_t b) {
    if (a == b) { return; }
    for (index_t j = 0; j < m; ++j) {
      std::swap(zh(a, j), zh(b, j));
    }
  };
  auto swap_cols = [&](index_t a, index_t b) {
    if (a == b) { return; }
    for (index_t i = 0; i < m; ++i) {
      std::swap(zh(i, a), zh(i, b));
    }
    std::swap(cols[a], cols[b]);
  };
  auto take_columns = [&](index_t rk) {
    CgeResult r;
    r.rank = rk;
    r.z = DenseMatrix(z.rows, rk);
    for (index_t j = 0; j < rk; ++j) {
      std::copy(z.col(cols[j]), z.col(cols[j]) + z.rows, r.z.col(j));
      r.selected.push_back(cols[j]);
    }
    return r;
  };

  auto [i0, j0, piv] = find_pivot(0);
  if (piv < params.alpha) { return take_columns(0); }
  const double alpha = piv;  // Line 4: the comparison base is the first pivot
  swap_cols(0, j0);
  swap_rows(0, i0);

  index_t rank = m;
  for (index_t j = 0; j + 1 < m; ++j) {
    for (index_t i = j + 1; i < m; ++i) {
      const Scalar factor = zh(i, j) / zh(j, j);
      for (index_t c = j; c < m; ++c) {
        zh(i, c) -= factor * zh(j, c);
      }
    }
    auto [ti, tj, tmax] = find_pivot(j + 1);
    if (tmax / alpha < params.tol_cge) {
      rank = j + 1;
      return take_columns(rank);
    }
    swap_cols(j + 1, tj);
    swap_rows(j + 1, ti);
  }
  return take_columns(rank);
}

}  // namespace riesz
