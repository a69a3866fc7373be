#pragma once

#include "riesz/operator.hpp"
#include "riesz/sparse.hpp"

namespace riesz {

/// Incomplete LU with zero fill-in. L is unit lower triangular (diagonal
/// stored explicitly), U upper triangular; their joint pattern is the
/// pattern of A plus the diagonal. Zero or tiny U pivots are replaced by 1
/// and recorded, so U is always invertible. No pivoting: perm is identity.
struct Ilu0Factors {
  SparseMatrix lower;
  SparseMatrix upper;
  std::vector<index_t> perm;
  std::vector<index_t> patched_pivots;
};

namespace detail {

/// x <- T^{-1} x for triangular CSR T with sorted columns.
inline void sparse_lower_solve(const SparseMatrix& t, Vector& x, bool unit_diag) {
  for (index_t i = 0; i < t.n_rows; ++i) {
    Scalar acc = x[i];
    Scalar diag{1.0, 0.0};
    for (index_t k = t.row_ptr[i]; k < t.row_ptr[i + 1]; ++k) {
      const index_t j = t.col_idx[k];
      if (j < i) {
        acc -= t.values[k] * x[j];
      } else if (j == i) {
        diag = t.values[k];
      }
    }
    x[i] = unit_diag ? acc : acc / diag;
  }
}

inline void sparse_upper_solve(const SparseMatrix& t, Vector& x, bool unit_diag) {
  for (index_t ii = t.n_rows; ii-- > 0;) {
    Scalar acc = x[ii];
    Scalar diag{1.0, 0.0};
    for (index_t k = t.row_ptr[ii]; k < t.row_ptr[ii + 1]; ++k) {
      const index_t j = t.col_idx[k];
      if (j > ii) {
        acc -= t.values[k] * x[j];
      } else if (j == ii) {
        diag = t.values[k];
      }
    }
    x[ii] = unit_diag ? acc : acc / diag;
  }
}

}  // namespace detail

/// IKJ-variant ILU(0) on the pattern of A. Pivots with |u_ii| below
/// 1e-14 * max|A| are patched to 1 (near-zeros are as harmful as exact
/// zeros in double precision).
inline Ilu0Factors ilu0_factor(const SparseMatrix& a) {
  require(a.n_rows == a.n_cols, "ilu0: matrix must be square");
  const index_t n = a.n_rows;
  const double patch_tol = 1e-14 * a.max_abs();

  // working copy of A with the diagonal slot guaranteed present
  std::vector<std::tuple<index_t, index_t, Scalar>> trip;
  trip.reserve(a.nnz() + n);
  std::vector<bool> has_diag(n, false);
  for (index_t i = 0; i < n; ++i) {
    for (index_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      trip.emplace_back(i, a.col_idx[k], a.values[k]);
      if (a.col_idx[k] == i) { has_diag[i] = true; }
    }
  }
  for (index_t i = 0; i < n; ++i) {
    if (!has_diag[i]) { trip.emplace_back(i, i, Scalar{0.0, 0.0}); }
  }
  SparseMatrix w = SparseMatrix::from_triplets(n, n, std::move(trip));

  std::vector<index_t> diag_pos(n);
  for (index_t i = 0; i < n; ++i) {
    index_t pos = w.row_ptr[i];
    while (w.col_idx[pos] != i) { ++pos; }
    diag_pos[i] = pos;
  }

  Ilu0Factors f;
  auto value_at = [&](index_t row, index_t col) -> Scalar* {
    index_t lo = w.row_ptr[row];
    index_t hi = w.row_ptr[row + 1];
    while (lo < hi) {
      const index_t mid = (lo + hi) / 2;
      if (w.col_idx[mid] == col) { return &w.values[mid]; }
      if (w.col_idx[mid] < col) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return nullptr;
  };

  for (index_t i = 0; i < n; ++i) {
    for (index_t ki = w.row_ptr[i]; ki < w.row_ptr[i + 1]; ++ki) {
      const index_t k = w.col_idx[ki];
      if (k >= i) { break; }
      const Scalar lik = w.values[ki] / w.values[diag_pos[k]];
      w.values[ki] = lik;
      for (index_t kj = diag_pos[k] + 1; kj < w.row_ptr[k + 1]; ++kj) {
        Scalar* target = value_at(i, w.col_idx[kj]);
        if (target != nullptr) { *target -= lik * w.values[kj]; }
      }
    }
    if (std::abs(w.values[diag_pos[i]]) < patch_tol) {
      w.values[diag_pos[i]] = Scalar{1.0, 0.0};
      f.patched_pivots.push_back(i);
    }
  }

  std::vector<std::tuple<index_t, index_t, Scalar>> lt, ut;
  for (index_t i = 0; i < n; ++i) {
    lt.emplace_back(i, i, Scalar{1.0, 0.0});
    for (index_t k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) {
      const index_t j = w.col_idx[k];
      if (j < i) {
        lt.emplace_back(i, j, w.values[k]);
      } else {
        ut.emplace_back(i, j, w.values[k]);
      }
    }
  }
  f.lower = SparseMatrix::from_triplets(n, n, std::move(lt));
  f.upper = SparseMatrix::from_triplets(n, n, std::move(ut));
  f.perm.resize(n);
  for (index_t i = 0; i < n; ++i) {
    f.perm[i] = i;
  }
  return f;
}

/// b-tilde = L^{-1} Pr b.
inline Vector ilu0_transform_rhs(const Ilu0Factors& f, const Vector& b) {
  require(b.size() == f.lower.n_rows, "ilu0_transform_rhs: length mismatch");
  Vector y(b.size());
  for (index_t i = 0; i < b.size(); ++i) {
    y[i] = b[f.perm[i]];
  }
  detail::sparse_lower_solve(f.lower, y, true);
  return y;
}

/// Back-map x = U^{-1} x-tilde.
inline Vector ilu0_recover_solution(const Ilu0Factors& f, const Vector& xt) {
  require(xt.size() == f.upper.n_rows, "ilu0_recover_solution: length mismatch");
  Vector x = xt;
  detail::sparse_upper_solve(f.upper, x, false);
  return x;
}

/// A-tilde = L^{-1} Pr A U^{-1} as an operator: two sparse triangular
/// solves around one product per application. The adjoint uses explicit
/// conjugate-transpose copies of A, L, U.
inline LinearOperator ilu0_operator(Ilu0Factors f, SparseMatrix a) {
  require(a.n_rows == f.lower.n_rows, "ilu0_operator: dimension mismatch");
  struct State {
    Ilu0Factors f;
    SparseMatrix a;
    SparseMatrix a_ct;
    SparseMatrix lower_ct;  // upper triangular, unit diagonal
    SparseMatrix upper_ct;  // lower triangular
  };
  auto st = std::make_shared<State>();
  st->f = std::move(f);
  st->a = std::move(a);
  st->a_ct = conj_transpose(st->a);
  st->lower_ct = conj_transpose(st->f.lower);
  st->upper_ct = conj_transpose(st->f.upper);

  LinearOperator op;
  op.dim = st->a.n_rows;
  op.apply_fn = [st](const Vector& x, Vector& y) {
    Vector u = x;
    detail::sparse_upper_solve(st->f.upper, u, false);  // U^{-1} x
    Vector au;
    spmv(st->a, u, au);
    y.resize(x.size());
    for (index_t i = 0; i < y.size(); ++i) {
      y[i] = au[st->f.perm[i]];  // Pr (A U^{-1} x)
    }
    detail::sparse_lower_solve(st->f.lower, y, true);  // L^{-1} ...
  };
  op.adjoint_fn = [st](const Vector& x, Vector& y) {
    // (L^{-1} Pr A U^{-1})^H = U^{-H} A^H Pr^T L^{-H}
    Vector t = x;
    detail::sparse_upper_solve(st->lower_ct, t, true);  // L^{-H} x
    Vector pt(t.size());
    for (index_t i = 0; i < t.size(); ++i) {
      pt[st->f.perm[i]] = t[i];  // Pr^T
    }
    Vector at;
    spmv(st->a_ct, pt, at);
    y = std::move(at);
    detail::sparse_lower_solve(st->upper_ct, y, false);  // U^{-H} ...
  };
  return op;
}

}  // namespace riesz
