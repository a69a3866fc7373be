#pragma once

#include "riesz/bicg.hpp"
#include "riesz/gmres.hpp"
#include "riesz/operator.hpp"

namespace riesz {

enum class SolverKind { gmres, mbicg };

inline SolveReport run_solver(SolverKind kind, const LinearOperator& op, const Vector& b,
                              const SolverConfig& cfg) {
  return kind == SolverKind::gmres ? gmres(op, b, cfg) : mbicg(op, b, cfg);
}

/// Deflation subspace: the columns Z, their image A Z (computed once), and
/// the LU factorization of the coarse matrix M = Z^H A Z. The projectors
///   P       = I - (A Z) M^{-1} Z^H
///   P-tilde = I - Z M^{-1} Z^H A
/// are applied from these parts and never materialized; M is factorized
/// once because the inner solver applies P thousands of times.
struct DeflationBasis {
  LinearOperator op;    // the A (or preconditioned A-tilde) the basis was built against
  DenseMatrix columns;  // Z, N x m
  DenseMatrix image;    // A Z, N x m
  DenseLU coarse;       // LU of M = Z^H (A Z)

  index_t dim() const { return columns.rows; }
  index_t rank() const { return columns.cols; }
};

/// Computes A Z once, assembles and factorizes M = Z^H (A Z). Fails when M
/// is numerically singular (pivot below 1e-14 * max|M|): near-dependent
/// columns should first be removed with cge().
inline DeflationBasis build_basis(const LinearOperator& a, DenseMatrix z) {
  require(z.rows == a.dim, "build_basis: Z row count must match operator dimension");
  require(z.cols >= 1, "build_basis: Z must have at least one column");
  DeflationBasis basis;
  basis.op = a;
  basis.image = DenseMatrix(z.rows, z.cols);
  Vector x(z.rows), y;
  for (index_t j = 0; j < z.cols; ++j) {
    std::copy(z.col(j), z.col(j) + z.rows, x.begin());
    a.apply(x, y);
    basis.image.set_col(j, y);
  }
  DenseMatrix m = matmul_adjoint_left(z, basis.image);
  basis.coarse = DenseLU::factor(m);
  if (basis.coarse.nearly_singular()) {
    throw std::runtime_error(
        "build_basis: M = Z^H A Z is numerically singular; "
        "remove near-dependent columns of Z with cge() first");
  }
  basis.columns = std::move(z);
  return basis;
}

inline DeflationBasis build_basis(SparseMatrix a, DenseMatrix z) {
  return build_basis(make_operator(std::move(a)), std::move(z));
}

namespace detail {

/// out -= B t, accumulated column-wise.
inline void subtract_combination(const DenseMatrix& b, const Vector& t, Vector& out) {
  for (index_t j = 0; j < b.cols; ++j) {
    const Scalar* cj = b.col(j);
    const Scalar tj = t[j];
    if (tj == Scalar{0.0, 0.0}) { continue; }
    for (index_t i = 0; i < out.size(); ++i) {
      out[i] -= cj[i] * tj;
    }
  }
}

}  // namespace detail

/// P v = v - (A Z) M^{-1} (Z^H v). Cost O(N m) plus one m x m solve.
inline Vector apply_P(const DeflationBasis& basis, const Vector& v) {
  require(v.size() == basis.dim(), "apply_P: length mismatch");
  Vector t = gemv_adjoint(basis.columns, v);
  basis.coarse.solve_in_place(t);
  Vector out = v;
  detail::subtract_combination(basis.image, t, out);
  return out;
}

/// P-tilde v = v - Z M^{-1} Z^H (A v).
inline Vector apply_Ptilde(const DeflationBasis& basis, const Vector& v) {
  require(v.size() == basis.dim(), "apply_Ptilde: length mismatch");
  Vector av = basis.op.apply(v);
  Vector t = gemv_adjoint(basis.columns, av);
  basis.coarse.solve_in_place(t);
  Vector out = v;
  detail::subtract_combination(basis.columns, t, out);
  return out;
}

/// v -> P(A v), with adjoint w -> A^H (P^H w) when A has one. The basis
/// must outlive the returned operator.
inline LinearOperator deflated_operator(const DeflationBasis& basis) {
  LinearOperator op;
  op.dim = basis.dim();
  const DeflationBasis* bp = &basis;
  op.apply_fn = [bp](const Vector& x, Vector& y) {
    Vector ax = bp->op.apply(x);
    Vector t = gemv_adjoint(bp->columns, ax);
    bp->coarse.solve_in_place(t);
    detail::subtract_combination(bp->image, t, ax);
    y = std::move(ax);
  };
  if (basis.op.has_adjoint()) {
    op.adjoint_fn = [bp](const Vector& x, Vector& y) {
      // P^H x = x - Z M^{-H} (A Z)^H x
      Vector t = gemv_adjoint(bp->image, x);
      bp->coarse.solve_adjoint_in_place(t);
      Vector px = x;
      detail::subtract_combination(bp->columns, t, px);
      bp->op.apply_adjoint(px, y);
    };
  }
  return op;
}

struct DeflatedSolution {
  Vector x;   // x1 + x2
  Vector x1;  // Z M^{-1} Z^H b (coarse part)
  Vector x2;  // P-tilde x#
  SolveReport inner;
  double relres1 = std::numeric_limits<double>::infinity();  // ||Pb - PA x#|| / ||Pb||
  double relres2 = std::numeric_limits<double>::infinity();  // ||b - A x|| / ||b||
};

/// Deflated solve:
///   x1 = Z M^{-1} Z^H b
///   solve P A x = P b for x# with the inner solver
///   x2 = P-tilde x#,  x = x1 + x2.
/// Inner non-convergence is propagated through the inner report, not
/// raised: x is still assembled. relres1 and relres2 are true residuals
/// recomputed at exit.
inline DeflatedSolution deflated_solve(const DeflationBasis& basis, const Vector& b,
                                       SolverKind inner_kind, const SolverConfig& cfg) {
  require(b.size() == basis.dim(), "deflated_solve: length mismatch");
  DeflatedSolution sol;

  Vector t = gemv_adjoint(basis.columns, b);
  basis.coarse.solve_in_place(t);
  sol.x1 = gemv(basis.columns, t);

  const Vector pb = apply_P(basis, b);
  const LinearOperator pa = deflated_operator(basis);
  const double bnorm0 = norm2(b);
  if (norm2(pb) <= 1e-14 * bnorm0) {
    // full deflation: the projected right-hand side is numerically zero
    sol.inner.x.assign(b.size(), Scalar{0.0, 0.0});
    sol.inner.converged = true;
    sol.inner.best_relres = 0.0;
  } else {
    sol.inner = run_solver(inner_kind, pa, pb, cfg);
  }

  sol.x2 = apply_Ptilde(basis, sol.inner.x);
  sol.x = add(sol.x1, sol.x2);

  const double pbnorm = norm2(pb);
  sol.relres1 = pbnorm == 0.0 ? 0.0 : norm2(subtract(pb, pa.apply(sol.inner.x))) / pbnorm;
  const double bnorm = norm2(b);
  sol.relres2 = bnorm == 0.0 ? 0.0 : norm2(subtract(b, basis.op.apply(sol.x))) / bnorm;
  return sol;
}

}  // namespace riesz
