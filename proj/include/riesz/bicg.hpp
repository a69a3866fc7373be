#pragma once

#include "riesz/operator.hpp"

namespace riesz {

/// Modified BiCG: the standard BiCG recurrence, but the true relative
/// residual of every iterate is recorded and the returned solution is the
/// history-minimizing iterate. Requires the adjoint action for the shadow
/// recurrence. Breakdown (rho or p^H A p below 1e-300 in magnitude) returns
/// the best iterate so far with the breakdown flag set.
inline SolveReport mbicg(const LinearOperator& op, const Vector& b, const SolverConfig& cfg) {
  require(op.dim > 0, "mbicg: empty operator");
  require(b.size() == op.dim, "mbicg: right-hand side length mismatch");
  require(op.has_adjoint(), "mbicg: operator must provide the adjoint action");
  require(cfg.tol > 0.0, "mbicg: tol must be positive");
  require(cfg.maxit >= 1, "mbicg: maxit must be >= 1");

  constexpr double kBreakdown = 1e-300;
  const index_t n = op.dim;
  SolveReport rep;
  Vector x = detail::initial_guess(cfg, n);

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    rep.x.assign(n, Scalar{0.0, 0.0});
    rep.converged = true;
    rep.best_relres = 0.0;
    return rep;
  }

  Vector ax = op.apply(x);
  Vector r = subtract(b, ax);
  rep.best_relres = norm2(r) / bnorm;
  rep.x = x;
  if (rep.best_relres < cfg.tol) {
    rep.converged = true;
    return rep;
  }

  Vector rs = r;  // shadow residual
  Vector p = r;
  Vector ps = rs;
  Scalar rho = hdot(rs, r);

  Vector ap, aps;
  for (index_t it = 1; it <= cfg.maxit; ++it) {
    if (std::abs(rho) < kBreakdown) {
      rep.breakdown = true;
      break;
    }
    op.apply(p, ap);
    if (!all_finite(ap)) {
      rep.breakdown = true;
      break;
    }
    const Scalar p_ap = hdot(ps, ap);
    if (std::abs(p_ap) < kBreakdown) {
      rep.breakdown = true;
      break;
    }
    const Scalar alpha = rho / p_ap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    op.apply_adjoint(ps, aps);
    axpy(-std::conj(alpha), aps, rs);

    op.apply(x, ax);
    const double relres = norm2(subtract(b, ax)) / bnorm;
    rep.relres_history.push_back(relres);
    rep.iterations = it;
    if (relres < rep.best_relres) {
      rep.best_relres = relres;
      rep.x = x;  // snapshot whenever a new minimum occurs
    }
    if (relres < cfg.tol) { break; }

    const Scalar rho_next = hdot(rs, r);
    if (std::abs(rho_next) < kBreakdown) {
      rep.breakdown = true;
      break;
    }
    const Scalar beta = rho_next / rho;
    rho = rho_next;
    for (index_t i = 0; i < n; ++i) {
      p[i] = r[i] + beta * p[i];
      ps[i] = rs[i] + std::conj(beta) * ps[i];
    }
  }

  rep.converged = rep.best_relres < cfg.tol;
  return rep;
}

}  // namespace riesz
