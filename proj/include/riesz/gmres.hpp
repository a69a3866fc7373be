#pragma once

#include "riesz/operator.hpp"

namespace riesz {

/// Full (optionally restarted) GMRES: Arnoldi with modified Gram-Schmidt,
/// least squares by Givens rotations on the Hessenberg matrix. The relative
/// residual is ||b - A x||_2 / ||b||_2; the per-iteration history holds the
/// Givens estimate, which is confirmed against one true residual at exit
/// (a discrepancy beyond 10x tol sets residual_mismatch). Basis and
/// Hessenberg storage grow with the iteration count, so memory follows the
/// iterations actually taken, not maxit.
inline SolveReport gmres(const LinearOperator& op, const Vector& b, const SolverConfig& cfg) {
  require(op.dim > 0, "gmres: empty operator");
  require(b.size() == op.dim, "gmres: right-hand side length mismatch");
  require(cfg.tol > 0.0, "gmres: tol must be positive");
  require(cfg.maxit >= 1, "gmres: maxit must be >= 1");
  if (cfg.restart) { require(*cfg.restart >= 1, "gmres: restart must be >= 1"); }

  const index_t n = op.dim;
  SolveReport rep;
  rep.x = detail::initial_guess(cfg, n);

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    rep.x.assign(n, Scalar{0.0, 0.0});
    rep.converged = true;
    rep.best_relres = 0.0;
    return rep;
  }

  Vector r = b;
  {
    bool x0_zero = true;
    for (Scalar s : rep.x) {
      if (s != Scalar{0.0, 0.0}) {
        x0_zero = false;
        break;
      }
    }
    if (!x0_zero) {
      Vector ax = op.apply(rep.x);
      if (!all_finite(ax)) { throw std::runtime_error("gmres: non-finite operator output"); }
      r = subtract(b, ax);
    }
  }
  double rnorm = norm2(r);
  rep.best_relres = rnorm / bnorm;
  if (rep.best_relres < cfg.tol) {
    rep.converged = true;
    return rep;
  }

  const index_t cycle = std::min({cfg.restart.value_or(cfg.maxit), cfg.maxit, n});
  rep.basis_bytes = (cycle + 1) * n * sizeof(Scalar);

  std::vector<Vector> basis;            // Arnoldi vectors, grown on demand
  std::vector<Vector> hess_cols;        // column k holds entries 0..k+1
  std::vector<double> giv_c;
  std::vector<Scalar> giv_s;
  Vector rhs;                           // rotated ||r|| e1
  Vector w;

  index_t total_it = 0;
  bool done = false;
  while (!done) {
    basis.clear();
    hess_cols.clear();
    giv_c.clear();
    giv_s.clear();
    rhs.assign(1, Scalar{rnorm, 0.0});
    Vector v0 = r;
    scal(Scalar{1.0 / rnorm, 0.0}, v0);
    basis.push_back(std::move(v0));

    index_t k = 0;
    bool happy = false;
    bool cycle_converged = false;
    while (k < cycle && total_it < cfg.maxit) {
      op.apply(basis[k], w);
      if (!all_finite(w)) { throw std::runtime_error("gmres: non-finite operator output"); }
      const double wnorm0 = norm2(w);
      Vector hk(k + 2, Scalar{0.0, 0.0});
      for (index_t i = 0; i <= k; ++i) {
        const Scalar hik = hdot(basis[i], w);
        hk[i] = hik;
        axpy(-hik, basis[i], w);
      }
      const double hk1 = norm2(w);
      hk[k + 1] = Scalar{hk1, 0.0};
      happy = hk1 <= 1e-14 * (wnorm0 > 0.0 ? wnorm0 : 1.0);
      if (!happy) {
        Vector vk1 = w;
        scal(Scalar{1.0 / hk1, 0.0}, vk1);
        basis.push_back(std::move(vk1));
      }

      // rotate the new column through the accumulated Givens pairs, then
      // zero its subdiagonal with a fresh one
      for (index_t i = 0; i < k; ++i) {
        const Scalar t1 = hk[i];
        const Scalar t2 = hk[i + 1];
        hk[i] = giv_c[i] * t1 + giv_s[i] * t2;
        hk[i + 1] = -std::conj(giv_s[i]) * t1 + giv_c[i] * t2;
      }
      {
        const Scalar f = hk[k];
        const Scalar g = hk[k + 1];
        const double fa = std::abs(f);
        const double nrm = std::sqrt(fa * fa + std::norm(g));
        double c;
        Scalar s;
        if (nrm == 0.0) {
          c = 1.0;
          s = Scalar{0.0, 0.0};
        } else if (fa == 0.0) {
          c = 0.0;
          s = Scalar{1.0, 0.0};
        } else {
          c = fa / nrm;
          s = (f / fa) * std::conj(g) / nrm;
        }
        giv_c.push_back(c);
        giv_s.push_back(s);
        hk[k] = c * f + s * g;
        hk[k + 1] = Scalar{0.0, 0.0};
        rhs.push_back(-std::conj(s) * rhs[k]);
        rhs[k] = c * rhs[k];
      }
      hess_cols.push_back(std::move(hk));

      ++total_it;
      ++k;
      const double est = std::abs(rhs[k]) / bnorm;
      rep.relres_history.push_back(est);
      if (est < cfg.tol || happy) {
        cycle_converged = true;
        break;
      }
    }

    if (k > 0) {
      // back substitution on the k x k triangle, then x += V y
      Vector y(rhs.begin(), rhs.begin() + k);
      for (index_t ii = k; ii-- > 0;) {
        Scalar acc = y[ii];
        for (index_t j = ii + 1; j < k; ++j) {
          acc -= hess_cols[j][ii] * y[j];
        }
        y[ii] = acc / hess_cols[ii][ii];
      }
      for (index_t j = 0; j < k; ++j) {
        axpy(y[j], basis[j], rep.x);
      }
    }

    Vector ax = op.apply(rep.x);
    r = subtract(b, ax);
    rnorm = norm2(r);
    const double true_relres = rnorm / bnorm;

    if (cycle_converged) {
      rep.converged = true;
      rep.residual_mismatch = true_relres > 10.0 * cfg.tol;
      done = true;
    } else if (total_it >= cfg.maxit) {
      done = true;
    }
    // otherwise restart from the current residual
  }

  rep.iterations = total_it;
  for (double h : rep.relres_history) {
    rep.best_relres = std::min(rep.best_relres, h);
  }
  return rep;
}

}  // namespace riesz
