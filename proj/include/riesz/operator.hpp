#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "riesz/core.hpp"
#include "riesz/sparse.hpp"

namespace riesz {

/// Abstract square operator: the same solvers run on A, the deflated
/// operator PA, the shifted operators (sigma I - A), and the
/// ILU-preconditioned A-tilde. The adjoint action is optional; BiCG
/// requires it.
struct LinearOperator {
  index_t dim = 0;
  std::function<void(const Vector&, Vector&)> apply_fn;
  std::function<void(const Vector&, Vector&)> adjoint_fn;

  bool has_adjoint() const { return static_cast<bool>(adjoint_fn); }

  void apply(const Vector& x, Vector& y) const {
    require(x.size() == dim, "operator: dimension mismatch");
    apply_fn(x, y);
  }

  Vector apply(const Vector& x) const {
    Vector y;
    apply(x, y);
    return y;
  }

  void apply_adjoint(const Vector& x, Vector& y) const {
    require(has_adjoint(), "operator: adjoint action not available");
    require(x.size() == dim, "operator: dimension mismatch");
    adjoint_fn(x, y);
  }

  Vector apply_adjoint(const Vector& x) const {
    Vector y;
    apply_adjoint(x, y);
    return y;
  }
};

/// Wraps a sparse matrix as an operator. The matrix is moved into shared
/// storage; the adjoint uses an explicitly built conjugate-transpose copy.
inline LinearOperator make_operator(SparseMatrix a, bool with_adjoint = true) {
  require(a.n_rows == a.n_cols, "make_operator: matrix must be square");
  auto mat = std::make_shared<const SparseMatrix>(std::move(a));
  LinearOperator op;
  op.dim = mat->n_rows;
  op.apply_fn = [mat](const Vector& x, Vector& y) { spmv(*mat, x, y); };
  if (with_adjoint) {
    auto adj = std::make_shared<const SparseMatrix>(conj_transpose(*mat));
    op.adjoint_fn = [adj](const Vector& x, Vector& y) { spmv(*adj, x, y); };
  }
  return op;
}

/// sigma I - A.
inline LinearOperator shifted_operator(Scalar sigma, const LinearOperator& a) {
  LinearOperator op;
  op.dim = a.dim;
  op.apply_fn = [sigma, a](const Vector& x, Vector& y) {
    a.apply(x, y);
    for (index_t i = 0; i < x.size(); ++i) {
      y[i] = sigma * x[i] - y[i];
    }
  };
  if (a.has_adjoint()) {
    const Scalar sc = std::conj(sigma);
    op.adjoint_fn = [sc, a](const Vector& x, Vector& y) {
      a.apply_adjoint(x, y);
      for (index_t i = 0; i < x.size(); ++i) {
        y[i] = sc * x[i] - y[i];
      }
    };
  }
  return op;
}

enum class InitialGuess { zero, given, random };

struct SolverConfig {
  double tol = 1e-7;
  index_t maxit = 1000;
  std::optional<index_t> restart;  // GMRES cycle length; absent = full
  InitialGuess init = InitialGuess::zero;
  Vector x0;            // used when init == given
  std::uint64_t seed = 0;  // used when init == random
};

struct SolveReport {
  Vector x;
  index_t iterations = 0;
  std::vector<double> relres_history;  // one entry per iteration
  bool converged = false;
  double best_relres = std::numeric_limits<double>::infinity();
  bool breakdown = false;           // BiCG rho or p^H A p collapse
  bool residual_mismatch = false;   // GMRES estimate vs true residual at exit
  index_t basis_bytes = 0;          // GMRES Krylov basis footprint
};

namespace detail {

inline Vector initial_guess(const SolverConfig& cfg, index_t n) {
  switch (cfg.init) {
    case InitialGuess::zero:
      return Vector(n, Scalar{0.0, 0.0});
    case InitialGuess::given:
      require(cfg.x0.size() == n, "initial guess: length mismatch");
      return cfg.x0;
    case InitialGuess::random:
      return randn_vector(n, cfg.seed);
  }
  return Vector(n, Scalar{0.0, 0.0});
}

}  // namespace detail

}  // namespace riesz
