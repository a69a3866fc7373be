#pragma once

#include <atomic>
#include <thread>

#include "riesz/deflation.hpp"
#include "riesz/operator.hpp"
#include "riesz/quadrature.hpp"

namespace riesz {

/// Integration circle Gamma = D(center, radius) with quadrature order q.
/// The circle must not pass through an eigenvalue; that is not checkable a
/// priori, a failing shifted solve is the signal.
struct Contour {
  Scalar center{0.0, 0.0};
  double radius = 0.5;
  index_t order = 16;
};

inline Scalar contour_point(const Contour& c, double theta) {
  const Scalar phase = std::polar(1.0, M_PI * theta);
  return c.center + c.radius * phase;
}

/// One subspace computation: solve the m*q shifted systems
///   ((center + radius e^{i pi theta_k}) I - A) x = y_j
/// and accumulate Z = (radius/2) sum_k w_k e^{i pi theta_k} X_k.
struct SubspaceJob {
  LinearOperator op;
  DenseMatrix probes;  // Y, N x m
  Contour contour;
  SolverKind inner_solver = SolverKind::gmres;
  SolverConfig inner;  // defaults below match the experiments
  bool random_initial_guess = false;
  std::uint64_t seed = 0;
  index_t threads = 1;

  SubspaceJob() {
    inner.tol = 1e-15;
    inner.maxit = 500;
  }
};

struct ShiftedBatchStats {
  double relres_min = std::numeric_limits<double>::infinity();
  double relres_max = 0.0;
  index_t systems = 0;
  index_t flagged = 0;               // breakdown or non-finite solves
  std::vector<double> relres;        // per system, node-major (k*m + j)
};

struct ShiftedBatchResult {
  std::vector<DenseMatrix> blocks;  // X_k, one N x m block per node
  ShiftedBatchStats stats;
};

struct SubspaceResult {
  DenseMatrix z;
  ShiftedBatchStats stats;
};

/// Solves the m*q systems. The (k, j) systems are independent and run as a
/// parallel map over a shared read-only operator; every system derives its
/// own seed from (seed, k, j), so the result is identical for any thread
/// count. The recorded residuals are true residuals recomputed from the
/// returned iterates.
inline ShiftedBatchResult shifted_solve_batch(const SubspaceJob& job) {
  require(job.probes.rows == job.op.dim, "shifted_solve_batch: probe rows must match operator");
  require(job.probes.cols >= 1, "shifted_solve_batch: need at least one probe column");
  require(job.contour.order >= 1, "shifted_solve_batch: quadrature order must be >= 1");
  if (job.inner_solver == SolverKind::mbicg) {
    require(job.op.has_adjoint(), "shifted_solve_batch: MBiCG needs the adjoint action");
  }

  const QuadratureRule rule = legendre_gauss(job.contour.order);
  const index_t q = job.contour.order;
  const index_t m = job.probes.cols;
  const index_t n = job.probes.rows;

  ShiftedBatchResult result;
  result.blocks.assign(q, DenseMatrix(n, m));
  result.stats.systems = q * m;
  result.stats.relres.assign(q * m, 0.0);
  std::vector<unsigned char> flagged(q * m, 0);

  std::atomic<index_t> next{0};
  const index_t n_threads = std::max<index_t>(1, job.threads);
  auto worker = [&]() {
    Vector y(n), res;
    for (;;) {
      const index_t id = next.fetch_add(1);
      if (id >= q * m) { break; }
      const index_t k = id / m;
      const index_t j = id % m;
      const Scalar sigma = contour_point(job.contour, rule.nodes[k]);
      const LinearOperator shifted = shifted_operator(sigma, job.op);
      std::copy(job.probes.col(j), job.probes.col(j) + n, y.begin());

      SolverConfig cfg = job.inner;
      if (job.random_initial_guess) {
        cfg.init = InitialGuess::random;
        cfg.seed = mix_seed(job.seed, id);
      }
      SolveReport rep;
      bool failed = false;
      try {
        rep = run_solver(job.inner_solver, shifted, y, cfg);
      } catch (const std::exception&) {
        failed = true;
      }
      if (!failed) {
        result.blocks[k].set_col(j, rep.x);
        shifted.apply(rep.x, res);
        const double ynorm = norm2(y);
        double rr = 0.0;
        if (ynorm > 0.0) {
          for (index_t i = 0; i < n; ++i) {
            res[i] = y[i] - res[i];
          }
          rr = norm2(res) / ynorm;
        }
        result.stats.relres[id] = rr;
        if (rep.breakdown || !std::isfinite(rr)) { flagged[id] = 1; }
      } else {
        flagged[id] = 1;
        result.stats.relres[id] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (index_t t = 0; t < n_threads; ++t) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  for (index_t id = 0; id < q * m; ++id) {
    if (flagged[id]) {
      ++result.stats.flagged;
      continue;
    }
    result.stats.relres_min = std::min(result.stats.relres_min, result.stats.relres[id]);
    result.stats.relres_max = std::max(result.stats.relres_max, result.stats.relres[id]);
  }
  if (result.stats.flagged == result.stats.systems) {
    result.stats.relres_min = std::numeric_limits<double>::quiet_NaN();
    result.stats.relres_max = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

/// Z = (radius/2) sum_k w_k e^{i pi theta_k} X_k. The weighted sum runs
/// over k ascending regardless of how the solves were scheduled, so the
/// result is bit-reproducible.
inline SubspaceResult compute_subspace(const SubspaceJob& job) {
  ShiftedBatchResult batch = shifted_solve_batch(job);
  const QuadratureRule rule = legendre_gauss(job.contour.order);
  const index_t n = job.probes.rows;
  const index_t m = job.probes.cols;

  SubspaceResult out;
  out.stats = std::move(batch.stats);
  out.z = DenseMatrix(n, m);
  for (index_t k = 0; k < job.contour.order; ++k) {
    const Scalar phase = std::polar(1.0, M_PI * rule.nodes[k]);
    const Scalar w = 0.5 * job.contour.radius * rule.weights[k] * phase;
    const DenseMatrix& xk = batch.blocks[k];
    for (index_t j = 0; j < m; ++j) {
      const Scalar* src = xk.col(j);
      Scalar* dst = out.z.col(j);
      for (index_t i = 0; i < n; ++i) {
        dst[i] += w * src[i];
      }
    }
  }
  return out;
}

}  // namespace riesz
