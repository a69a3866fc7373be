#pragma once

#include <tuple>

#include "riesz/core.hpp"
#include "riesz/spectral.hpp"

namespace riesz {

namespace detail {

/// EISPACK-style balancing by powers of two. Returns the diagonal scale D
/// with A_in = D A_balanced D^{-1}; eigenvectors map back as v = D y.
inline std::vector<double> balance(DenseMatrix& a) {
  const index_t n = a.rows;
  std::vector<double> scale(n, 1.0);
  constexpr double radix = 2.0;
  constexpr double b2 = radix * radix;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (index_t i = 0; i < n; ++i) {
      double c = 0.0;
      double r = 0.0;
      for (index_t j = 0; j < n; ++j) {
        if (j == i) { continue; }
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) { continue; }
      double f = 1.0;
      const double s = c + r;
      double g = r / radix;
      while (c < g) {
        f *= radix;
        c *= b2;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= b2;
      }
      if ((c + r) / f < 0.95 * s) {
        converged = false;
        scale[i] *= f;
        const double inv = 1.0 / f;
        for (index_t j = 0; j < n; ++j) {
          a(i, j) *= inv;
        }
        for (index_t j = 0; j < n; ++j) {
          a(j, i) *= f;
        }
      }
    }
  }
  return scale;
}

/// Householder reduction to upper Hessenberg form. When q is non-null it
/// accumulates the unitary similarity so that A_in = Q H Q^H.
inline void hessenberg_reduce(DenseMatrix& h, DenseMatrix* q) {
  const index_t n = h.rows;
  if (q != nullptr) { *q = DenseMatrix::identity(n); }
  if (n < 3) { return; }
  Vector u(n);
  for (index_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (index_t i = k + 1; i < n; ++i) {
      xnorm += std::norm(h(i, k));
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) { continue; }
    const Scalar x0 = h(k + 1, k);
    const Scalar phase = (x0 == Scalar{0.0, 0.0}) ? Scalar{1.0, 0.0} : x0 / std::abs(x0);
    const Scalar alpha = -phase * xnorm;
    double unorm2 = 0.0;
    for (index_t i = k + 1; i < n; ++i) {
      u[i] = h(i, k);
    }
    u[k + 1] -= alpha;
    for (index_t i = k + 1; i < n; ++i) {
      unorm2 += std::norm(u[i]);
    }
    if (unorm2 == 0.0) { continue; }
    const double beta = 2.0 / unorm2;

    // H <- (I - beta u u^H) H, rows k+1..n-1
    for (index_t j = k; j < n; ++j) {
      Scalar dot{0.0, 0.0};
      for (index_t i = k + 1; i < n; ++i) {
        dot += std::conj(u[i]) * h(i, j);
      }
      dot *= beta;
      for (index_t i = k + 1; i < n; ++i) {
        h(i, j) -= dot * u[i];
      }
    }
    // H <- H (I - beta u u^H), columns k+1..n-1
    for (index_t i = 0; i < n; ++i) {
      Scalar dot{0.0, 0.0};
      for (index_t j = k + 1; j < n; ++j) {
        dot += h(i, j) * u[j];
      }
      dot *= beta;
      for (index_t j = k + 1; j < n; ++j) {
        h(i, j) -= dot * std::conj(u[j]);
      }
    }
    if (q != nullptr) {
      for (index_t i = 0; i < n; ++i) {
        Scalar dot{0.0, 0.0};
        for (index_t j = k + 1; j < n; ++j) {
          dot += (*q)(i, j) * u[j];
        }
        dot *= beta;
        for (index_t j = k + 1; j < n; ++j) {
          (*q)(i, j) -= dot * std::conj(u[j]);
        }
      }
    }
    h(k + 1, k) = alpha;
    for (index_t i = k + 2; i < n; ++i) {
      h(i, k) = Scalar{0.0, 0.0};
    }
  }
}

inline std::pair<Scalar, Scalar> eig2x2(Scalar a, Scalar b, Scalar c, Scalar d) {
  const Scalar half_tr = 0.5 * (a + d);
  const Scalar det = a * d - b * c;
  const Scalar disc = std::sqrt(half_tr * half_tr - det);
  return {half_tr + disc, half_tr - disc};
}

/// Single-shift (Wilkinson) complex QR iteration with deflation on an upper
/// Hessenberg matrix. Destroys h. Errors out after 30 n iterations.
inline std::vector<Scalar> hessenberg_qr_eigenvalues(DenseMatrix& h) {
  const index_t n = h.rows;
  std::vector<Scalar> eigs;
  eigs.reserve(n);
  if (n == 0) { return eigs; }
  constexpr double eps = 2.220446049250313e-16;
  const index_t max_total = 30 * n + 30;
  index_t total = 0;

  std::vector<double> giv_c(n);
  std::vector<Scalar> giv_s(n);

  index_t hi = n - 1;
  index_t since_deflate = 0;
  for (;;) {
    // find the active block [lo..hi]
    index_t lo = hi;
    while (lo > 0) {
      double s = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (s == 0.0) { s = 1.0; }
      if (std::abs(h(lo, lo - 1)) <= eps * s) {
        h(lo, lo - 1) = Scalar{0.0, 0.0};
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eigs.push_back(h(hi, hi));
      since_deflate = 0;
      if (hi == 0) { break; }
      --hi;
      continue;
    }
    if (hi - lo == 1) {
      auto [e1, e2] = eig2x2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
      eigs.push_back(e1);
      eigs.push_back(e2);
      since_deflate = 0;
      if (lo == 0) { break; }
      hi = lo - 1;
      continue;
    }
    if (++total > max_total) {
      throw std::runtime_error("dense_eigenvalues: QR iteration did not converge");
    }
    ++since_deflate;

    Scalar shift;
    if (since_deflate % 16 == 0) {
      // exceptional shift breaks symmetric stagnation
      shift = Scalar{std::abs(h(hi, hi - 1).real()) + std::abs(h(hi - 1, hi - 2).real()), 0.0};
    } else {
      auto [e1, e2] = eig2x2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
      shift = (std::abs(e1 - h(hi, hi)) < std::abs(e2 - h(hi, hi))) ? e1 : e2;
    }

    for (index_t i = lo; i <= hi; ++i) {
      h(i, i) -= shift;
    }
    // QR by Givens sweeps on the Hessenberg block
    for (index_t k = lo; k < hi; ++k) {
      const Scalar f = h(k, k);
      const Scalar g = h(k + 1, k);
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
      giv_c[k] = c;
      giv_s[k] = s;
      for (index_t j = k; j <= hi; ++j) {
        const Scalar t1 = h(k, j);
        const Scalar t2 = h(k + 1, j);
        h(k, j) = c * t1 + s * t2;
        h(k + 1, j) = -std::conj(s) * t1 + c * t2;
      }
    }
    // R Q: apply the conjugated rotations from the right
    for (index_t k = lo; k < hi; ++k) {
      const double c = giv_c[k];
      const Scalar s = giv_s[k];
      const index_t top = lo;
      const index_t bottom = std::min(k + 2, hi);
      for (index_t i = top; i <= bottom; ++i) {
        const Scalar t1 = h(i, k);
        const Scalar t2 = h(i, k + 1);
        h(i, k) = c * t1 + std::conj(s) * t2;
        h(i, k + 1) = -s * t1 + c * t2;
      }
    }
    for (index_t i = lo; i <= hi; ++i) {
      h(i, i) += shift;
    }
  }
  return eigs;
}

/// Partial-pivot LU of a Hessenberg matrix shifted by sigma; O(n^2) factor,
/// O(n^2) solve. Used by inverse iteration.
class HessenbergShiftedLU {
 public:
  HessenbergShiftedLU(const DenseMatrix& h, Scalar sigma) : n_(h.rows), a_(h) {
    for (index_t i = 0; i < n_; ++i) {
      a_(i, i) -= sigma;
    }
    swaps_.assign(n_, 0);
    mult_.assign(n_, Scalar{0.0, 0.0});
    const double tiny = 1e-290;
    for (index_t k = 0; k + 1 < n_; ++k) {
      if (std::abs(a_(k + 1, k)) > std::abs(a_(k, k))) {
        swaps_[k] = 1;
        for (index_t j = k; j < n_; ++j) {
          std::swap(a_(k, j), a_(k + 1, j));
        }
      }
      if (std::abs(a_(k, k)) < tiny) { a_(k, k) = Scalar{tiny, 0.0}; }
      const Scalar m = a_(k + 1, k) / a_(k, k);
      mult_[k] = m;
      a_(k + 1, k) = Scalar{0.0, 0.0};
      for (index_t j = k + 1; j < n_; ++j) {
        a_(k + 1, j) -= m * a_(k, j);
      }
    }
    if (std::abs(a_(n_ - 1, n_ - 1)) < tiny) { a_(n_ - 1, n_ - 1) = Scalar{tiny, 0.0}; }
  }

  void solve_in_place(Vector& x) const {
    for (index_t k = 0; k + 1 < n_; ++k) {
      if (swaps_[k]) { std::swap(x[k], x[k + 1]); }
      x[k + 1] -= mult_[k] * x[k];
    }
    for (index_t ii = n_; ii-- > 0;) {
      Scalar acc = x[ii];
      for (index_t j = ii + 1; j < n_; ++j) {
        acc -= a_(ii, j) * x[j];
      }
      x[ii] = acc / a_(ii, ii);
    }
  }

 private:
  index_t n_;
  DenseMatrix a_;
  std::vector<int> swaps_;
  std::vector<Scalar> mult_;
};

}  // namespace detail

/// Eigenvalues of a dense matrix: balancing, Householder Hessenberg
/// reduction, single-shift complex QR with deflation.
inline std::vector<Scalar> dense_eigenvalues(DenseMatrix a) {
  require(a.rows == a.cols, "dense_eigenvalues: matrix must be square");
  if (a.rows == 0) { return {}; }
  detail::balance(a);
  detail::hessenberg_reduce(a, nullptr);
  return detail::hessenberg_qr_eigenvalues(a);
}

/// Strict interior count, with the boundary tie rule that a distance equal
/// to the radius within 1e-12 (absolute) counts as inside.
inline index_t count_inside(const std::vector<Scalar>& eigs, const Contour& contour) {
  index_t count = 0;
  for (Scalar lambda : eigs) {
    if (std::abs(lambda - contour.center) <= contour.radius + 1e-12) { ++count; }
  }
  return count;
}

struct SpectrumReport {
  std::vector<Scalar> eigenvalues;
  index_t inside_count = 0;
  double min_distance_to_origin = std::numeric_limits<double>::infinity();
};

inline SpectrumReport spectrum_report(std::vector<Scalar> eigs, const Contour& contour) {
  SpectrumReport rep;
  rep.inside_count = count_inside(eigs, contour);
  for (Scalar lambda : eigs) {
    rep.min_distance_to_origin = std::min(rep.min_distance_to_origin, std::abs(lambda));
  }
  rep.eigenvalues = std::move(eigs);
  return rep;
}

struct EigenvectorsResult {
  DenseMatrix vectors;          // one normalized column per eigenvalue inside
  std::vector<Scalar> values;   // matching eigenvalues
  std::vector<std::string> warnings;
};

/// Eigenvectors for the eigenvalues inside the contour, by inverse
/// iteration on the Hessenberg form with a seeded random start, transformed
/// back through the accumulated similarity. Within a cluster of nearly
/// equal eigenvalues the iterates are orthogonalized against the vectors
/// already accepted for that cluster so repeated eigenvalues yield
/// independent columns. Stagnation leaves a warning and keeps the best
/// vector.
inline EigenvectorsResult eigenvectors_inside(const DenseMatrix& a, const Contour& contour,
                                              std::uint64_t seed = 2024) {
  require(a.rows == a.cols, "eigenvectors_inside: matrix must be square");
  const index_t n = a.rows;
  EigenvectorsResult result;

  DenseMatrix work = a;
  const std::vector<double> scale = detail::balance(work);
  DenseMatrix q;
  detail::hessenberg_reduce(work, &q);
  const DenseMatrix hess = work;  // pristine copy; QR destroys its input
  DenseMatrix qr_work = work;
  std::vector<Scalar> eigs = detail::hessenberg_qr_eigenvalues(qr_work);

  std::vector<Scalar> inside;
  for (Scalar lambda : eigs) {
    if (std::abs(lambda - contour.center) <= contour.radius + 1e-12) {
      inside.push_back(lambda);
    }
  }
  std::sort(inside.begin(), inside.end(), [](Scalar x, Scalar y) {
    return std::abs(x) != std::abs(y) ? std::abs(x) < std::abs(y)
                                      : std::arg(x) < std::arg(y);
  });

  const double hnorm = hess.frobenius_norm();
  result.vectors = DenseMatrix(n, inside.size());
  result.values = inside;

  std::vector<Vector> cluster_vectors;  // Hessenberg-space vectors of the current cluster
  const double cluster_tol = 1e-8 * std::max(1.0, hnorm);
  Scalar cluster_value{0.0, 0.0};

  for (index_t idx = 0; idx < inside.size(); ++idx) {
    const Scalar lambda = inside[idx];
    if (idx == 0 || std::abs(lambda - cluster_value) > cluster_tol) {
      cluster_vectors.clear();
      cluster_value = lambda;
    }
    // small off-eigenvalue shift keeps H - sigma I invertible
    const double jitter = 1e-10 * std::max(1.0, hnorm) * (1.0 + static_cast<double>(cluster_vectors.size()));
    const Scalar sigma = lambda + Scalar{jitter, jitter};
    detail::HessenbergShiftedLU lu(hess, sigma);

    Vector y = randn_vector(n, mix_seed(seed, idx));
    double ynorm = norm2(y);
    scal(Scalar{1.0 / ynorm, 0.0}, y);
    double best_res = std::numeric_limits<double>::infinity();
    Vector best = y;
    bool hit_target = false;
    for (int it = 0; it < 8; ++it) {
      lu.solve_in_place(y);
      for (const Vector& prev : cluster_vectors) {
        const Scalar proj = hdot(prev, y);
        axpy(-proj, prev, y);
      }
      ynorm = norm2(y);
      if (ynorm == 0.0 || !all_finite(y)) { break; }
      scal(Scalar{1.0 / ynorm, 0.0}, y);
      // residual ||(H - lambda I) y|| relative to ||H||
      Vector hy(n, Scalar{0.0, 0.0});
      for (index_t j = 0; j < n; ++j) {
        const Scalar yj = y[j];
        if (yj == Scalar{0.0, 0.0}) { continue; }
        const index_t i_hi = std::min(j + 2, n);
        for (index_t i = 0; i < i_hi; ++i) {
          hy[i] += hess(i, j) * yj;
        }
      }
      axpy(-lambda, y, hy);
      const double res = norm2(hy) / std::max(hnorm, 1e-300);
      if (res < best_res) {
        best_res = res;
        best = y;
      }
      if (res <= 1e-12) {
        hit_target = true;
        break;
      }
    }
    if (!hit_target) {
      result.warnings.push_back("inverse iteration stagnated for eigenvalue index " +
                                std::to_string(idx) + " (residual " + std::to_string(best_res) +
                                "); best vector returned");
    }
    cluster_vectors.push_back(best);

    // back-transform: v = D (Q y)
    Vector v(n, Scalar{0.0, 0.0});
    for (index_t j = 0; j < n; ++j) {
      const Scalar yj = best[j];
      if (yj == Scalar{0.0, 0.0}) { continue; }
      const Scalar* qc = q.col(j);
      for (index_t i = 0; i < n; ++i) {
        v[i] += qc[i] * yj;
      }
    }
    for (index_t i = 0; i < n; ++i) {
      v[i] *= scale[i];
    }
    const double vnorm = norm2(v);
    if (vnorm > 0.0) { scal(Scalar{1.0 / vnorm, 0.0}, v); }
    result.vectors.set_col(idx, v);
  }
  return result;
}

/// Singular values by cyclic one-sided Jacobi, descending. Convergence:
/// every column pair satisfies |w_p^H w_q| <= 1e-14 ||w_p|| ||w_q||.
inline std::vector<double> singular_values(const DenseMatrix& a) {
  require(a.rows > 0 && a.cols > 0, "singular_values: empty matrix");
  DenseMatrix w = a;
  if (w.rows < w.cols) {
    // work on the conjugate transpose; singular values agree
    DenseMatrix t(w.cols, w.rows);
    for (index_t i = 0; i < w.rows; ++i) {
      for (index_t j = 0; j < w.cols; ++j) {
        t(j, i) = std::conj(w(i, j));
      }
    }
    w = std::move(t);
  }
  const index_t n = w.rows;
  const index_t m = w.cols;
  constexpr double tol = 1e-14;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (index_t p = 0; p + 1 < m; ++p) {
      for (index_t qcol = p + 1; qcol < m; ++qcol) {
        Scalar* wp = w.col(p);
        Scalar* wq = w.col(qcol);
        double alpha = 0.0;
        double beta = 0.0;
        Scalar gamma{0.0, 0.0};
        for (index_t i = 0; i < n; ++i) {
          alpha += std::norm(wp[i]);
          beta += std::norm(wq[i]);
          gamma += std::conj(wp[i]) * wq[i];
        }
        const double gabs = std::abs(gamma);
        if (gabs <= tol * std::sqrt(alpha * beta) || gabs == 0.0) { continue; }
        rotated = true;
        const Scalar phase = gamma / gabs;
        const double tau = (beta - alpha) / (2.0 * gabs);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Scalar ph_conj = std::conj(phase);
        for (index_t i = 0; i < n; ++i) {
          const Scalar vp = wp[i];
          const Scalar vq = wq[i];
          wp[i] = c * vp - s * ph_conj * vq;
          wq[i] = s * phase * vp + c * vq;
        }
      }
    }
    if (!rotated) { break; }
  }
  std::vector<double> sigma(m);
  for (index_t j = 0; j < m; ++j) {
    double acc = 0.0;
    const Scalar* wj = w.col(j);
    for (index_t i = 0; i < n; ++i) {
      acc += std::norm(wj[i]);
    }
    sigma[j] = std::sqrt(acc);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<double>());
  return sigma;
}

/// 2-norm condition number sigma_max / sigma_min; +inf when sigma_min = 0.
inline double cond2(const DenseMatrix& a) {
  const std::vector<double> sigma = singular_values(a);
  const double smax = sigma.front();
  const double smin = sigma.back();
  if (smax == 0.0) { return std::numeric_limits<double>::infinity(); }
  if (smin == 0.0) { return std::numeric_limits<double>::infinity(); }
  return smax / smin;
}

/// Ellipse E(c, d, a) in the complex plane: center c (real axis), focal
/// distance d, semi-major axis a.
struct Ellipse {
  double center = 0.0;
  double focal = 0.0;
  double semi_major = 0.0;
};

/// Bound validity on the real-axis configuration: the ellipse excludes the
/// origin when c - a > 0. delta < 1 is only meaningful when this holds.
inline bool ellipse_excludes_origin(const Ellipse& e) {
  return e.center - e.semi_major > 0.0;
}

/// The asymptotic Chebyshev convergence factor
///   delta = |(a + sqrt(a^2 - d^2)) / (c + sqrt(c^2 - d^2))|,
/// complex principal branch for degenerate a < d.
inline double gmres_bound_delta(const Ellipse& e) {
  const Scalar a{e.semi_major, 0.0};
  const Scalar c{e.center, 0.0};
  const Scalar d{e.focal, 0.0};
  const Scalar num = a + std::sqrt(a * a - d * d);
  const Scalar den = c + std::sqrt(c * c - d * d);
  require(std::abs(den) > 0.0, "gmres_bound_delta: c + sqrt(c^2 - d^2) must be nonzero");
  return std::abs(num / den);
}

/// R factor of a Householder QR (for the kappa_2(R22) diagnostic of the
/// deflated bound: pass V, take the trailing block).
inline DenseMatrix householder_qr_r(DenseMatrix a) {
  const index_t n = a.rows;
  const index_t m = a.cols;
  Vector u(n);
  for (index_t k = 0; k < std::min(n, m); ++k) {
    double xnorm = 0.0;
    for (index_t i = k; i < n; ++i) {
      xnorm += std::norm(a(i, k));
    }
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) { continue; }
    const Scalar x0 = a(k, k);
    const Scalar phase = (x0 == Scalar{0.0, 0.0}) ? Scalar{1.0, 0.0} : x0 / std::abs(x0);
    const Scalar alpha = -phase * xnorm;
    double unorm2 = 0.0;
    for (index_t i = k; i < n; ++i) {
      u[i] = a(i, k);
    }
    u[k] -= alpha;
    for (index_t i = k; i < n; ++i) {
      unorm2 += std::norm(u[i]);
    }
    if (unorm2 == 0.0) { continue; }
    const double beta = 2.0 / unorm2;
    for (index_t j = k; j < m; ++j) {
      Scalar dot{0.0, 0.0};
      for (index_t i = k; i < n; ++i) {
        dot += std::conj(u[i]) * a(i, j);
      }
      dot *= beta;
      for (index_t i = k; i < n; ++i) {
        a(i, j) -= dot * u[i];
      }
    }
    a(k, k) = alpha;
    for (index_t i = k + 1; i < n; ++i) {
      a(i, k) = Scalar{0.0, 0.0};
    }
  }
  DenseMatrix r(std::min(n, m), m);
  for (index_t i = 0; i < r.rows; ++i) {
    for (index_t j = i; j < m; ++j) {
      r(i, j) = a(i, j);
    }
  }
  return r;
}

/// kappa_2(R22) from the QR of an eigenvector matrix V split after the
/// first m columns. Diagnostic only.
inline double r22_cond(const DenseMatrix& v, index_t m) {
  require(m < v.cols, "r22_cond: split index must leave a trailing block");
  DenseMatrix r = householder_qr_r(v);
  DenseMatrix r22(r.rows - m, v.cols - m);
  for (index_t i = m; i < r.rows; ++i) {
    for (index_t j = m; j < v.cols; ++j) {
      r22(i - m, j - m) = r(i, j);
    }
  }
  return cond2(r22);
}

}  // namespace riesz
