#pragma once

#include "riesz/sparse.hpp"

namespace riesz {

/// 2-D steady convection-diffusion test problem on the unit square,
///   -u_xx - u_yy - Re (p u_x + q u_y) = f,   u = g on the boundary,
/// with p(x,y) = -sin(x) cos(pi y), q(x,y) = cos(pi x) sin(y), discretized
/// by 5-point central differences on an n x n interior grid, h = 1/(n+1).
/// Rows are scaled by h^2 (diagonal 4); eigenvalue magnitudes quoted
/// elsewhere in this project assume that scaling.
struct ConvDiffSpec {
  index_t interior = 99;    // grid points per axis; N = interior^2
  double reynolds = 8000.0;

  double h() const { return 1.0 / static_cast<double>(interior + 1); }
  index_t dim() const { return interior * interior; }
};

inline double convection_p(double x, double y) { return -std::sin(x) * std::cos(M_PI * y); }
inline double convection_q(double x, double y) { return std::cos(M_PI * x) * std::sin(y); }

/// Assembles the h^2-scaled operator. Natural row-major ordering, x
/// fastest: node (i, j) at (x, y) = ((i+1)h, (j+1)h) has index j*n + i.
/// Dirichlet boundary values are eliminated (their columns are dropped).
inline SparseMatrix convdiff_assemble(const ConvDiffSpec& spec) {
  require(spec.interior >= 1, "convdiff_assemble: need at least one interior point");
  const index_t n = spec.interior;
  const double h = spec.h();
  const double g = spec.reynolds * h / 2.0;
  std::vector<std::tuple<index_t, index_t, Scalar>> trip;
  trip.reserve(5 * n * n);
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < n; ++i) {
      const double x = (i + 1) * h;
      const double y = (j + 1) * h;
      const double p = convection_p(x, y);
      const double q = convection_q(x, y);
      const index_t k = j * n + i;
      trip.emplace_back(k, k, Scalar{4.0, 0.0});
      if (i + 1 < n) { trip.emplace_back(k, k + 1, Scalar{-1.0 - g * p, 0.0}); }
      if (i >= 1) { trip.emplace_back(k, k - 1, Scalar{-1.0 + g * p, 0.0}); }
      if (j + 1 < n) { trip.emplace_back(k, k + n, Scalar{-1.0 - g * q, 0.0}); }
      if (j >= 1) { trip.emplace_back(k, k - n, Scalar{-1.0 + g * q, 0.0}); }
    }
  }
  return SparseMatrix::from_triplets(n * n, n * n, std::move(trip));
}

/// b = A 1: the exact solution is the all-ones vector, which makes
/// relerr = ||x - 1|| / ||1|| computable.
inline Vector rhs_ones(const SparseMatrix& a) {
  require(a.n_rows == a.n_cols, "rhs_ones: matrix must be square");
  return spmv(a, Vector(a.n_cols, Scalar{1.0, 0.0}));
}

/// Manufactured solution u = sin(4x + 6y) sampled at the interior nodes.
inline Vector manufactured_solution(const ConvDiffSpec& spec) {
  const index_t n = spec.interior;
  const double h = spec.h();
  Vector u(spec.dim());
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < n; ++i) {
      u[j * n + i] = Scalar{std::sin(4.0 * (i + 1) * h + 6.0 * (j + 1) * h), 0.0};
    }
  }
  return u;
}

/// Source f = 52 sin(4x+6y) - Re (4p + 6q) cos(4x+6y) for the manufactured
/// solution, assembled as the h^2-scaled right-hand side including the
/// Dirichlet boundary lifting. Unused by the experiment presets, which use
/// b = A 1.
inline Vector manufactured_rhs(const ConvDiffSpec& spec) {
  const index_t n = spec.interior;
  const double h = spec.h();
  const double g = spec.reynolds * h / 2.0;
  auto u_exact = [](double x, double y) { return std::sin(4.0 * x + 6.0 * y); };
  Vector b(spec.dim());
  for (index_t j = 0; j < n; ++j) {
    for (index_t i = 0; i < n; ++i) {
      const double x = (i + 1) * h;
      const double y = (j + 1) * h;
      const double p = convection_p(x, y);
      const double q = convection_q(x, y);
      const double f = 52.0 * std::sin(4.0 * x + 6.0 * y) -
                       spec.reynolds * (4.0 * p + 6.0 * q) * std::cos(4.0 * x + 6.0 * y);
      double acc = h * h * f;
      // boundary neighbors move to the right-hand side
      if (i + 1 == n) { acc -= (-1.0 - g * p) * u_exact(x + h, y); }
      if (i == 0) { acc -= (-1.0 + g * p) * u_exact(x - h, y); }
      if (j + 1 == n) { acc -= (-1.0 - g * q) * u_exact(x, y + h); }
      if (j == 0) { acc -= (-1.0 + g * q) * u_exact(x, y - h); }
      b[j * n + i] = Scalar{acc, 0.0};
    }
  }
  return b;
}

}  // namespace riesz
