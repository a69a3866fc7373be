#include <catch2/catch.hpp>

#include "riesz/eigtools.hpp"
#include "riesz/gmres.hpp"
#include "riesz/problems.hpp"
#include "support/oracles.hpp"

using namespace riesz;

TEST_CASE("the Re = 0 Laplacian on a 2x2 grid has the known spectrum") {
  ConvDiffSpec spec;
  spec.interior = 2;
  spec.reynolds = 0.0;
  auto eigs = dense_eigenvalues(to_dense(convdiff_assemble(spec)));
  std::vector<double> re;
  for (Scalar e : eigs) {
    CHECK(std::abs(e.imag()) <= 1e-12);
    re.push_back(e.real());
  }
  std::sort(re.begin(), re.end());
  const std::vector<double> want{2.0, 4.0, 4.0, 6.0};
  for (index_t i = 0; i < 4; ++i) {
    CHECK(re[i] == Approx(want[i]).margin(1e-12));
  }
}

TEST_CASE("Re = 0 gives an exactly symmetric matrix") {
  ConvDiffSpec spec;
  spec.interior = 7;
  spec.reynolds = 0.0;
  auto a = convdiff_assemble(spec);
  auto at = conj_transpose(a);
  CHECK(a.row_ptr == at.row_ptr);
  CHECK(a.col_idx == at.col_idx);
  CHECK(a.values == at.values);
}

TEST_CASE("stencil bookkeeping") {
  for (index_t n : {2, 5, 9}) {
    ConvDiffSpec spec;
    spec.interior = n;
    spec.reynolds = 8000.0;
    auto a = convdiff_assemble(spec);
    CHECK(a.nnz() == 5 * n * n - 4 * n);
    CHECK(a.n_rows == n * n);
    // interior rows sum to zero for every Re; east+west and north+south
    // pair to -2 row by row
    for (index_t j = 1; j + 1 < n; ++j) {
      for (index_t i = 1; i + 1 < n; ++i) {
        const index_t k = j * n + i;
        Scalar row_sum{0.0, 0.0};
        for (index_t p = a.row_ptr[k]; p < a.row_ptr[k + 1]; ++p) {
          row_sum += a.values[p];
        }
        CHECK(std::abs(row_sum) <= 1e-12);
        CHECK(std::abs(a.at(k, k + 1) + a.at(k, k - 1) - Scalar{-2.0, 0.0}) <= 1e-13);
        CHECK(std::abs(a.at(k, k + n) + a.at(k, k - n) - Scalar{-2.0, 0.0}) <= 1e-13);
      }
    }
  }
}

TEST_CASE("rhs_ones basics") {
  CHECK(rhs_ones(SparseMatrix::identity(3)) == Vector(3, Scalar{1.0, 0.0}));
  ConvDiffSpec spec;
  spec.interior = 6;
  spec.reynolds = 0.0;
  auto a = convdiff_assemble(spec);
  const Vector b = rhs_ones(a);
  // away from the boundary the stencil sums to zero; adjacent rows are positive
  for (index_t j = 0; j < 6; ++j) {
    for (index_t i = 0; i < 6; ++i) {
      const index_t k = j * 6 + i;
      const bool boundary_adjacent = i == 0 || i == 5 || j == 0 || j == 5;
      if (boundary_adjacent) {
        CHECK(b[k].real() > 0.0);
      } else {
        CHECK(std::abs(b[k]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("reduced meshes show the near-origin cluster") {
  // frozen from an independent eigensolver: n = 13 has 1 eigenvalue inside
  // circle(0, 0.65) with min |lambda| ~ 0.1708; n = 21 has 2, min ~ 0.0759
  {
    ConvDiffSpec spec;
    spec.interior = 13;
    spec.reynolds = 8000.0;
    auto rep = spectrum_report(dense_eigenvalues(to_dense(convdiff_assemble(spec))),
                               Contour{{0, 0}, 0.65, 16});
    CHECK(rep.inside_count == 1);
    CHECK(rep.min_distance_to_origin == Approx(0.170845).epsilon(1e-3));
  }
  {
    ConvDiffSpec spec;
    spec.interior = 21;
    spec.reynolds = 8000.0;
    auto rep = spectrum_report(dense_eigenvalues(to_dense(convdiff_assemble(spec))),
                               Contour{{0, 0}, 0.65, 16});
    CHECK(rep.inside_count == 2);
    CHECK(rep.min_distance_to_origin == Approx(0.075917).epsilon(1e-3));
  }
}

TEST_CASE("manufactured solution converges at second order") {
  // discrete solution vs u = sin(4x + 6y) at Re = 1: the max-norm error
  // drops by ~4x when h halves
  auto solve_error = [](index_t n) {
    ConvDiffSpec spec;
    spec.interior = n;
    spec.reynolds = 1.0;
    auto a = convdiff_assemble(spec);
    const Vector b = manufactured_rhs(spec);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    cfg.maxit = 4 * n * n;
    auto rep = gmres(make_operator(a), b, cfg);
    REQUIRE(rep.converged);
    const Vector u = manufactured_solution(spec);
    double err = 0.0;
    for (index_t i = 0; i < u.size(); ++i) {
      err = std::max(err, std::abs(rep.x[i] - u[i]));
    }
    return err;
  };
  const double e1 = solve_error(15);  // h = 1/16
  const double e2 = solve_error(31);  // h = 1/32
  CHECK(e1 / e2 == Approx(4.0).margin(1.0));
}
