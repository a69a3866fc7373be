#include <catch2/catch.hpp>

#include "riesz/cge.hpp"
#include "riesz/deflation.hpp"
#include "support/oracles.hpp"

using namespace riesz;

namespace {

const CgeParams kPaperParams{1e-8, 1e-2};

bool column_equals(const DenseMatrix& a, index_t ja, const DenseMatrix& b, index_t jb) {
  for (index_t i = 0; i < a.rows; ++i) {
    if (a(i, ja) != b(i, jb)) { return false; }
  }
  return true;
}

/// Planted-rank matrix Z = B C with B (n x r), C (r x m).
DenseMatrix planted(index_t n, index_t m, index_t r, std::uint64_t seed) {
  auto b = oracles::random_dense_complex(n, r, seed);
  auto c = oracles::random_dense_complex(r, m, seed + 1);
  return matmul(b, c);
}

}  // namespace

TEST_CASE("the zero matrix has rank zero and an empty selection") {
  DenseMatrix z(5, 3);
  auto r = cge(z, kPaperParams);
  CHECK(r.rank == 0);
  CHECK(r.z.cols == 0);
  CHECK(r.selected.empty());
}

TEST_CASE("orthonormal columns pass through unchanged") {
  DenseMatrix z(3, 2);
  z(0, 0) = Scalar{1.0, 0.0};
  z(1, 1) = Scalar{1.0, 0.0};
  auto r = cge(z, kPaperParams);
  CHECK(r.rank == 2);
  CHECK(r.selected == std::vector<index_t>{0, 1});
  CHECK(r.z.data == z.data);
}

TEST_CASE("[z, 2z] keeps the larger column") {
  DenseMatrix z(4, 2);
  Vector unit = oracles::random_dense_complex(4, 1, 3).col_vector(0);
  scal(Scalar{1.0 / norm2(unit), 0.0}, unit);
  z.set_col(0, unit);
  Vector twice = unit;
  scal(Scalar{2.0, 0.0}, twice);
  z.set_col(1, twice);
  auto r = cge(z, kPaperParams);
  REQUIRE(r.rank == 1);
  // complete pivot is Z-hat(2,2) = 4, so column 2 is swapped to the front
  CHECK(r.selected == std::vector<index_t>{1});
  CHECK(column_equals(r.z, 0, z, 1));
}

TEST_CASE("planted rank agrees with the SVD oracle") {
  auto z = planted(50, 10, 6, 11);
  auto r = cge(z, kPaperParams);
  CHECK(r.rank == 6);
  CHECK(r.rank == oracles::svd_rank(z, std::sqrt(kPaperParams.tol_cge)));
}

TEST_CASE("output columns are a sub-multiset of the input columns") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto z = planted(20, 8, 3 + s % 4, 100 + s);
    auto r = cge(z, kPaperParams);
    REQUIRE(r.selected.size() == r.rank);
    for (index_t j = 0; j < r.rank; ++j) {
      CHECK(column_equals(r.z, j, z, r.selected[j]));
    }
  }
}

TEST_CASE("rank is invariant under column permutations") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    auto z = planted(24, 9, 4, 200 + s);
    auto r0 = cge(z, kPaperParams);
    // rotate columns
    DenseMatrix zp(z.rows, z.cols);
    for (index_t j = 0; j < z.cols; ++j) {
      zp.set_col(j, z.col_vector((j + 3) % z.cols));
    }
    auto r1 = cge(zp, kPaperParams);
    CHECK(r0.rank == r1.rank);
  }
}

TEST_CASE("rank(Z) equals rank(Z^H Z) against the oracle") {
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto z = planted(30, 8, 5, 300 + s);
    const DenseMatrix zh = matmul_adjoint_left(z, z);
    // singular values of Z-hat are the squares of Z's
    CHECK(oracles::svd_rank(z, 0.1) == oracles::svd_rank(zh, 0.01));
  }
}

TEST_CASE("alpha gates the all-small case") {
  auto z = oracles::random_dense_complex(10, 3, 401);
  for (Scalar& v : z.data) {
    v *= Scalar{1e-6, 0.0};  // max |Z^H Z| ~ 1e-11 < alpha
  }
  auto r = cge(z, kPaperParams);
  CHECK(r.rank == 0);
  // but alpha only gates the all-zero case: a healthy matrix of the same
  // scale, once above alpha, is ranked by tol_cge alone
  auto z2 = oracles::random_dense_complex(10, 3, 402);
  for (Scalar& v : z2.data) {
    v *= Scalar{1e-3, 0.0};
  }
  CHECK(cge(z2, kPaperParams).rank == 3);
}

TEST_CASE("cge rescues a basis whose raw M is singular") {
  auto a = oracles::random_sparse(20, 0.3, 501, 5.0);
  auto z = planted(20, 6, 3, 502);  // three independent directions, six columns
  CHECK_THROWS_AS(build_basis(a, z), std::runtime_error);
  auto r = cge(z, kPaperParams);
  CHECK(r.rank == 3);
  auto basis = build_basis(a, r.z);
  CHECK(basis.rank() == 3);
}

TEST_CASE("parameter validation") {
  DenseMatrix z(3, 1);
  z(0, 0) = Scalar{1.0, 0.0};
  CHECK_THROWS_AS(cge(z, CgeParams{0.0, 1e-2}), std::invalid_argument);
  CHECK_THROWS_AS(cge(z, CgeParams{1e-8, 1.0}), std::invalid_argument);
  CHECK(cge(z, kPaperParams).rank == 1);
}
