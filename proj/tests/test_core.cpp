#include <catch2/catch.hpp>

#include "riesz/core.hpp"
#include "riesz/sparse.hpp"
#include "support/oracles.hpp"

using namespace riesz;

TEST_CASE("hdot conjugates the left argument") {
  const Scalar i{0.0, 1.0};
  CHECK(hdot({i, {0, 0}}, {i, {0, 0}}) == Scalar{1.0, 0.0});
  CHECK(hdot({{1, 0}, {0, 0}}, {{0, 0}, {1, 0}}) == Scalar{0.0, 0.0});
  // conj(1+i)*1 + conj(2)*1 = 3 - i
  CHECK(hdot({{1, 1}, {2, 0}}, {{1, 0}, {1, 0}}) == Scalar{3.0, -1.0});
  CHECK_THROWS_AS(hdot(Vector(2), Vector(3)), std::invalid_argument);
}

TEST_CASE("hdot hermitian symmetry on random vectors") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto x = oracles::random_dense_complex(17, 1, 100 + s).col_vector(0);
    auto y = oracles::random_dense_complex(17, 1, 200 + s).col_vector(0);
    const Scalar a = hdot(x, y);
    const Scalar b = hdot(y, x);
    CHECK(std::abs(a - std::conj(b)) <= 1e-14 * std::abs(a));
  }
}

TEST_CASE("norm scaling to a few ulp") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto x = oracles::random_dense_complex(31, 1, 300 + s).col_vector(0);
    const Scalar alpha{-1.7 + 0.1 * static_cast<double>(s), 0.4};
    Vector ax = x;
    scal(alpha, ax);
    const double lhs = norm2(ax);
    const double rhs = std::abs(alpha) * norm2(x);
    CHECK(std::abs(lhs - rhs) <= 4.0 * 2.2e-16 * rhs);
  }
}

TEST_CASE("spmv basic cases") {
  SECTION("identity") {
    auto a = SparseMatrix::identity(3);
    CHECK(spmv(a, {{1, 0}, {2, 0}, {3, 0}}) == Vector{{1, 0}, {2, 0}, {3, 0}});
  }
  SECTION("zero matrix annihilates") {
    SparseMatrix z = SparseMatrix::from_triplets(2, 2, {});
    CHECK(spmv(z, {{5, 1}, {-3, 2}}) == Vector{{0, 0}, {0, 0}});
  }
  SECTION("hand oracle") {
    auto a = SparseMatrix::from_triplets(
        2, 2, {{0, 0, {1, 0}}, {0, 1, {2, 0}}, {1, 0, {3, 0}}, {1, 1, {4, 0}}});
    CHECK(spmv(a, {{1, 0}, {1, 0}}) == Vector{{3, 0}, {7, 0}});
  }
  SECTION("dimension mismatch") {
    auto a = SparseMatrix::identity(3);
    CHECK_THROWS_AS(spmv(a, Vector(2)), std::invalid_argument);
  }
}

TEST_CASE("spmv agrees with dense oracle on random sparse matrices") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const index_t n = 8 + 3 * s;
    auto a = oracles::random_sparse(n, 0.2, 400 + s);
    auto x = oracles::random_dense_complex(n, 1, 500 + s).col_vector(0);
    const Vector y = spmv(a, x);
    const Vector ref = oracles::dense_matvec(to_dense(a), x);
    CHECK(norm2(subtract(y, ref)) <= 1e-13 * norm2(ref));
  }
}

TEST_CASE("from_triplets sums duplicates and validates") {
  index_t dups = 0;
  auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, {1, 0}}, {0, 0, {2, 0}}, {1, 1, {1, 0}}},
                                       &dups);
  CHECK(dups == 1);
  CHECK(a.nnz() == 2);
  CHECK(a.at(0, 0) == Scalar{3.0, 0.0});
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{2, 0, {1, 0}}}), std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 0, {nan, 0}}}), std::invalid_argument);
  // columns strictly increasing within each row
  auto b = SparseMatrix::from_triplets(2, 3, {{0, 2, {1, 0}}, {0, 0, {2, 0}}, {0, 1, {3, 0}}});
  REQUIRE(b.row_ptr[1] == 3);
  CHECK(b.col_idx[0] < b.col_idx[1]);
  CHECK(b.col_idx[1] < b.col_idx[2]);
}

TEST_CASE("conjugate transpose round trip") {
  auto a = oracles::random_sparse(13, 0.3, 7);
  auto at = conj_transpose(a);
  auto att = conj_transpose(at);
  REQUIRE(att.nnz() == a.nnz());
  const DenseMatrix da = to_dense(a);
  const DenseMatrix dat = to_dense(at);
  for (index_t i = 0; i < 13; ++i) {
    for (index_t j = 0; j < 13; ++j) {
      CHECK(dat(j, i) == std::conj(da(i, j)));
    }
  }
}

TEST_CASE("dense gemv and adjoint match the naive oracle") {
  auto a = oracles::random_dense_complex(9, 5, 11);
  auto x = oracles::random_dense_complex(5, 1, 12).col_vector(0);
  auto y = oracles::random_dense_complex(9, 1, 13).col_vector(0);
  CHECK(norm2(subtract(gemv(a, x), oracles::dense_matvec(a, x))) <= 1e-14 * norm2(x));
  // <y, A x> == <A^H y, x>
  const Scalar lhs = hdot(y, gemv(a, x));
  const Scalar rhs = hdot(gemv_adjoint(a, y), x);
  CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(lhs));
}

TEST_CASE("dense LU solves and adjoint-solves") {
  auto a = oracles::random_dense_complex(12, 12, 21);
  for (index_t i = 0; i < 12; ++i) {
    a(i, i) += Scalar{6.0, 0.0};
  }
  auto b = oracles::random_dense_complex(12, 1, 22).col_vector(0);
  const DenseLU lu = DenseLU::factor(a);
  CHECK_FALSE(lu.nearly_singular());

  const Vector x = lu.solve(b);
  const Vector xref = oracles::dense_solve(a, b);
  CHECK(norm2(subtract(x, xref)) <= 1e-11 * norm2(xref));

  // adjoint: residual of A^H y = b
  const Vector y = lu.solve_adjoint(b);
  DenseMatrix ah(12, 12);
  for (index_t i = 0; i < 12; ++i) {
    for (index_t j = 0; j < 12; ++j) {
      ah(i, j) = std::conj(a(j, i));
    }
  }
  const Vector res = subtract(oracles::dense_matvec(ah, y), b);
  CHECK(norm2(res) <= 1e-11 * norm2(b));
}

TEST_CASE("dense LU flags numerically singular input") {
  DenseMatrix a(3, 3);
  a(0, 0) = {1.0, 0.0};
  a(0, 1) = {2.0, 0.0};
  a(1, 0) = {2.0, 0.0};
  a(1, 1) = {4.0, 0.0};  // row 1 = 2 * row 0
  a(2, 2) = {1.0, 0.0};
  CHECK(DenseLU::factor(a).nearly_singular());
}

TEST_CASE("seeded generators are reproducible") {
  CHECK(randn_vector(8, 42) == randn_vector(8, 42));
  CHECK(randn_vector(8, 42) != randn_vector(8, 43));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  // probes are real draws promoted to complex
  for (Scalar v : randn_vector(8, 7)) {
    CHECK(v.imag() == 0.0);
  }
}
