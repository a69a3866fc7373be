#include <catch2/catch.hpp>

#include "riesz/quadrature.hpp"

using namespace riesz;

TEST_CASE("closed forms for the small orders") {
  SECTION("q = 1 is the midpoint rule") {
    auto r = legendre_gauss(1);
    REQUIRE(r.nodes.size() == 1);
    CHECK(r.nodes[0] == 0.0);
    CHECK(r.weights[0] == Approx(2.0).epsilon(1e-15));
  }
  SECTION("q = 2 nodes are +-1/sqrt(3)") {
    auto r = legendre_gauss(2);
    CHECK(r.nodes[0] == Approx(-0.5773502691896257).margin(1e-15));
    CHECK(r.nodes[1] == Approx(+0.5773502691896257).margin(1e-15));
    CHECK(r.weights[0] == Approx(1.0).margin(1e-14));
    CHECK(r.weights[1] == Approx(1.0).margin(1e-14));
  }
  SECTION("q = 3 closed form") {
    auto r = legendre_gauss(3);
    CHECK(r.nodes[0] == Approx(-0.7745966692414834).margin(1e-15));
    CHECK(r.nodes[1] == 0.0);
    CHECK(r.nodes[2] == Approx(+0.7745966692414834).margin(1e-15));
    CHECK(r.weights[0] == Approx(5.0 / 9.0).margin(1e-14));
    CHECK(r.weights[1] == Approx(8.0 / 9.0).margin(1e-14));
    CHECK(r.weights[2] == Approx(5.0 / 9.0).margin(1e-14));
  }
}

TEST_CASE("order zero is rejected") {
  CHECK_THROWS_AS(legendre_gauss(0), std::invalid_argument);
}

TEST_CASE("monomials up to degree 2q-1 integrate exactly") {
  for (index_t q = 1; q <= 32; ++q) {
    auto r = legendre_gauss(q);
    for (index_t p = 0; p <= 2 * q - 1; ++p) {
      double acc = 0.0;
      for (index_t k = 0; k < q; ++k) {
        acc += r.weights[k] * std::pow(r.nodes[k], static_cast<double>(p));
      }
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1.0);
      CHECK(std::abs(acc - exact) <= 1e-12);
    }
  }
}

TEST_CASE("symmetry holds exactly by construction") {
  for (index_t q : {2, 5, 16, 33, 64}) {
    auto r = legendre_gauss(q);
    for (index_t k = 0; k < q; ++k) {
      CHECK(r.nodes[k] == -r.nodes[q - 1 - k]);
      CHECK(r.weights[k] == r.weights[q - 1 - k]);
    }
    for (index_t k = 1; k < q; ++k) {
      CHECK(r.nodes[k] > r.nodes[k - 1]);
    }
  }
}

TEST_CASE("weights are positive and sum to 2") {
  for (index_t q : {1, 2, 3, 16, 100, 512}) {
    auto r = legendre_gauss(q);
    double sum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 2.0) <= 1e-14);
  }
}

namespace {

// long double recurrence: isolates the root accuracy from double-precision
// evaluation noise
long double legendre_ld(index_t q, long double x) {
  long double p0 = 1.0L;
  long double p1 = x;
  for (index_t j = 2; j <= q; ++j) {
    const long double pj = ((2.0L * j - 1.0L) * x * p1 - (j - 1.0L) * p0) / j;
    p0 = p1;
    p1 = pj;
  }
  return q == 0 ? p0 : p1;
}

}  // namespace

TEST_CASE("nodes are Legendre roots to the precision the type allows") {
  // up to q = 16 the rounded double node meets |P| <= 1e-15 outright
  for (index_t q : {4, 8, 16}) {
    auto r = legendre_gauss(q);
    for (double x : r.nodes) {
      CHECK(std::abs(static_cast<double>(legendre_ld(q, x))) <= 1e-15);
    }
  }
  // at q = 32 the residual is ulp-limited (slope * ulp(node) ~ 3e-15): the
  // returned node is the correctly rounded root, measured in long double
  for (index_t q : {32}) {
    auto r = legendre_gauss(q);
    for (double x : r.nodes) {
      CHECK(std::abs(static_cast<double>(legendre_ld(q, x))) <= 5e-15);
    }
  }
}
