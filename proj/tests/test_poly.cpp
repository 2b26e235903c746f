#include "clarklab/poly.hpp"

#include <algorithm>
#include <complex>
#include <random>

#include "doctest.h"

using namespace clarklab;

TEST_CASE("product of linear factors expands correctly") {
  // (z - 1)(z - 2) = z^2 - 3z + 2
  Poly p = poly_from_roots({cplx(1.0, 0.0), cplx(2.0, 0.0)});
  REQUIRE(p.size() == 3);
  CHECK(std::abs(p(0) - cplx(2.0, 0.0)) < 1e-14);
  CHECK(std::abs(p(1) - cplx(-3.0, 0.0)) < 1e-14);
  CHECK(std::abs(p(2) - cplx(1.0, 0.0)) < 1e-14);
}

TEST_CASE("empty root list gives the constant one") {
  Poly p = poly_from_roots({});
  REQUIRE(p.size() == 1);
  CHECK(std::abs(p(0) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("multiplication matches evaluation at sample points") {
  Poly a(3), b(2);
  a << cplx(1, 0), cplx(0, 2), cplx(-1, 0);
  b << cplx(3, -1), cplx(0, 1);
  Poly ab = poly_mul(a, b);
  for (cplx z : {cplx(0.3, 0.2), cplx(-1.0, 0.5), cplx(0.0, 0.0)}) {
    CHECK(std::abs(poly_eval(ab, z) - poly_eval(a, z) * poly_eval(b, z)) <
          1e-13);
  }
}

TEST_CASE("addition pads the shorter operand") {
  Poly a(2), b(4);
  a << cplx(1, 0), cplx(1, 0);
  b << cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(5, 0);
  Poly s = poly_add(a, b);
  REQUIRE(s.size() == 4);
  CHECK(std::abs(poly_eval(s, cplx(2, 0)) - cplx(43, 0)) < 1e-12);
}

TEST_CASE("derivative of 1 + 2z + 3z^2") {
  Poly p(3);
  p << cplx(1, 0), cplx(2, 0), cplx(3, 0);
  Poly d = poly_derivative(p);
  REQUIRE(d.size() == 2);
  CHECK(std::abs(d(0) - cplx(2, 0)) < 1e-15);
  CHECK(std::abs(d(1) - cplx(6, 0)) < 1e-15);
}

TEST_CASE("reflection satisfies the circle identity") {
  // q(z) = z^n conj(p(1/conj(z))) means q(z) = z^n conj(p(z)) for |z| = 1.
  Poly p(3);
  p << cplx(0.5, 0.25), cplx(-1.0, 0.0), cplx(0.0, 1.0);
  const int n = 4;
  Poly q = poly_reflect(p, n);
  for (double t : {0.1, 0.37, 0.9}) {
    cplx z = std::polar(1.0, kTau * t);
    cplx lhs = poly_eval(q, z);
    cplx rhs = std::pow(z, n) * std::conj(poly_eval(p, z));
    CHECK(std::abs(lhs - rhs) < 1e-13);
  }
}

TEST_CASE("deflation removes a known root") {
  Poly p = poly_from_roots({cplx(0.5, 0.0), cplx(-0.25, 0.5)});
  Poly q = poly_deflate(p, cplx(0.5, 0.0));
  REQUIRE(q.size() == 2);
  CHECK(std::abs(poly_eval(q, cplx(-0.25, 0.5))) < 1e-13);
}

TEST_CASE("companion roots recover random factorizations") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<cplx> roots;
    const int deg = 1 + static_cast<int>(rng() % 6);
    for (int k = 0; k < deg; ++k) roots.emplace_back(u(rng), u(rng));
    Poly p = poly_from_roots(roots);
    std::vector<cplx> found = poly_roots(p);
    REQUIRE(found.size() == roots.size());
    // greedy matching is fine at these degrees
    for (cplx r : roots) {
      double best = 1e9;
      for (cplx f : found) best = std::min(best, std::abs(f - r));
      CHECK(best < 1e-8);
    }
  }
}

TEST_CASE("root finder strips negligible leading coefficients") {
  Poly p(4);
  p << cplx(-0.25, 0), cplx(1.0, 0), cplx(0, 0), cplx(1e-16, 0);
  std::vector<cplx> found = poly_roots(p);
  REQUIRE(found.size() == 1);
  CHECK(std::abs(found[0] - cplx(0.25, 0)) < 1e-12);
}
