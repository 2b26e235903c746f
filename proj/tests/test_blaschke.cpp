#include "clarklab/blaschke.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

using namespace clarklab;

namespace {

FiniteBlaschke monomial(int n) {
  return FiniteBlaschke(std::vector<cplx>(n, cplx(0, 0)), UnitPoint());
}

}  // namespace

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(FiniteBlaschke({}, UnitPoint()), Error);
  CHECK_THROWS_AS(FiniteBlaschke({cplx(0.3, 0)}, UnitPoint()), Error);
  CHECK_THROWS_AS(FiniteBlaschke({cplx(0, 0), cplx(0.999999999999, 0)},
                                 UnitPoint()),
                  Error);
}

TEST_CASE("monomials evaluate as plain powers") {
  FiniteBlaschke t3 = monomial(3);
  cplx z(0.3, -0.4);
  CHECK(std::abs(t3.evaluate(z) - z * z * z) < 1e-14);
  CHECK(std::abs(t3.derivative(z) - 3.0 * z * z) < 1e-13);
  CHECK(t3.degree() == 3);
}

TEST_CASE("rational form agrees with the factored form") {
  FiniteBlaschke b({cplx(0, 0), cplx(0.4, 0.3), cplx(-0.2, 0.5)},
                   UnitPoint::from_arg_frac(0.15));
  for (double t : {0.0, 0.21, 0.68}) {
    cplx z = 0.9 * std::polar(1.0, kTau * t);
    cplx num = poly_eval(b.numerator(), z);
    cplx den = poly_eval(b.denominator(), z);
    CHECK(std::abs(num / den - b.evaluate(z)) < 1e-13);
  }
  // inner function: modulus one on the circle
  for (double t : {0.1, 0.5, 0.77}) {
    cplx z = std::polar(1.0, kTau * t);
    CHECK(std::abs(std::abs(b.evaluate(z)) - 1.0) < 1e-13);
  }
  // vanishing at the origin because one zero sits there
  CHECK(std::abs(b.evaluate(cplx(0, 0))) < 1e-15);
}

TEST_CASE("evaluation domain guards") {
  FiniteBlaschke b = monomial(2);
  CHECK_THROWS_AS(b.evaluate(cplx(1.5, 0)), Error);
}

TEST_CASE("boundary derivative of a monomial is its degree") {
  FiniteBlaschke t4 = monomial(4);
  CHECK(t4.boundary_derivative(UnitPoint::from_arg_frac(0.3)) ==
        doctest::Approx(4.0));
  CHECK(t4.derivative_sup_bound() >= 4.0);
}

TEST_CASE("level set of z^2 at 1") {
  FiniteBlaschke t2 = monomial(2);
  std::vector<UnitPoint> pts = level_set(t2, UnitPoint());
  REQUIRE(pts.size() == 2);
  CHECK(std::abs(pts[0].value() - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(pts[1].value() - cplx(-1, 0)) < 1e-12);
}

TEST_CASE("clark measure of z^2 at 1 is the half-half measure") {
  AtomicMeasure mu = clark_measure(monomial(2), UnitPoint());
  REQUIRE(mu.size() == 2);
  CHECK(mu.atom(0).weight == doctest::Approx(0.5));
  CHECK(mu.atom(1).weight == doctest::Approx(0.5));
  CHECK(mu.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("clark weights are reciprocal boundary derivatives") {
  FiniteBlaschke b({cplx(0, 0), cplx(0.5, 0.1)}, UnitPoint::from_arg_frac(0.4));
  for (double ca : {0.0, 0.3}) {
    AtomicMeasure mu = clark_measure(b, UnitPoint::from_arg_frac(ca));
    CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (const Atom& a : mu.atoms()) {
      CHECK(a.weight ==
            doctest::Approx(1.0 / b.boundary_derivative(a.point)));
      // atoms solve theta = c
      cplx c = std::polar(1.0, kTau * ca);
      CHECK(std::abs(b.evaluate(a.point.value()) - c) < 1e-10);
    }
  }
}

TEST_CASE("inverse correspondence on frozen examples") {
  // point mass at 1 -> z
  AtomicMeasure delta({{UnitPoint(), 1.0}});
  FiniteBlaschke f1 = FiniteBlaschke::from_clark_measure(delta);
  CHECK(f1.degree() == 1);
  CHECK(std::abs(f1.evaluate(cplx(0.37, 0.2)) - cplx(0.37, 0.2)) < 1e-12);

  // half-half at +-1 -> z^2
  AtomicMeasure half({{UnitPoint::from_arg_frac(0.0), 0.5},
                      {UnitPoint::from_arg_frac(0.5), 0.5}});
  FiniteBlaschke f2 = FiniteBlaschke::from_clark_measure(half);
  cplx z(0.3, -0.5);
  CHECK(std::abs(f2.evaluate(z) - z * z) < 1e-11);

  // weights (w, 1-w) at +-1 -> z (z - a)/(1 - a z) with a = 1 - 2w
  const double w = 0.3, a = 1.0 - 2.0 * w;
  AtomicMeasure skew({{UnitPoint::from_arg_frac(0.0), w},
                      {UnitPoint::from_arg_frac(0.5), 1.0 - w}});
  FiniteBlaschke f3 = FiniteBlaschke::from_clark_measure(skew);
  CHECK(std::abs(f3.evaluate(z) - z * (z - a) / (1.0 - a * z)) < 1e-11);
}

TEST_CASE("inverse correspondence rejects unnormalized input") {
  AtomicMeasure mu({{UnitPoint::from_arg_frac(0.2), 0.7}});
  CHECK_THROWS_AS(FiniteBlaschke::from_clark_measure(mu), Error);
}

TEST_CASE("inverse correspondence with a multiple zero at the origin") {
  // The reconstruction polynomial has an m-fold root at the origin, which
  // rounding splits into a cluster of radius eps^(1/m) (about 5e-6 for the
  // triple zero here); the trailing-coefficient deflation must recover the
  // exact multiplicity instead.
  const FiniteBlaschke theta(
      {cplx(0, 0), cplx(0, 0), cplx(0, 0), cplx(0.4, -0.1)},
      UnitPoint::from_arg_frac(0.1));
  const UnitPoint c = UnitPoint::from_arg_frac(0.37);
  const AtomicMeasure mu = clark_measure(theta, c);
  const FiniteBlaschke back = FiniteBlaschke::from_clark_measure(mu);
  REQUIRE(back.degree() == 4);
  int at_origin = 0;
  for (const cplx& a : back.zeros())
    if (a == cplx(0.0, 0.0)) ++at_origin;
  CHECK(at_origin == 3);
  CHECK(std::abs(back.zeros().back() - cplx(0.4, -0.1)) < 1e-9);
  // sigma_c(theta) = sigma_1(conj(c) theta), so the rebuilt product is
  // conj(c) theta itself.
  const cplx z(0.3, -0.25);
  CHECK(std::abs(back.evaluate(z) -
                 std::conj(c.value()) * theta.evaluate(z)) < 1e-9);
}

TEST_CASE("round trip measure -> product -> measure") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    std::vector<Atom> atoms;
    for (int k = 0; k < n; ++k)
      atoms.push_back({UnitPoint::from_arg_frac((k + 0.2 + 0.5 * u(rng)) / n),
                       0.05 + u(rng)});
    auto [mu, mass] = normalize(AtomicMeasure(atoms));
    FiniteBlaschke b = FiniteBlaschke::from_clark_measure(mu);
    REQUIRE(b.degree() == n);
    AtomicMeasure back = clark_measure(b, UnitPoint());
    REQUIRE(back.size() == mu.size());
    for (size_t k = 0; k < mu.size(); ++k) {
      CHECK(chord(back.atom(k).point, mu.atom(k).point) < 1e-8);
      CHECK(std::abs(back.atom(k).weight - mu.atom(k).weight) < 1e-8);
    }
  }
}

TEST_CASE("sup distance dominates the true boundary gap") {
  // sup over the circle of |z^2 - z^3| = sup |1 - z| = 2
  double d = sup_distance(monomial(2), monomial(3));
  CHECK(d >= 2.0 - 1e-9);
  CHECK(d < 2.2);
  // the self distance is pure grid inflation, small but not zero
  CHECK(sup_distance(monomial(3), monomial(3)) < 2e-3);
}
