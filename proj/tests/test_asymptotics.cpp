#include "clarklab/asymptotics.hpp"

#include <cmath>
#include <complex>

#include "doctest.h"

using namespace clarklab;

namespace {

Eigen::MatrixXcd rotation_diag(std::initializer_list<double> arg_fracs) {
  Eigen::VectorXcd d(static_cast<Eigen::Index>(arg_fracs.size()));
  Eigen::Index k = 0;
  for (double t : arg_fracs) d(k++) = std::polar(1.0, kTau * t);
  return d.asDiagonal();
}

// similar to a unitary but not normal
Eigen::MatrixXcd skewed_rotation() {
  Eigen::MatrixXcd w(2, 2);
  w << cplx(1, 0), cplx(1, 0), cplx(0, 0), cplx(1, 0);
  Eigen::MatrixXcd d = rotation_diag({0.15, 0.6});
  return w * d * w.inverse();
}

}  // namespace

TEST_CASE("power sweep of a unitary stays flat") {
  PowerSweep ps = power_sweep(rotation_diag({0.1, 0.35, 0.8}), 200);
  CHECK(ps.m_plus == doctest::Approx(1.0));
  CHECK(ps.m_minus == doctest::Approx(1.0));
  CHECK(!ps.diverged);
  CHECK(ps.stabilized);
  REQUIRE(ps.forward.size() == 201);
  CHECK(ps.forward[0] == doctest::Approx(1.0));
}

TEST_CASE("power sweep flags blow-up") {
  Eigen::MatrixXcd two = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
  PowerSweep ps = power_sweep(two, 400);
  CHECK(ps.diverged);
}

TEST_CASE("power sweep of a non-normal similarity is bounded by kappa") {
  Eigen::MatrixXcd t = skewed_rotation();
  PowerSweep ps = power_sweep(t, 500);
  CHECK(!ps.diverged);
  CHECK(ps.m_plus > 1.0);
  if (ps.kappa_available) {
    CHECK(ps.m_plus <= ps.kappa + 1e-9);
    CHECK(ps.m_minus <= ps.kappa + 1e-9);
  }
}

TEST_CASE("certificates on a unitary") {
  Certificate c = certify(rotation_diag({0.2, 0.45}), 100,
                          {"pow5", "pow2", "chain", "block_step"}, 3.0);
  CHECK(c.all_pass);
  REQUIRE(c.checks.size() == 4);
  // with M = 1: bounds 1, 1, 3, 3 * extra
  CHECK(c.checks[0].bound == doctest::Approx(1.0));
  CHECK(c.checks[1].bound == doctest::Approx(1.0));
  CHECK(c.checks[2].bound == doctest::Approx(3.0));
  CHECK(c.checks[3].bound == doctest::Approx(9.0));
  for (const CertifiedBound& b : c.checks) CHECK(b.lhs == doctest::Approx(1.0));
}

TEST_CASE("unknown certificate name is rejected") {
  CHECK_THROWS_AS(certify(rotation_diag({0.2}), 10, {"pow7"}), Error);
}

TEST_CASE("fifth power certificate on a skewed rotation") {
  Certificate c = certify(skewed_rotation(), 500, {"pow5"});
  CHECK(c.all_pass);
  REQUIRE(c.checks.size() == 1);
  CHECK(c.checks[0].lhs <= c.checks[0].bound + 1e-9);
  if (!c.checks[0].swept_only) CHECK(c.checks[0].pass_certified);
}

TEST_CASE("block inverse bound on an involution") {
  // T = [[1, 1], [0, -1]] squares to the identity; at odd n the inverse
  // norm is the golden ratio and the bound is sqrt(2 phi^2 + 1)
  Eigen::MatrixXcd t(2, 2);
  t << cplx(1, 0), cplx(1, 0), cplx(0, 0), cplx(-1, 0);
  std::vector<BlockBound> bb = block_inverse_bound(t, 1, 50);
  REQUIRE(bb.size() == 50);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  CHECK(bb[0].lhs == doctest::Approx(phi));
  CHECK(bb[0].rhs == doctest::Approx(std::sqrt(2.0 * phi * phi + 1.0)));
  for (const BlockBound& b : bb) CHECK(b.pass);
}

TEST_CASE("block inverse bound input guards") {
  Eigen::MatrixXcd t(2, 2);
  t << cplx(1, 0), cplx(0, 0), cplx(1, 0), cplx(-1, 0);
  CHECK_THROWS_AS(block_inverse_bound(t, 1, 5), Error);
}

TEST_CASE("cesaro asymptote of a unitary is the identity") {
  Eigen::MatrixXcd t = rotation_diag({0.12, 0.4, 0.9});
  CesaroAsymptote ca = cesaro_asymptote(t);
  CHECK((ca.q - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(ca.unitarity_residual < 1e-10);
  CHECK(ca.y_norm == doctest::Approx(1.0));
  CHECK(ca.y_inv_norm == doctest::Approx(1.0));
  CHECK(ca.stein_residual < 1e-10);
}

TEST_CASE("cesaro asymptote conjugates a similarity to a unitary") {
  Eigen::MatrixXcd t = skewed_rotation();
  CesaroAsymptote ca = cesaro_asymptote(t);
  CHECK(ca.unitarity_residual < 1e-9);
  CHECK(ca.stein_residual < 1e-9);
  CHECK(ca.psd_margin > 0.0);
  // Y T Y^{-1} matches the stored unitary
  Eigen::MatrixXcd conj = ca.y * t * ca.y.inverse();
  CHECK((conj - ca.unitary).cwiseAbs().maxCoeff() < 1e-9);
  // the norm bounds against the sweep supremum
  PowerSweep ps = power_sweep(t, 500);
  CHECK(ca.y_norm <= ps.m_plus + 1e-6);
  CHECK(ca.y_inv_norm <= ps.m_plus * ps.m_plus + 1e-6);
  // the finite mean is already close at the default horizon
  CHECK(ca.finite_consistency < 1e-1);
}

TEST_CASE("cesaro asymptote rejects spectra off the circle") {
  Eigen::MatrixXcd t = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(cesaro_asymptote(t), Error);
}

TEST_CASE("powers along return times of rational rotations") {
  Eigen::MatrixXcd t = rotation_diag({1.0 / 6.0, 1.0 / 3.0});
  Eigen::VectorXcd targets = Eigen::VectorXcd::Ones(2);
  ReturnLimit rl = weak_limit_along_returns(t, targets, 100, 1e-9, 1.0);
  CHECK(rl.converged);
  REQUIRE(!rl.times.empty());
  // intermediate record-improving times may be anything; the converged one
  // is a genuine simultaneous return of both rotations
  CHECK(rl.times.back() % 6 == 0);
  CHECK(rl.final_drift < 1e-9);
  CHECK((rl.r - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-9);
  CHECK(rl.inverse_pass);
  CHECK(rl.inverse_bound == doctest::Approx(1.0));
}

TEST_CASE("return time norm identities vanish for unimodular data") {
  SpacePtr sp = make_space(
      FiniteBlaschke(std::vector<cplx>(2, cplx(0, 0)), UnitPoint()));
  Eigen::VectorXcd targets = Eigen::VectorXcd::Ones(2);
  std::vector<long> times{2, 4, 6, 8};
  BoundaryFn one = [](cplx) { return cplx(1, 0); };
  for (BoundaryFn p : {BoundaryFn([](cplx) { return cplx(1, 0); }),
                       BoundaryFn([](cplx z) { return z; }),
                       BoundaryFn([](cplx z) { return 1.0 + z; })}) {
    LimitIdentities li = return_time_norm_identities(sp, one, p, targets,
                                                     times);
    CHECK(li.pass);
    CHECK(li.max_excess <= 0.0);
    CHECK(std::abs(li.rhs) < 1e-12);
    for (Eigen::Index k = 0; k < li.s_values.size(); ++k)
      CHECK(std::abs(li.s_values(k)) < 1e-9);
  }
}
