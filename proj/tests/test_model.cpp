#include "clarklab/model.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

using namespace clarklab;

namespace {

SpacePtr monomial_space(int n, int quad = 0) {
  return make_space(FiniteBlaschke(std::vector<cplx>(n, cplx(0, 0)),
                                   UnitPoint()),
                    quad);
}

SpacePtr mixed_space() {
  return make_space(FiniteBlaschke({cplx(0, 0), cplx(0.4, 0.3),
                                    cplx(-0.35, 0.1)},
                                   UnitPoint::from_arg_frac(0.2)));
}

}  // namespace

TEST_CASE("clark basis is orthonormal under quadrature") {
  for (SpacePtr sp : {monomial_space(2), mixed_space()}) {
    Eigen::MatrixXcd g = quadrature_gram(*sp);
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sp->dim(), sp->dim());
    CHECK((g - id).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("evaluation interpolates the clark values") {
  SpacePtr sp = mixed_space();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd coords(sp->dim());
  for (int k = 0; k < sp->dim(); ++k) coords(k) = cplx(u(rng), u(rng));
  Eigen::VectorXcd vals = sp->values_at_clark(coords);
  for (int k = 0; k < sp->dim(); ++k) {
    cplx z = sp->clark_point(k).value();
    CHECK(std::abs(sp->value(coords, z) - vals(k)) < 1e-10);
  }
  // and inversion recovers the coordinates
  Eigen::VectorXcd back = sp->coords_from_clark_values(vals);
  CHECK((back - coords).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reproducing property of the kernel") {
  SpacePtr sp = mixed_space();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (cplx lambda : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-0.55, 0.1)}) {
    KernelPair kp = kernel(sp, lambda);
    ModelVector f{sp, Eigen::VectorXcd(sp->dim())};
    for (int k = 0; k < sp->dim(); ++k) f.coords(k) = cplx(u(rng), u(rng));
    CHECK(std::abs(inner(f, kp.k) - evaluate_in_disk(f, lambda)) < 1e-10);
  }
}

TEST_CASE("kernel at 0 is the constant 1 when theta(0) = 0") {
  SpacePtr sp = mixed_space();
  KernelPair kp = kernel(sp, cplx(0, 0));
  ModelVector one = constant_one(sp);
  CHECK((kp.k.coords - one.coords).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conjugation is an isometric involution exchanging the kernels") {
  SpacePtr sp = mixed_space();
  KernelPair kp = kernel(sp, cplx(0.25, 0.4));
  ModelVector ck = conjugation(kp.k);
  CHECK((ck.coords - kp.k_star.coords).cwiseAbs().maxCoeff() < 1e-9);
  ModelVector back = conjugation(ck);
  CHECK((back.coords - kp.k.coords).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(ck.norm() == doctest::Approx(kp.k.norm()));
}

TEST_CASE("chibar vector has unit norm and the right boundary values") {
  SpacePtr sp = monomial_space(3);
  ModelVector cb = chibar_theta(sp);
  CHECK(cb.norm() == doctest::Approx(1.0));
  // conj(z) theta = z^2 at the clark points of z^3
  for (int k = 0; k < 3; ++k) {
    cplx z = sp->clark_point(k).value();
    CHECK(std::abs(cb.clark_values()(k) - z * z) < 1e-10);
  }
}

TEST_CASE("j map at c = 1 is the coordinate identity") {
  SpacePtr sp = mixed_space();
  JMap jm = j_map(sp, UnitPoint());
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sp->dim(), sp->dim());
  CHECK((jm.forward - id).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("j map is unitary for several parameters") {
  SpacePtr sp = mixed_space();
  for (double ca : {0.17, 0.5, 0.83}) {
    JMap jm = j_map(sp, UnitPoint::from_arg_frac(ca));
    CHECK(jm.unitarity_residual < 1e-10);
    Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(sp->dim(), sp->dim());
    CHECK((jm.forward.adjoint() * jm.forward - id).cwiseAbs().maxCoeff() <
          1e-10);
    // round trip through values
    ModelVector one = constant_one(sp);
    ModelVector rt = jm.from_values(jm.to_values(one));
    CHECK((rt.coords - one.coords).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("conjugation identities for a random gamma") {
  SpacePtr sp = monomial_space(4);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd gamma(4);
  for (int k = 0; k < 4; ++k) gamma(k) = cplx(u(rng), u(rng));
  ConjugationIdentities ci = conjugation_identities(sp, gamma);
  CHECK(ci.residual_conj < 1e-9);
  CHECK(ci.residual_shift < 1e-9);
  // a is the weighted mean of gamma over the clark measure
  cplx a(0, 0);
  for (int k = 0; k < 4; ++k) a += sp->clark_weight(k) * gamma(k);
  CHECK(std::abs(ci.a - a) < 1e-12);
}

TEST_CASE("projection onto the space is exact for members") {
  SpacePtr sp = monomial_space(2);
  // 1 + z lies in K_{z^2}
  BoundaryFn h = [](cplx z) { return 1.0 + z; };
  Projection pr = project(sp, h);
  CHECK(pr.residual_norm < 1e-10);
  CHECK(std::abs(evaluate_in_disk(pr.p, cplx(0.3, 0.1)) - cplx(1.3, 0.1)) <
        1e-9);
}

TEST_CASE("projection drops the orthogonal tail") {
  // 1 + z + z^2 against K_{z^2}: projection 1 + z, squared residual 1
  SpacePtr sp = monomial_space(2);
  BoundaryFn h = [](cplx z) { return 1.0 + z + z * z; };
  Projection pr = project(sp, h);
  CHECK(pr.residual_norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(evaluate_in_disk(pr.p, cplx(0.2, 0.0)) - cplx(1.2, 0.0)) <
        1e-9);
}

TEST_CASE("grid inner product matches the atomic one on members") {
  SpacePtr sp = mixed_space();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ModelVector f{sp, Eigen::VectorXcd(sp->dim())};
  ModelVector g{sp, Eigen::VectorXcd(sp->dim())};
  for (int k = 0; k < sp->dim(); ++k) {
    f.coords(k) = cplx(u(rng), u(rng));
    g.coords(k) = cplx(u(rng), u(rng));
  }
  Eigen::VectorXcd grid = circle_grid(256);
  Eigen::VectorXcd fv(grid.size()), gv(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    fv(i) = sp->value(f.coords, grid(i));
    gv(i) = sp->value(g.coords, grid(i));
  }
  CHECK(std::abs(inner_grid(fv, gv) - inner(f, g)) < 1e-10);
}

TEST_CASE("injected clark data must actually belong to theta") {
  FiniteBlaschke t2(std::vector<cplx>(2, cplx(0, 0)), UnitPoint());
  AtomicMeasure wrong({{UnitPoint::from_arg_frac(0.1), 0.5},
                       {UnitPoint::from_arg_frac(0.6), 0.5}});
  CHECK_THROWS_AS(make_space(t2, wrong), Error);
}
