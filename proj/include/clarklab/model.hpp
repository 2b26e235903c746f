#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>

#include "clarklab/blaschke.hpp"
#include "clarklab/measure.hpp"

namespace clarklab {

// Model space K_theta = H^2 (-) theta H^2 for a finite Blaschke product,
// realized in the Clark basis at c = 1:
//   e_k(z) = sqrt(w_k) (1 - theta(z)) / (1 - z conj(zeta_k)),
// where zeta_k are the solutions of theta = 1 and w_k = 1/|theta'(zeta_k)|.
// Vectors carry coordinates in this orthonormal basis; the boundary value at
// zeta_k is coords_k / sqrt(w_k).
class ModelSpace {
 public:
  explicit ModelSpace(FiniteBlaschke theta, int quadrature_size = 0);

  // Injects externally computed Clark data (atoms must satisfy theta = 1 to
  // 1e-6; they are re-polished against theta for internal consistency).
  ModelSpace(FiniteBlaschke theta, const AtomicMeasure& clark_data,
             int quadrature_size = 0);

  int dim() const { return theta_.degree(); }
  const FiniteBlaschke& theta() const { return theta_; }
  const AtomicMeasure& clark_data() const { return sigma1_; }
  int quadrature_size() const { return quad_; }

  UnitPoint clark_point(int k) const { return sigma1_.atom(k).point; }
  double clark_weight(int k) const { return sigma1_.atom(k).weight; }

  // Value of the vector with the given coordinates at any z in the closed
  // disk.  Within 1e-8 of a Clark point the stored boundary value is
  // returned; near the circle a pole-free barycentric form of the
  // interpolation formula is used.
  cplx value(const Eigen::VectorXcd& coords, cplx z) const;

  // e_j(t_i) for a vector of boundary points: row j = basis function j.
  Eigen::MatrixXcd basis_boundary(const Eigen::VectorXcd& grid) const;

  Eigen::VectorXcd values_at_clark(const Eigen::VectorXcd& coords) const;
  Eigen::VectorXcd coords_from_clark_values(const Eigen::VectorXcd& values) const;

 private:
  void finish_setup();

  FiniteBlaschke theta_;
  AtomicMeasure sigma1_;
  int quad_ = 0;
  Eigen::VectorXcd pts_;     // Clark points
  Eigen::VectorXd wts_;      // Clark weights
  Eigen::VectorXd sqrt_w_;
};

using SpacePtr = std::shared_ptr<const ModelSpace>;

SpacePtr make_space(FiniteBlaschke theta, int quadrature_size = 0);
SpacePtr make_space(FiniteBlaschke theta, const AtomicMeasure& clark_data,
                    int quadrature_size = 0);

struct ModelVector {
  SpacePtr space;
  Eigen::VectorXcd coords;

  double norm() const { return coords.norm(); }
  Eigen::VectorXcd clark_values() const {
    return space->values_at_clark(coords);
  }
  cplx eval(cplx z) const { return space->value(coords, z); }
};

// (f, g), linear in the first argument.
cplx inner(const ModelVector& f, const ModelVector& g);

ModelVector model_vector_from_values(SpacePtr space,
                                     const Eigen::VectorXcd& clark_values);
ModelVector constant_one(SpacePtr space);
ModelVector chibar_theta(SpacePtr space);  // conj(z) * theta, in K_theta

struct KernelPair {
  cplx lambda;
  ModelVector k;       // reproducing kernel k_{theta,lambda}
  ModelVector k_star;  // conjugate kernel (theta(z)-theta(lambda))/(z-lambda)
};
KernelPair kernel(SpacePtr space, cplx lambda);

// Antilinear conjugation f -> theta conj(z) conj(f), an involution on the
// space; maps k_lambda to k_star_lambda.
ModelVector conjugation(const ModelVector& f);

cplx evaluate_in_disk(const ModelVector& f, cplx z);

// Coordinate unitary J_{theta,c}: K_theta -> L^2(sigma_c) (forward matrix in
// orthonormal coordinates on both sides).  For c = 1 this is the identity.
struct JMap {
  SpacePtr space;
  UnitPoint c;
  AtomicMeasure sigma_c;
  Eigen::MatrixXcd forward;  // L^2(sigma_c) coords = forward * K_theta coords
  double unitarity_residual = 0.0;

  Eigen::VectorXcd to_values(const ModelVector& f) const;
  ModelVector from_values(const Eigen::VectorXcd& values_at_sigma_c) const;
};
JMap j_map(SpacePtr space, const UnitPoint& c);

// u = J^{-1}(conj(z) conj(gamma)) together with the residuals of the two
// identities it satisfies:
//   J^{-1}(gamma)       = theta conj(z) conj(u)          (residual_conj)
//   J^{-1}(conj(gamma)) = z u + conj(a) (1 - theta),     (residual_shift)
// where a = integral of gamma d(sigma_1); both residuals are sups over a
// boundary grid, so they exercise the evaluation formula off the atoms.
struct ConjugationIdentities {
  ModelVector u;
  cplx a;
  double residual_conj = 0.0;
  double residual_shift = 0.0;
};
ConjugationIdentities conjugation_identities(SpacePtr space,
                                             const Eigen::VectorXcd& gamma);

using BoundaryFn = std::function<cplx(cplx)>;

// Orthogonal projection of a boundary handle onto the target space via
// trapezoid quadrature with a mandatory doubling check.  residual_norm is the
// squared distance ||h - p||^2, measured pointwise on the grid so exact
// members certify at roundoff level (a membership certificate when small).
struct Projection {
  ModelVector p;
  double residual_norm = 0.0;
  double doubling_change = 0.0;
};
Projection project(SpacePtr target, const BoundaryFn& h, int quad = 0);

Eigen::VectorXcd circle_grid(int n);
// Trapezoid value of (f, g)_{L^2(m)} from samples on circle_grid(n).
cplx inner_grid(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g);

// Gram matrix of the Clark basis computed by quadrature (a self-test: should
// be the identity).
Eigen::MatrixXcd quadrature_gram(const ModelSpace& space, int quad = 0);

BoundaryFn as_boundary_fn(const ModelVector& f);

}  // namespace clarklab
