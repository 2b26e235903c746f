#pragma once

#include <vector>

#include "clarklab/measure.hpp"
#include "clarklab/poly.hpp"
#include "clarklab/types.hpp"

namespace clarklab {

// Finite Blaschke product vanishing at the origin:
//   theta(z) = front * prod_j (z - a_j) / (1 - conj(a_j) z),  |a_j| < 1,
// with at least one a_j = 0.  The rational form theta = front * P / Q
// (P monic, Q = reflection of P) is expanded once at construction; pointwise
// evaluation always goes through the factored form.
class FiniteBlaschke {
 public:
  FiniteBlaschke(std::vector<cplx> zeros, UnitPoint front_constant,
                 int degree_cap = 64);

  int degree() const { return static_cast<int>(zeros_.size()); }
  const std::vector<cplx>& zeros() const { return zeros_; }
  const UnitPoint& front_constant() const { return front_; }
  const Poly& numerator() const { return num_; }    // front * P (P monic)
  const Poly& denominator() const { return den_; }  // Q = reflect(P), Q(0) = 1

  // Requires |z| <= 1 + 1e-9; throws "pole" within 1e-12 of a denominator
  // root.
  cplx evaluate(cplx z) const;
  cplx derivative(cplx z) const;

  // |theta'(zeta)| on the circle: sum_j (1-|a_j|^2)/|zeta-a_j|^2.
  double boundary_derivative(const UnitPoint& zeta) const;

  // Certified upper bound for sup_T |theta'|.
  double derivative_sup_bound() const;

  // Inverse Clark correspondence: recover theta with sigma_1(theta) = mu from
  // a normalized measure via the Cauchy-transform identity
  //   1/(1 - theta(z)) = sum_k w_k / (1 - z conj(zeta_k)).
  static FiniteBlaschke from_clark_measure(const AtomicMeasure& mu,
                                           int degree_cap = 64);

 private:
  std::vector<cplx> zeros_;
  UnitPoint front_;
  Poly num_, den_;
};

// Solutions of theta = c on the circle (companion-matrix roots polished by a
// Newton step in the argument), sorted by argument.
std::vector<UnitPoint> level_set(const FiniteBlaschke& theta,
                                 const UnitPoint& c);

// Clark measure sigma_c: atoms at the level set, weights 1/|theta'|.
AtomicMeasure clark_measure(const FiniteBlaschke& theta, const UnitPoint& c);

// Upper estimate of sup_T |theta - omega| (dense grid plus a certified
// derivative inflation term).
double sup_distance(const FiniteBlaschke& theta, const FiniteBlaschke& omega);

}  // namespace clarklab
