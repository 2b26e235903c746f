#pragma once

#include <Eigen/Dense>
#include <vector>

#include "clarklab/types.hpp"

namespace clarklab {

// Dense polynomial with ascending coefficients: p[0] + p[1] z + ...
using Poly = Eigen::VectorXcd;

Poly poly_from_roots(const std::vector<cplx>& roots);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_add(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, cplx s);
cplx poly_eval(const Poly& p, cplx z);
Poly poly_derivative(const Poly& p);

// z^n * conj(p(1/conj(z))) for n >= deg p: coefficient reversal with padding.
Poly poly_reflect(const Poly& p, int n);

// Divide p by (z - root); the root must be a root of p to working accuracy.
Poly poly_deflate(const Poly& p, cplx root);

// Roots via the companion matrix of the monic normalization.  Leading
// coefficients below rel_tol * max|coeff| are stripped first.
std::vector<cplx> poly_roots(const Poly& p, double strip_rel_tol = 1e-13);

}  // namespace clarklab
