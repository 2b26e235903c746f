#include "clarklab/poly.hpp"

#include <Eigen/Eigenvalues>

namespace clarklab {

Poly poly_from_roots(const std::vector<cplx>& roots) {
  Poly p(1);
  p(0) = cplx(1.0, 0.0);
  for (const cplx& r : roots) {
    Poly q(p.size() + 1);
    q.setZero();
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      q(i) -= r * p(i);
      q(i + 1) += p(i);
    }
    p = q;
  }
  return p;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly c(a.size() + b.size() - 1);
  c.setZero();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) c(i + j) += a(i) * b(j);
  return c;
}

Poly poly_add(const Poly& a, const Poly& b) {
  Poly c = Poly::Zero(std::max(a.size(), b.size()));
  c.head(a.size()) += a;
  c.head(b.size()) += b;
  return c;
}

Poly poly_scale(const Poly& a, cplx s) { return a * s; }

cplx poly_eval(const Poly& p, cplx z) {
  cplx acc(0.0, 0.0);
  for (Eigen::Index i = p.size() - 1; i >= 0; --i) acc = acc * z + p(i);
  return acc;
}

Poly poly_derivative(const Poly& p) {
  if (p.size() <= 1) {
    Poly d(1);
    d(0) = cplx(0.0, 0.0);
    return d;
  }
  Poly d(p.size() - 1);
  for (Eigen::Index i = 1; i < p.size(); ++i)
    d(i - 1) = p(i) * static_cast<double>(i);
  return d;
}

Poly poly_reflect(const Poly& p, int n) {
  if (n + 1 < p.size()) throw Error("reflection degree below polynomial degree");
  Poly q = Poly::Zero(n + 1);
  for (Eigen::Index i = 0; i < p.size(); ++i) q(n - i) = std::conj(p(i));
  return q;
}

Poly poly_deflate(const Poly& p, cplx root) {
  // Synthetic division, highest coefficient first.
  const Eigen::Index n = p.size();
  if (n < 2) throw Error("cannot deflate constant polynomial");
  Poly q(n - 1);
  cplx carry = p(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) {
    q(i) = carry;
    carry = p(i) + root * carry;
  }
  // carry is p(root); ignored (caller guarantees root accuracy).
  return q;
}

std::vector<cplx> poly_roots(const Poly& p, double strip_rel_tol) {
  const double scale = p.cwiseAbs().maxCoeff();
  if (scale == 0.0) throw Error("zero polynomial has no root set");
  Eigen::Index deg = p.size() - 1;
  while (deg > 0 && std::abs(p(deg)) < strip_rel_tol * scale) --deg;
  if (deg == 0) return {};
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
  for (Eigen::Index i = 0; i < deg; ++i) companion(i, deg - 1) = -p(i) / p(deg);
  for (Eigen::Index i = 1; i < deg; ++i) companion(i, i - 1) = cplx(1.0, 0.0);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, false);
  if (es.info() != Eigen::Success) throw Error("companion eigensolver failed");
  std::vector<cplx> roots(deg);
  for (Eigen::Index i = 0; i < deg; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

}  // namespace clarklab
