#include "clarklab/model.hpp"

#include <algorithm>
#include <cmath>

namespace clarklab {

namespace {

// Polishes a boundary point toward the solution of theta = 1 by Newton in the
// argument; the injected pipeline data is already accurate to ~1e-9, so three
// steps reach machine precision.
UnitPoint polish_atom(const FiniteBlaschke& theta, UnitPoint p) {
  double s = p.arg_frac() * kTau;
  for (int it = 0; it < 3; ++it) {
    const cplx z = std::polar(1.0, s);
    const cplx tv = theta.evaluate(z);
    const double delta = std::arg(tv);
    const double speed = theta.boundary_derivative(UnitPoint(z));
    s -= delta / speed;
  }
  return UnitPoint::from_arg_frac(s / kTau);
}

}  // namespace

ModelSpace::ModelSpace(FiniteBlaschke theta, int quadrature_size)
    : theta_(std::move(theta)),
      sigma1_(clark_measure(theta_, UnitPoint())),
      quad_(quadrature_size) {
  finish_setup();
}

ModelSpace::ModelSpace(FiniteBlaschke theta, const AtomicMeasure& clark_data,
                       int quadrature_size)
    : theta_(std::move(theta)), sigma1_(clark_data), quad_(quadrature_size) {
  if (static_cast<int>(clark_data.size()) != theta_.degree())
    throw Error("clark data dimension mismatch");
  std::vector<Atom> polished;
  polished.reserve(clark_data.size());
  for (const Atom& atom : clark_data.atoms()) {
    if (std::abs(theta_.evaluate(atom.point.value()) - 1.0) > 1e-6)
      throw Error("clark data does not match the inner function");
    UnitPoint p = polish_atom(theta_, atom.point);
    if (std::abs(theta_.evaluate(p.value()) - 1.0) > 1e-11)
      throw Error("clark data does not match the inner function");
    // Weights are kept as injected so coordinates stay aligned with the
    // measure the caller is working in; they must still be Clark weights.
    const double wref = 1.0 / theta_.boundary_derivative(p);
    if (std::abs(atom.weight - wref) > 1e-6 * std::max(1.0, wref))
      throw Error("clark data does not match the inner function");
    polished.push_back({p, atom.weight});
  }
  sigma1_ = AtomicMeasure(polished, clark_data.label());
  if (std::abs(sigma1_.total_mass() - 1.0) > 1e-8)
    throw Error("clark data does not match the inner function");
  finish_setup();
}

void ModelSpace::finish_setup() {
  const int n = theta_.degree();
  if (static_cast<int>(sigma1_.size()) != n)
    throw Error("clark data dimension mismatch");
  if (quad_ <= 0) {
    // Trapezoid sums on the circle converge like r^N with r the largest
    // zero modulus, so size the default grid to push that below roundoff.
    double rmax = 0.0;
    for (const cplx& z : theta_.zeros()) rmax = std::max(rmax, std::abs(z));
    int need = 1024;
    if (rmax > 0.9)
      need = std::min(1 << 17, static_cast<int>(37.0 / -std::log(rmax)) + 1);
    quad_ = std::max({1024, 128 * n, need});
  }
  pts_.resize(n);
  wts_.resize(n);
  sqrt_w_.resize(n);
  for (int k = 0; k < n; ++k) {
    pts_(k) = sigma1_.atom(k).point.value();
    wts_(k) = sigma1_.atom(k).weight;
    sqrt_w_(k) = std::sqrt(wts_(k));
  }
}

cplx ModelSpace::value(const Eigen::VectorXcd& coords, cplx z) const {
  const int n = dim();
  if (coords.size() != n) throw Error("coordinate dimension mismatch");
  if (std::abs(z) > 1.0 + 1e-9)
    throw Error("evaluation point outside the closed disk");

  for (int k = 0; k < n; ++k)
    if (std::abs(z - pts_(k)) < 1e-8) return coords(k) / sqrt_w_(k);

  if (std::abs(z) <= 0.999) {
    // f = (1 - theta) * sum w_k f(zeta_k) / (1 - z conj(zeta_k)); the
    // denominators stay away from zero in this region.
    cplx s = 0.0;
    for (int k = 0; k < n; ++k) {
      const cplx fk = coords(k) / sqrt_w_(k);
      s += wts_(k) * fk / (1.0 - z * std::conj(pts_(k)));
    }
    return (1.0 - theta_.evaluate(z)) * s;
  }

  // Near the circle the same rational function is evaluated in barycentric
  // form.  With theta = front * P / Q and Q - front * P = -front * prod(z -
  // zeta_i),
  //   f(z) = (front / Q(z)) * sum_k w_k zeta_k f(zeta_k) prod_{i != k}(z -
  //   zeta_i),
  // which has no poles in the closed disk and is exact at the atoms.
  Eigen::VectorXcd pref(n + 1), suf(n + 1);
  pref(0) = 1.0;
  for (int i = 0; i < n; ++i) pref(i + 1) = pref(i) * (z - pts_(i));
  suf(n) = 1.0;
  for (int i = n - 1; i >= 0; --i) suf(i) = suf(i + 1) * (z - pts_(i));
  cplx s = 0.0;
  for (int k = 0; k < n; ++k) {
    const cplx fk = coords(k) / sqrt_w_(k);
    s += wts_(k) * pts_(k) * fk * pref(k) * suf(k + 1);
  }
  return theta_.front_constant().value() * s / poly_eval(theta_.denominator(), z);
}

Eigen::MatrixXcd ModelSpace::basis_boundary(const Eigen::VectorXcd& grid) const {
  const int n = dim();
  const auto m = static_cast<int>(grid.size());
  Eigen::MatrixXcd out(n, m);
  // e_j in barycentric form: e_j(t) = front sqrt(w_j) zeta_j prod_{i != j}(t
  // - zeta_i) / Q(t), stable uniformly on the circle.
  Eigen::VectorXcd pref(n + 1), suf(n + 1);
  for (int c = 0; c < m; ++c) {
    const cplx t = grid(c);
    pref(0) = 1.0;
    for (int i = 0; i < n; ++i) pref(i + 1) = pref(i) * (t - pts_(i));
    suf(n) = 1.0;
    for (int i = n - 1; i >= 0; --i) suf(i) = suf(i + 1) * (t - pts_(i));
    const cplx scale = theta_.front_constant().value() / poly_eval(theta_.denominator(), t);
    for (int j = 0; j < n; ++j)
      out(j, c) = scale * sqrt_w_(j) * pts_(j) * pref(j) * suf(j + 1);
  }
  return out;
}

Eigen::VectorXcd ModelSpace::values_at_clark(const Eigen::VectorXcd& coords) const {
  if (coords.size() != dim()) throw Error("coordinate dimension mismatch");
  return coords.cwiseQuotient(sqrt_w_.cast<cplx>());
}

Eigen::VectorXcd ModelSpace::coords_from_clark_values(
    const Eigen::VectorXcd& values) const {
  if (values.size() != dim()) throw Error("coordinate dimension mismatch");
  return values.cwiseProduct(sqrt_w_.cast<cplx>());
}

SpacePtr make_space(FiniteBlaschke theta, int quadrature_size) {
  return std::make_shared<const ModelSpace>(std::move(theta), quadrature_size);
}

SpacePtr make_space(FiniteBlaschke theta, const AtomicMeasure& clark_data,
                    int quadrature_size) {
  return std::make_shared<const ModelSpace>(std::move(theta), clark_data,
                                            quadrature_size);
}

namespace {

void require_same_space(const ModelVector& f, const ModelVector& g) {
  if (f.space == g.space) return;
  if (!f.space || !g.space) throw Error("vector has no space");
  if (f.space->dim() != g.space->dim())
    throw Error("vectors from different spaces");
  for (int k = 0; k < f.space->dim(); ++k)
    if (chord(f.space->clark_point(k), g.space->clark_point(k)) > 1e-10)
      throw Error("vectors from different spaces");
}

}  // namespace

cplx inner(const ModelVector& f, const ModelVector& g) {
  require_same_space(f, g);
  return g.coords.dot(f.coords);
}

ModelVector model_vector_from_values(SpacePtr space,
                                     const Eigen::VectorXcd& clark_values) {
  return {space, space->coords_from_clark_values(clark_values)};
}

ModelVector constant_one(SpacePtr space) {
  return model_vector_from_values(
      space, Eigen::VectorXcd::Ones(space->dim()));
}

ModelVector chibar_theta(SpacePtr space) {
  const int n = space->dim();
  Eigen::VectorXcd v(n);
  for (int k = 0; k < n; ++k) v(k) = std::conj(space->clark_point(k).value());
  return model_vector_from_values(space, v);
}

KernelPair kernel(SpacePtr space, cplx lambda) {
  if (std::abs(lambda) > 1.0 - 1e-9)
    throw Error("kernel point must lie in the open disk");
  const int n = space->dim();
  const cplx tl = space->theta().evaluate(lambda);
  Eigen::VectorXcd kv(n), sv(n);
  for (int j = 0; j < n; ++j) {
    const cplx zeta = space->clark_point(j).value();
    kv(j) = (1.0 - std::conj(tl)) / (1.0 - std::conj(lambda) * zeta);
    sv(j) = (1.0 - tl) / (zeta - lambda);
  }
  return {lambda, model_vector_from_values(space, kv),
          model_vector_from_values(space, sv)};
}

ModelVector conjugation(const ModelVector& f) {
  const int n = f.space->dim();
  Eigen::VectorXcd out(n);
  for (int k = 0; k < n; ++k)
    out(k) = std::conj(f.space->clark_point(k).value() * f.coords(k));
  return {f.space, out};
}

cplx evaluate_in_disk(const ModelVector& f, cplx z) { return f.eval(z); }

Eigen::VectorXcd JMap::to_values(const ModelVector& f) const {
  Eigen::VectorXcd y = forward * f.coords;
  for (int j = 0; j < y.size(); ++j)
    y(j) /= std::sqrt(sigma_c.atom(j).weight);
  return y;
}

ModelVector JMap::from_values(const Eigen::VectorXcd& values_at_sigma_c) const {
  const auto n = values_at_sigma_c.size();
  if (n != static_cast<Eigen::Index>(sigma_c.size()))
    throw Error("coordinate dimension mismatch");
  Eigen::VectorXcd y(n);
  for (Eigen::Index j = 0; j < n; ++j)
    y(j) = values_at_sigma_c(j) * std::sqrt(sigma_c.atom(j).weight);
  return {space, forward.adjoint() * y};
}

JMap j_map(SpacePtr space, const UnitPoint& c) {
  const int n = space->dim();
  if (chord(c, UnitPoint()) < 1e-12)
    return {space, c, space->clark_data(), Eigen::MatrixXcd::Identity(n, n),
            0.0};
  AtomicMeasure sigma_c = clark_measure(space->theta(), c);
  Eigen::MatrixXcd F(n, n);
  const cplx one_minus_c = 1.0 - c.value();
  for (int j = 0; j < n; ++j) {
    const cplx eta = sigma_c.atom(j).point.value();
    const double sv = std::sqrt(sigma_c.atom(j).weight);
    for (int k = 0; k < n; ++k) {
      const cplx zeta = space->clark_point(k).value();
      const double sw = std::sqrt(space->clark_weight(k));
      F(j, k) = sv * sw * one_minus_c / (1.0 - eta * std::conj(zeta));
    }
  }
  const double resid =
      (F * F.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm();
  return {space, c, std::move(sigma_c), std::move(F), resid};
}

ConjugationIdentities conjugation_identities(SpacePtr space,
                                             const Eigen::VectorXcd& gamma) {
  const int n = space->dim();
  if (gamma.size() != n) throw Error("coordinate dimension mismatch");

  ConjugationIdentities out;
  Eigen::VectorXcd u_vals(n), v1_vals(n), v3_vals(n);
  cplx a = 0.0;
  for (int k = 0; k < n; ++k) {
    const cplx zeta = space->clark_point(k).value();
    u_vals(k) = std::conj(zeta * gamma(k));
    v1_vals(k) = gamma(k);
    v3_vals(k) = std::conj(gamma(k));
    a += space->clark_weight(k) * gamma(k);
  }
  out.u = model_vector_from_values(space, u_vals);
  out.a = a;
  const ModelVector v1 = model_vector_from_values(space, v1_vals);
  const ModelVector v3 = model_vector_from_values(space, v3_vals);

  // A half-step offset keeps the grid off the atoms without special casing.
  const int grid_n = 64;
  double rc = 0.0, rs = 0.0;
  for (int i = 0; i < grid_n; ++i) {
    const cplx t = std::polar(1.0, kTau * (i + 0.5) / grid_n);
    const cplx tv = space->theta().evaluate(t);
    const cplx uv = out.u.eval(t);
    rc = std::max(rc, std::abs(v1.eval(t) - tv * std::conj(t) * std::conj(uv)));
    rs = std::max(rs,
                  std::abs(v3.eval(t) - (t * uv + std::conj(a) * (1.0 - tv))));
  }
  out.residual_conj = rc;
  out.residual_shift = rs;
  return out;
}

Eigen::VectorXcd circle_grid(int n) {
  Eigen::VectorXcd g(n);
  for (int i = 0; i < n; ++i) g(i) = std::polar(1.0, kTau * i / n);
  return g;
}

cplx inner_grid(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) {
  if (f.size() != g.size()) throw Error("grid size mismatch");
  return g.dot(f) / static_cast<double>(f.size());
}

namespace {

struct ProjectPass {
  Eigen::VectorXcd coords;
  double residual_sq = 0.0;
};

// ||h - p||^2 comes from the pointwise difference on the grid rather than
// ||h||^2 - ||p||^2, which cannot resolve distances below the cancellation
// floor of the two near-equal norms.
ProjectPass project_pass(const ModelSpace& target, const BoundaryFn& h,
                         int N) {
  const Eigen::VectorXcd grid = circle_grid(N);
  Eigen::VectorXcd hv(N);
  for (int i = 0; i < N; ++i) hv(i) = h(grid(i));
  const Eigen::MatrixXcd E = target.basis_boundary(grid);
  ProjectPass out;
  out.coords = (E.conjugate() * hv) / static_cast<double>(N);
  out.residual_sq =
      (hv - E.transpose() * out.coords).squaredNorm() / static_cast<double>(N);
  return out;
}

}  // namespace

Projection project(SpacePtr target, const BoundaryFn& h, int quad) {
  const int N = quad > 0 ? quad : target->quadrature_size();
  const ProjectPass p1 = project_pass(*target, h, N);
  const ProjectPass p2 = project_pass(*target, h, 2 * N);

  Projection out;
  out.p = {target, p2.coords};
  out.doubling_change = (p2.coords - p1.coords).norm();
  if (out.doubling_change > 1e-9) throw Error("quadrature not converged");
  out.residual_norm = p2.residual_sq;
  return out;
}

Eigen::MatrixXcd quadrature_gram(const ModelSpace& space, int quad) {
  const int N = quad > 0 ? quad : space.quadrature_size();
  const Eigen::MatrixXcd E = space.basis_boundary(circle_grid(N));
  return (E * E.adjoint()) / static_cast<double>(N);
}

BoundaryFn as_boundary_fn(const ModelVector& f) {
  return [f](cplx z) { return f.eval(z); };
}

}  // namespace clarklab
