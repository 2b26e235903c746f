#include "clarklab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "clarklab/poly.hpp"

namespace clarklab {

namespace {

void check_membership(SpacePtr space, const ModelVector& f) {
  if (!space || !f.space) throw Error("vector has no space");
  if (f.space == space) return;
  if (f.space->dim() != space->dim())
    throw Error("vectors from different spaces");
  for (int k = 0; k < space->dim(); ++k)
    if (chord(f.space->clark_point(k), space->clark_point(k)) > 1e-10)
      throw Error("vectors from different spaces");
}

Eigen::VectorXcd clark_points_vec(const ModelSpace& s) {
  Eigen::VectorXcd p(s.dim());
  for (int k = 0; k < s.dim(); ++k) p(k) = s.clark_point(k).value();
  return p;
}

Eigen::VectorXd sqrt_weights_vec(const ModelSpace& s) {
  Eigen::VectorXd w(s.dim());
  for (int k = 0; k < s.dim(); ++k) w(k) = std::sqrt(s.clark_weight(k));
  return w;
}

int cross_quad(const ModelSpace& a, const ModelSpace& b, int quad) {
  if (quad > 0) return quad;
  return std::max({a.quadrature_size(), b.quadrature_size(),
                   64 * (a.dim() + b.dim())});
}

Eigen::VectorXcd coords_on(const AtomicMeasure& m,
                           const Eigen::VectorXcd& values) {
  Eigen::VectorXcd out(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    out(k) = values(k) * std::sqrt(m.atom(static_cast<size_t>(k)).weight);
  return out;
}

Eigen::VectorXcd chibar_coords_on(const AtomicMeasure& m) {
  Eigen::VectorXcd out(static_cast<Eigen::Index>(m.size()));
  for (size_t k = 0; k < m.size(); ++k)
    out(static_cast<Eigen::Index>(k)) =
        std::sqrt(m.atom(k).weight) * std::conj(m.atom(k).point.value());
  return out;
}

}  // namespace

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

ModelVector OperatorMatrix::apply(const ModelVector& f) const {
  if (dom) check_membership(dom, f);
  if (mat.cols() != f.coords.size()) throw Error("coordinate dimension mismatch");
  return {cod, mat * f.coords};
}

OperatorMatrix compressed_shift(SpacePtr space) {
  const Eigen::VectorXcd zeta = clark_points_vec(*space);
  const Eigen::VectorXd sw = sqrt_weights_vec(*space);
  const Eigen::VectorXcd s = sw.cast<cplx>();
  const Eigen::VectorXcd r = sw.cast<cplx>().cwiseProduct(zeta);
  Eigen::MatrixXcd m = zeta.asDiagonal();
  m.noalias() -= s * r.transpose();
  return {m, space, space};
}

OperatorMatrix clark_unitary(SpacePtr space, const UnitPoint& c) {
  const Eigen::VectorXcd zeta = clark_points_vec(*space);
  const Eigen::VectorXd sw = sqrt_weights_vec(*space);
  const Eigen::VectorXcd s = sw.cast<cplx>();
  const Eigen::VectorXcd r = sw.cast<cplx>().cwiseProduct(zeta);
  Eigen::MatrixXcd m = zeta.asDiagonal();
  m.noalias() += (c.value() - 1.0) * (s * r.transpose());
  return {m, space, space};
}

OperatorMatrix rank_one_perturbation(SpacePtr space, const ModelVector& u) {
  check_membership(space, u);
  OperatorMatrix s = compressed_shift(space);
  const Eigen::VectorXcd chibar = chibar_theta(space).coords;
  s.mat.noalias() += u.coords * chibar.adjoint();
  return s;
}

IsometryClass isometry_classification(SpacePtr space, const ModelVector& u,
                                      double tol) {
  const int n = space->dim();
  const Eigen::MatrixXcd t = rank_one_perturbation(space, u).mat;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  IsometryClass out;
  out.defect = operator_norm(t.adjoint() * t - id);
  out.co_defect = operator_norm(t * t.adjoint() - id);
  out.isometric = out.defect <= tol;
  out.unitary = out.isometric && out.co_defect <= tol;
  const ModelVector one = constant_one(space);
  out.clark_parameter = inner(u, one);
  const double family_dist = (u.coords - out.clark_parameter * one.coords).norm();
  out.in_clark_family =
      family_dist <= tol && std::abs(std::abs(out.clark_parameter) - 1.0) <= tol;
  return out;
}

Eigen::MatrixXcd RankOneData::dense() const {
  Eigen::MatrixXcd m = diag.asDiagonal();
  m.noalias() += u * v.adjoint();
  return m;
}

RankOneData rank_one_data(SpacePtr space, const ModelVector& u) {
  check_membership(space, u);
  RankOneData out;
  out.diag = clark_points_vec(*space);
  const Eigen::VectorXd sw = sqrt_weights_vec(*space);
  out.u = u.coords - sw.cast<cplx>();
  out.v = chibar_theta(space).coords;
  return out;
}

Eigen::VectorXcd rank_one_resolvent(const RankOneData& t, cplx lambda,
                                    const Eigen::VectorXcd& b) {
  const auto n = t.diag.size();
  if (t.u.size() != n || t.v.size() != n || b.size() != n)
    throw Error("coordinate dimension mismatch");
  Eigen::VectorXcd y(n), w(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx d = t.diag(k) - lambda;
    if (std::abs(d) < 1e-12)
      throw Error("resolvent evaluated on the spectrum of the diagonal part");
    y(k) = b(k) / d;
    w(k) = t.u(k) / d;
  }
  const cplx denom = 1.0 + t.v.dot(w);
  if (std::abs(denom) < 1e-12)
    throw Error("resolvent evaluated at an eigenvalue");
  return y - (t.v.dot(y) / denom) * w;
}

OperatorMatrix att_operator(SpacePtr dom, SpacePtr cod, const BoundaryFn& psi,
                            int quad) {
  const int nd = dom->dim();
  const int N = cross_quad(*dom, *cod, quad);
  Eigen::MatrixXcd m(cod->dim(), nd);
  for (int j = 0; j < nd; ++j) {
    Eigen::VectorXcd ej = Eigen::VectorXcd::Zero(nd);
    ej(j) = 1.0;
    const ModelVector basis_j{dom, ej};
    const BoundaryFn h = [&psi, &basis_j](cplx z) {
      return psi(z) * basis_j.eval(z);
    };
    m.col(j) = project(cod, h, N).p.coords;
  }
  return {m, dom, cod};
}

MultiplierOp multiplier_operator(SpacePtr dom, SpacePtr cod,
                                 const BoundaryFn& g, int quad) {
  const int nd = dom->dim();
  const int N = cross_quad(*dom, *cod, quad);
  MultiplierOp out;
  Eigen::MatrixXcd m(cod->dim(), nd);
  double worst = 0.0;
  for (int j = 0; j < nd; ++j) {
    Eigen::VectorXcd ej = Eigen::VectorXcd::Zero(nd);
    ej(j) = 1.0;
    const ModelVector basis_j{dom, ej};
    const BoundaryFn h = [&g, &basis_j](cplx z) {
      return g(z) * basis_j.eval(z);
    };
    const Projection pr = project(cod, h, N);
    m.col(j) = pr.p.coords;
    worst = std::max(worst, std::sqrt(pr.residual_norm));
  }
  out.op = {m, dom, cod};
  out.membership_residual = worst;
  const Eigen::VectorXcd cd = chibar_theta(dom).coords;
  const Eigen::VectorXcd cc = chibar_theta(cod).coords;
  out.g1_0 = std::conj(cc.dot(m * cd));
  return out;
}

RecoveredMultiplier multiplier_from_intertwiner(const OperatorMatrix& X,
                                                const OperatorMatrix& T,
                                                const UnitPoint& c, int quad) {
  if (!X.dom || !X.cod) throw Error("operator lacks model space attachments");
  SpacePtr dom = X.dom;
  SpacePtr cod = X.cod;
  if (T.mat.rows() != cod->dim() || T.mat.cols() != cod->dim())
    throw Error("coordinate dimension mismatch");

  // The perturbation vector of T = S + (., conj(z) omega) u.
  const Eigen::MatrixXcd s = compressed_shift(cod).mat;
  const Eigen::VectorXcd chibar_cod = chibar_theta(cod).coords;
  const Eigen::VectorXcd u_coords = (T.mat - s) * chibar_cod;
  const double rank_one_defect = operator_norm(
      T.mat - s - u_coords * chibar_cod.adjoint());
  if (rank_one_defect > 1e-8 * (1.0 + operator_norm(T.mat)))
    throw Error("operator is not a rank-one perturbation of the compressed shift");
  const ModelVector u{cod, u_coords};

  RecoveredMultiplier out;
  const Eigen::VectorXcd chibar_dom = chibar_theta(dom).coords;
  const Eigen::VectorXcd xstar_chibar = X.mat.adjoint() * chibar_cod;
  out.beta = chibar_dom.dot(xstar_chibar);
  out.hypothesis_residual = (xstar_chibar - out.beta * chibar_dom).norm();

  // g = conj(beta) (u - omega) / (c - theta) as one rational function.  With
  // u = N_u / Q_omega and omega = front P / Q_omega the difference is
  // A / Q_omega; dividing by c - theta = -front_theta prod(z - zeta_i) /
  // Q_theta, zeta_i the c level set, turns the quotient into
  // -conj(beta)/front_theta * B / Q_omega after the zeta_i are deflated out
  // of B = A Q_theta.
  const int nc = cod->dim();
  std::vector<cplx> eta(static_cast<size_t>(nc));
  for (int k = 0; k < nc; ++k) eta[static_cast<size_t>(k)] = cod->clark_point(k).value();
  const Poly full = poly_from_roots(eta);
  Poly n_u = Poly::Zero(nc);
  for (int k = 0; k < nc; ++k) {
    const cplx coeff = cod->clark_weight(k) * eta[static_cast<size_t>(k)] *
                       (u_coords(k) / std::sqrt(cod->clark_weight(k)));
    n_u += coeff * poly_deflate(full, eta[static_cast<size_t>(k)]);
  }
  n_u *= cod->theta().front_constant().value();
  Poly a = n_u;
  {
    const Poly& num = cod->theta().numerator();
    Poly padded = Poly::Zero(std::max(a.size(), num.size()));
    padded.head(a.size()) = a;
    padded.head(num.size()) -= num;
    a = padded;
  }
  Poly b = poly_mul(a, dom->theta().denominator());
  double defl = 0.0;
  for (const UnitPoint& zeta : level_set(dom->theta(), c)) {
    const cplx zi = zeta.value();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    defl = std::max(defl, std::abs(poly_eval(b, zi)) / scale);
    b = poly_deflate(b, zi);
  }
  out.deflation_residual = defl;

  const cplx front_scale = -std::conj(out.beta) / dom->theta().front_constant().value();
  const Poly q_cod = cod->theta().denominator();
  out.g = [front_scale, b, q_cod](cplx z) {
    return front_scale * poly_eval(b, z) / poly_eval(q_cod, z);
  };

  out.g_at_cod_clark.resize(nc);
  for (int k = 0; k < nc; ++k)
    out.g_at_cod_clark(k) = out.g(eta[static_cast<size_t>(k)]);

  out.rebuilt = multiplier_operator(dom, cod, out.g, quad);
  out.defect = operator_norm(X.mat - out.rebuilt.op.mat);
  return out;
}

PerturbationFromMultiplier perturbation_from_multiplier(SpacePtr dom,
                                                        SpacePtr cod,
                                                        const BoundaryFn& g,
                                                        const UnitPoint& c,
                                                        int quad) {
  PerturbationFromMultiplier out;
  out.X = multiplier_operator(dom, cod, g, quad);
  out.g1_0 = out.X.g1_0;
  if (std::abs(out.g1_0) < 1e-12)
    throw Error("degenerate multiplier: vanishing mean coefficient");

  const FiniteBlaschke& theta = dom->theta();
  const FiniteBlaschke& omega = cod->theta();
  const cplx cv = c.value();
  const cplx scale = 1.0 / std::conj(out.g1_0);
  const BoundaryFn h = [&theta, &omega, cv, scale, &g](cplx z) {
    return omega.evaluate(z) + scale * (cv - theta.evaluate(z)) * g(z);
  };
  const Projection pr = project(cod, h, cross_quad(*dom, *cod, quad));
  out.u = pr.p;
  out.membership_residual = std::sqrt(pr.residual_norm);
  double mismatch = 0.0;
  const Eigen::VectorXcd uv = out.u.clark_values();
  for (int j = 0; j < cod->dim(); ++j)
    mismatch = std::max(mismatch,
                        std::abs(uv(j) - h(cod->clark_point(j).value())));
  out.value_mismatch = mismatch;

  out.T = rank_one_perturbation(cod, out.u);
  const Eigen::MatrixXcd uc = clark_unitary(dom, c).mat;
  out.intertwining_residual =
      operator_norm(out.X.op.mat * uc - out.T.mat * out.X.op.mat);
  return out;
}

cplx FactoredSymbol::eval(cplx z) const {
  cplx v = outer ? outer(z) : cplx(1.0, 0.0);
  for (const cplx& a : inner_zeros) {
    if (std::abs(a) < 1e-14) {
      v *= z;
    } else {
      v *= (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
    }
  }
  return v;
}

BoundaryFn FactoredSymbol::fn() const {
  FactoredSymbol copy = *this;
  return [copy](cplx z) { return copy.eval(z); };
}

std::vector<BoundaryFn> takenaka_basis(const std::vector<cplx>& zeros) {
  std::vector<BoundaryFn> out;
  out.reserve(zeros.size());
  for (size_t j = 0; j < zeros.size(); ++j) {
    const std::vector<cplx> head(zeros.begin(),
                                 zeros.begin() + static_cast<long>(j));
    const cplx bj = zeros[j];
    const double amp = std::sqrt(1.0 - std::norm(bj));
    out.push_back([head, bj, amp](cplx z) {
      cplx v = amp / (1.0 - std::conj(bj) * z);
      for (const cplx& a : head) {
        if (std::abs(a) < 1e-14) {
          v *= z;
        } else {
          v *= (std::abs(a) / a) * (a - z) / (1.0 - std::conj(a) * z);
        }
      }
      return v;
    });
  }
  return out;
}

AttStructure att_structure(SpacePtr dom, SpacePtr cod, const FactoredSymbol& g,
                           int quad) {
  AttStructure out;
  const int nd = dom->dim();

  // alpha = greatest common inner divisor of the symbol's inner part and the
  // codomain inner function, by greedy zero matching.
  std::vector<cplx> g_zeros = g.inner_zeros;
  std::vector<bool> used(g_zeros.size(), false);
  for (const cplx& w : cod->theta().zeros()) {
    bool matched = false;
    for (size_t i = 0; i < g_zeros.size(); ++i) {
      if (!used[i] && std::abs(g_zeros[i] - w) < 1e-8) {
        used[i] = true;
        out.alpha_zeros.push_back(w);
        matched = true;
        break;
      }
    }
    if (!matched) out.beta_zeros.push_back(w);
  }
  auto zero_order = [](const cplx& a, const cplx& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (std::abs(ma - mb) > 1e-14) return ma < mb;
    return std::arg(a) < std::arg(b);
  };
  std::sort(out.alpha_zeros.begin(), out.alpha_zeros.end(), zero_order);
  std::sort(out.beta_zeros.begin(), out.beta_zeros.end(), zero_order);

  const int deg_beta = static_cast<int>(out.beta_zeros.size());
  out.kernel_dim_predicted = std::max(0, nd - deg_beta);

  // Cross Gram against the orthonormal basis of K_beta: f in dom lies in
  // beta H^2 exactly when it kills every column.
  const int N = cross_quad(*dom, *cod, quad);
  const Eigen::VectorXcd grid = circle_grid(N);
  const Eigen::MatrixXcd e_dom = dom->basis_boundary(grid);
  const std::vector<BoundaryFn> tm = takenaka_basis(out.beta_zeros);
  Eigen::MatrixXcd gram(nd, deg_beta);
  for (int j = 0; j < deg_beta; ++j) {
    Eigen::VectorXcd tmv(N);
    for (int t = 0; t < N; ++t) tmv(t) = tm[static_cast<size_t>(j)](grid(t));
    for (int i = 0; i < nd; ++i)
      gram(i, j) = inner_grid(e_dom.row(i).transpose(), tmv);
  }
  out.cross_gram = gram;

  int rank = 0;
  if (deg_beta > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram.transpose(),
                                           Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > cut) ++rank;
    out.kernel_basis = svd.matrixV().rightCols(nd - rank);
  } else {
    out.kernel_basis = Eigen::MatrixXcd::Identity(nd, nd);
  }
  out.kernel_dim = nd - rank;
  out.closure_rank_match = rank == deg_beta;

  const OperatorMatrix A = att_operator(dom, cod, g.fn(), quad);
  double kr = 0.0;
  for (Eigen::Index k = 0; k < out.kernel_basis.cols(); ++k)
    kr = std::max(kr, (A.mat * out.kernel_basis.col(k)).norm());
  out.kernel_residual = kr;

  // Range closure should be alpha K_beta; test each alpha tm_j against the
  // column span of A.
  Eigen::JacobiSVD<Eigen::MatrixXcd> asvd(A.mat, Eigen::ComputeThinU);
  const auto& asv = asvd.singularValues();
  const double acut = 1e-10 * std::max(1.0, asv.size() ? asv(0) : 0.0);
  int arank = 0;
  for (Eigen::Index i = 0; i < asv.size(); ++i)
    if (asv(i) > acut) ++arank;
  const Eigen::MatrixXcd q = asvd.matrixU().leftCols(arank);
  const FactoredSymbol alpha{out.alpha_zeros, nullptr};
  double rr = 0.0;
  for (int j = 0; j < deg_beta; ++j) {
    Eigen::VectorXcd vals(cod->dim());
    for (int k = 0; k < cod->dim(); ++k) {
      const cplx etav = cod->clark_point(k).value();
      vals(k) = alpha.eval(etav) * tm[static_cast<size_t>(j)](etav);
    }
    const Eigen::VectorXcd coords = cod->coords_from_clark_values(vals);
    rr = std::max(rr, (coords - q * (q.adjoint() * coords)).norm());
  }
  out.range_residual = rr;
  return out;
}

AttInverse att_inverse(const OperatorMatrix& X, const BoundaryFn& one_over_g,
                       int quad) {
  if (!X.dom || !X.cod) throw Error("operator lacks model space attachments");
  if (X.dom->dim() != X.cod->dim())
    throw Error("inverse requires equal dimensions");
  AttInverse out;
  out.inverse = att_operator(X.cod, X.dom, one_over_g, quad);
  const int n = X.dom->dim();
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  out.left_residual = operator_norm(out.inverse.mat * X.mat - id);
  out.right_residual = operator_norm(X.mat * out.inverse.mat - id);
  return out;
}

DirectSumCheck direct_sum_check(SpacePtr a, SpacePtr b, int quad) {
  DirectSumCheck out;
  const int na = a->dim();
  const int nb = b->dim();
  out.dims_equal = na == nb;
  const int N = cross_quad(*a, *b, quad);
  const Eigen::VectorXcd grid = circle_grid(N);
  const Eigen::MatrixXcd ea = a->basis_boundary(grid);
  const Eigen::MatrixXcd eb = b->basis_boundary(grid);
  Eigen::MatrixXcd gram(nb, na);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < na; ++j)
      gram(i, j) = inner_grid(ea.row(j).transpose(), eb.row(i).transpose());
  out.cross_gram = gram;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(gram);
  const auto& sv = svd.singularValues();
  out.sigma_min = sv(sv.size() - 1);
  out.condition = out.sigma_min > 0.0
                      ? sv(0) / out.sigma_min
                      : std::numeric_limits<double>::infinity();
  out.sup_dist = sup_distance(a->theta(), b->theta());
  out.distance_criterion = out.sup_dist < 1.0;
  out.invertible = out.dims_equal && out.sigma_min > 1e-10;
  return out;
}

KrylovDecomposition krylov_decompose(const Eigen::MatrixXcd& t,
                                     const Eigen::VectorXcd& b, double tol) {
  const auto n = t.rows();
  if (t.cols() != n || b.size() != n) throw Error("coordinate dimension mismatch");
  if (b.norm() == 0.0) throw Error("cyclic vector is zero");

  const double scale = t.norm();
  Eigen::MatrixXcd v(n, n);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n);
  v.col(0) = b / b.norm();
  int dim = static_cast<int>(n);
  double breakdown = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXcd w = t * v.col(k);
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i <= k; ++i) {
        const cplx c = v.col(i).dot(w);
        w -= c * v.col(i);
        h(i, k) += c;
      }
    }
    const double hh = w.norm();
    h(k + 1, k) = hh;
    breakdown = hh;
    if (hh < tol * (scale + 1.0)) {
      dim = static_cast<int>(k) + 1;
      break;
    }
    if (k + 1 < n) v.col(k + 1) = w / hh;
  }

  KrylovDecomposition out;
  out.dim = dim;
  out.basis = v.leftCols(dim);
  out.breakdown = breakdown;
  if (dim < n)
    out.hess = h.topLeftCorner(dim + 1, dim);
  else
    out.hess = h.topLeftCorner(n, n);
  out.compression_residual =
      (out.basis.adjoint() * t * out.basis - out.hess.topLeftCorner(dim, dim))
          .norm();

  Eigen::MatrixXcd raw(n, dim);
  raw.col(0) = b;
  for (int k = 1; k < dim; ++k) raw.col(k) = t * raw.col(k - 1);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(raw, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * std::max(1.0, sv(0))) ++rank;
  const Eigen::MatrixXcd uk = svd.matrixU().leftCols(rank);
  out.span_residual =
      (out.basis - uk * (uk.adjoint() * out.basis)).norm();
  return out;
}

Cyclicity cyclicity_check(const Eigen::MatrixXcd& t,
                          const Eigen::VectorXcd& b) {
  const auto n = t.rows();
  Eigen::MatrixXcd raw(n, n);
  raw.col(0) = b;
  for (Eigen::Index k = 1; k < n; ++k) raw.col(k) = t * raw.col(k - 1);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(raw);
  Cyclicity out;
  out.smallest_sv = svd.singularValues()(n - 1);
  const KrylovDecomposition kry = krylov_decompose(t, b);
  out.krylov_dim = kry.dim;
  out.cyclic = kry.dim == n;
  return out;
}

NormalizedPair normalize_intertwining(const AtomicMeasure& nu,
                                      const Eigen::VectorXcd& phi_vals,
                                      const Eigen::VectorXcd& psi_vals,
                                      const AtomicMeasure& mu,
                                      const Eigen::MatrixXcd& y) {
  const auto n = static_cast<Eigen::Index>(nu.size());
  const auto m = static_cast<Eigen::Index>(mu.size());
  if (phi_vals.size() != n || psi_vals.size() != n)
    throw Error("coordinate dimension mismatch");
  if (y.rows() != n || y.cols() != m)
    throw Error("coordinate dimension mismatch");

  const WeightTransform w1 = weight_transform(nu, psi_vals);
  const double a1 = w1.a;

  Eigen::VectorXcd z1(n), phi1(n), zeta(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    zeta(k) = nu.atom(static_cast<size_t>(k)).point.value();
    z1(k) = std::conj(zeta(k)) * std::abs(psi_vals(k)) / psi_vals(k);
    phi1(k) = a1 * std::conj(zeta(k)) * phi_vals(k) / psi_vals(k);
  }

  const Eigen::VectorXcd phi_c = coords_on(nu, phi_vals);
  const Eigen::VectorXcd psi_c = coords_on(nu, psi_vals);
  Eigen::MatrixXcd t = zeta.asDiagonal();
  t.noalias() += phi_c * psi_c.adjoint();

  const Eigen::MatrixXcd t1 =
      z1.asDiagonal() * t * z1.conjugate().asDiagonal();

  Eigen::MatrixXcd t1_form = zeta.asDiagonal();
  const Eigen::VectorXcd phi1_c = coords_on(w1.mu1, phi1);
  const Eigen::VectorXcd chibar_nu1 = chibar_coords_on(w1.mu1);
  t1_form.noalias() += phi1_c * chibar_nu1.adjoint();

  // psi pulled back to the mu side through Y.
  const Eigen::VectorXcd psi_tilde_c = y.adjoint() * psi_c / std::sqrt(a1);
  Eigen::VectorXcd psi_tilde(m), xi(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    xi(j) = mu.atom(static_cast<size_t>(j)).point.value();
    psi_tilde(j) =
        psi_tilde_c(j) / std::sqrt(mu.atom(static_cast<size_t>(j)).weight);
  }
  const WeightTransform w2 = weight_transform(mu, psi_tilde);
  const double a2 = w2.a;
  Eigen::VectorXcd z2(m);
  for (Eigen::Index j = 0; j < m; ++j)
    z2(j) = std::conj(xi(j)) * std::abs(psi_tilde(j)) / psi_tilde(j);

  const Eigen::MatrixXcd x = (1.0 / std::sqrt(a2)) * (z1.asDiagonal() * y *
                                                      z2.conjugate().asDiagonal());

  const Eigen::VectorXcd chibar_mu1 = chibar_coords_on(w2.mu1);
  const double chibar_residual =
      (x.adjoint() * chibar_nu1 - chibar_mu1).norm();
  const Eigen::MatrixXcd u_mu1 = xi.asDiagonal();
  const double intertwining_residual = operator_norm(x * u_mu1 - t1 * x);
  const double form_residual = operator_norm(t1 - t1_form);

  return NormalizedPair{w1.mu1,       w2.mu1, phi1,
                        t1,           x,      a1,
                        a2,           chibar_residual,
                        form_residual, intertwining_residual};
}

TriangularBlocks triangularize_reductive(const Eigen::VectorXcd& v_diag,
                                         const Eigen::VectorXcd& u,
                                         const Eigen::VectorXcd& v,
                                         double cluster_tol, double zero_tol) {
  const auto n = v_diag.size();
  if (u.size() != n || v.size() != n)
    throw Error("coordinate dimension mismatch");
  for (Eigen::Index k = 0; k < n; ++k)
    if (std::abs(std::abs(v_diag(k)) - 1.0) > 1e-9)
      throw Error("diagonal is not unimodular");

  // Cluster the diagonal by argument with wrap-around.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return UnitPoint(v_diag(a) / std::abs(v_diag(a))).arg_frac() <
           UnitPoint(v_diag(b) / std::abs(v_diag(b))).arg_frac();
  });
  std::vector<std::vector<Eigen::Index>> groups;
  for (Eigen::Index idx : order) {
    if (!groups.empty() &&
        std::abs(v_diag(groups.back().back()) - v_diag(idx)) <= cluster_tol) {
      groups.back().push_back(idx);
    } else {
      groups.push_back({idx});
    }
  }
  if (groups.size() > 1 &&
      std::abs(v_diag(groups.front().front()) - v_diag(groups.back().back())) <=
          cluster_tol) {
    groups.front().insert(groups.front().end(), groups.back().begin(),
                          groups.back().end());
    groups.pop_back();
  }

  struct GroupData {
    std::vector<Eigen::Index> idx;
    cplx lambda;
    double phi = 0.0;
    cplx psi{0.0, 0.0};
    Eigen::VectorXcd q;  // local coordinates within the group
    int kind = 2;        // 0 = V1, 1 = T1, 2 = no perturbation support
  };
  std::vector<GroupData> gs;
  for (const auto& g : groups) {
    GroupData d;
    d.idx = g;
    d.lambda = v_diag(g.front());
    Eigen::VectorXcd ug(static_cast<Eigen::Index>(g.size()));
    for (size_t i = 0; i < g.size(); ++i) ug(static_cast<Eigen::Index>(i)) = u(g[i]);
    d.phi = ug.norm();
    if (d.phi > zero_tol) {
      d.q = ug / d.phi;
      cplx psi = 0.0;
      for (size_t i = 0; i < g.size(); ++i)
        psi += v(g[i]) * std::conj(d.q(static_cast<Eigen::Index>(i)));
      d.psi = psi;
      d.kind = std::abs(psi) <= zero_tol ? 0 : 1;
    }
    gs.push_back(std::move(d));
  }

  TriangularBlocks out;
  auto embed = [&](const GroupData& d, const Eigen::VectorXcd& local) {
    Eigen::VectorXcd col = Eigen::VectorXcd::Zero(n);
    for (size_t i = 0; i < d.idx.size(); ++i)
      col(d.idx[i]) = local(static_cast<Eigen::Index>(i));
    return col;
  };

  std::vector<Eigen::VectorXcd> cols;
  std::vector<cplx> v1_vals, v2_vals;
  std::vector<double> phi_vals;
  std::vector<cplx> psi_vals;
  std::vector<Atom> nu_atoms;
  for (const GroupData& d : gs)
    if (d.kind == 0) {
      cols.push_back(embed(d, d.q));
      v1_vals.push_back(d.lambda);
    }
  out.dim_v1 = static_cast<int>(cols.size());
  for (const GroupData& d : gs)
    if (d.kind == 1) {
      cols.push_back(embed(d, d.q));
      phi_vals.push_back(d.phi);
      psi_vals.push_back(d.psi);
      nu_atoms.push_back({UnitPoint(d.lambda / std::abs(d.lambda)), 1.0});
    }
  out.dim_t1 = static_cast<int>(cols.size()) - out.dim_v1;
  for (const GroupData& d : gs) {
    const auto s = static_cast<Eigen::Index>(d.idx.size());
    if (d.kind == 2) {
      for (Eigen::Index i = 0; i < s; ++i) {
        Eigen::VectorXcd local = Eigen::VectorXcd::Zero(s);
        local(i) = 1.0;
        cols.push_back(embed(d, local));
        v2_vals.push_back(d.lambda);
      }
    } else if (s > 1) {
      Eigen::MatrixXcd seed(s, 1);
      seed.col(0) = d.q;
      const Eigen::MatrixXcd qfull =
          Eigen::HouseholderQR<Eigen::MatrixXcd>(seed).householderQ();
      for (Eigen::Index i = 1; i < s; ++i) {
        cols.push_back(embed(d, qfull.col(i)));
        v2_vals.push_back(d.lambda);
      }
    }
  }
  out.dim_v2 = static_cast<int>(cols.size()) - out.dim_v1 - out.dim_t1;

  Eigen::MatrixXcd basis(n, n);
  for (Eigen::Index k = 0; k < n; ++k) basis.col(k) = cols[static_cast<size_t>(k)];
  out.basis = basis;

  out.v1_diag.resize(out.dim_v1);
  for (int i = 0; i < out.dim_v1; ++i) out.v1_diag(i) = v1_vals[static_cast<size_t>(i)];
  out.v2_diag.resize(out.dim_v2);
  for (int i = 0; i < out.dim_v2; ++i) out.v2_diag(i) = v2_vals[static_cast<size_t>(i)];
  out.phi.resize(out.dim_t1);
  out.psi.resize(out.dim_t1);
  for (int i = 0; i < out.dim_t1; ++i) {
    out.phi(i) = phi_vals[static_cast<size_t>(i)];
    out.psi(i) = psi_vals[static_cast<size_t>(i)];
  }
  Eigen::MatrixXcd t1 = Eigen::MatrixXcd::Zero(out.dim_t1, out.dim_t1);
  for (int i = 0; i < out.dim_t1; ++i)
    t1(i, i) = nu_atoms[static_cast<size_t>(i)].point.value();
  t1.noalias() += out.phi.cast<cplx>() * out.psi.adjoint();
  out.t1 = t1;
  if (!nu_atoms.empty()) out.nu = AtomicMeasure(nu_atoms, "triangular");

  Eigen::MatrixXcd t = v_diag.asDiagonal();
  t.noalias() += u * v.adjoint();
  const Eigen::MatrixXcd btb = basis.adjoint() * t * basis;

  // Residuals: everything strictly below the block diagonal must vanish, and
  // the diagonal blocks must match their canonical forms.
  const int n1 = out.dim_v1, n2 = out.dim_t1, n3 = out.dim_v2;
  double tri = 0.0;
  if (n2 + n3 > 0 && n1 > 0)
    tri = std::max(tri, btb.bottomLeftCorner(n2 + n3, n1).cwiseAbs().maxCoeff());
  if (n3 > 0 && n2 > 0)
    tri = std::max(tri,
                   btb.block(n1 + n2, n1, n3, n2).cwiseAbs().maxCoeff());
  out.triangular_residual = tri;

  double red = 0.0;
  if (n1 > 0)
    red = std::max(red, (btb.topLeftCorner(n1, n1) -
                         Eigen::MatrixXcd(out.v1_diag.asDiagonal()))
                            .norm());
  if (n2 > 0)
    red = std::max(red, (btb.block(n1, n1, n2, n2) - out.t1).norm());
  if (n3 > 0)
    red = std::max(red, (btb.bottomRightCorner(n3, n3) -
                         Eigen::MatrixXcd(out.v2_diag.asDiagonal()))
                            .norm());
  out.reducing_residual = red;
  return out;
}

}  // namespace clarklab
