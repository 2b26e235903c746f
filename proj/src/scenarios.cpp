#include "clarklab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

#include "clarklab/poly.hpp"

namespace clarklab {

namespace {

// 53 uniform bits; hand rolled so the draw sequence is identical across
// standard library implementations.
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

double circular_gap(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

double condition_of(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

void gate(double value, double tol, const char* what) {
  if (!(value <= tol))
    throw Error(std::string("construction residual exceeded tolerance: ") +
                what);
}

std::string fmt_cplx(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << "," << z.imag() << ")";
  return os.str();
}

// Least-squares coefficient of chibar_dom in X* chibar_cod, plus the residual
// of the proportionality X*(chibar omega) = beta (chibar theta).
std::pair<cplx, double> adjoint_chibar_fit(const OperatorMatrix& x) {
  const Eigen::VectorXcd cb_cod = chibar_theta(x.cod).coords;
  const Eigen::VectorXcd cb_dom = chibar_theta(x.dom).coords;
  const Eigen::VectorXcd mapped = x.mat.adjoint() * cb_cod;
  const cplx beta = cb_dom.dot(mapped) / cb_dom.squaredNorm();
  return {beta, (mapped - beta * cb_dom).norm()};
}

void finish_common(Instance& inst, int quad) {
  const int nc = inst.cod->dim();
  inst.g_at_cod_clark.resize(nc);
  for (int k = 0; k < nc; ++k)
    inst.g_at_cod_clark(k) = inst.g(inst.cod->clark_point(k).value());

  const auto [beta, hyp] = adjoint_chibar_fit(inst.x);
  inst.beta = beta;
  inst.hypothesis_residual = hyp;

  const RecoveredMultiplier rec =
      multiplier_from_intertwiner(inst.x, inst.t, inst.intertwined_c, quad);
  inst.multiplier_defect = rec.defect;
  inst.x_condition = condition_of(inst.x.mat);
  inst.t_class = isometry_classification(inst.cod, inst.u);

  gate(inst.membership_residual, 1e-8, "membership");
  gate(inst.intertwining_residual, 1e-8, "intertwining");
  gate(inst.hypothesis_residual, 1e-8, "adjoint chibar mapping");
  gate(inst.identity_residual, 1e-8, "boundary identity");
  gate(inst.multiplier_defect, 1e-6, "multiplier round trip");
}

}  // namespace

Instance example_crofoot(const FiniteBlaschke& theta, cplx lambda,
                         const UnitPoint& c, int quad) {
  if (std::abs(lambda) >= 1.0)
    throw Error("kernel point must lie in the open disk");
  const cplx tl = theta.evaluate(lambda);
  if (std::abs(tl) < 1e-10)
    throw Error("degenerate kernel point: theta vanishes there");

  Instance inst;
  inst.params.kind = "crofoot";
  inst.params.theta_zeros = theta.zeros();
  inst.params.theta_front_arg = theta.front_constant().arg_frac();
  inst.params.c_arg = c.arg_frac();
  inst.params.lambda = lambda;
  inst.c = c;
  inst.intertwined_c = c;

  // The level set theta = theta(lambda): lambda together with the zeros of
  // omega other than the new zero at the origin.
  const Poly level =
      poly_add(theta.numerator(), poly_scale(theta.denominator(), -tl));
  const std::vector<cplx> preimages = poly_roots(level);
  std::vector<cplx> zeros_omega = poly_roots(poly_deflate(level, lambda));
  zeros_omega.push_back(cplx(0.0, 0.0));
  const FiniteBlaschke omega(zeros_omega, theta.front_constant());

  inst.dom = make_space(theta, quad);
  inst.cod = make_space(omega, quad);

  // g = 1 / k_{theta,lambda} collapses to a ratio of the two reflected
  // denominators; this form has no poles on the closed disk.
  const Poly q_dom = theta.denominator();
  const Poly q_cod = omega.denominator();
  inst.g = [q_dom, q_cod](cplx z) {
    return poly_eval(q_dom, z) / poly_eval(q_cod, z);
  };

  const Eigen::VectorXcd grid = circle_grid(128);
  double idres = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const cplx z = grid(i);
    idres = std::max(
        idres, std::abs(inst.g(z) * (1.0 - std::conj(tl) * theta.evaluate(z)) -
                        (1.0 - std::conj(lambda) * z)));
  }
  inst.identity_residual = idres;

  const PerturbationFromMultiplier pfm =
      perturbation_from_multiplier(inst.dom, inst.cod, inst.g, c, quad);
  inst.x = pfm.X.op;
  inst.u = pfm.u;
  inst.t = pfm.T;
  inst.membership_residual =
      std::max(pfm.membership_residual, pfm.X.membership_residual);
  inst.intertwining_residual = pfm.intertwining_residual;

  int distinct = 0;
  for (size_t i = 0; i < preimages.size(); ++i) {
    bool dup = false;
    for (size_t j = 0; j < i && !dup; ++j)
      dup = std::abs(preimages[i] - preimages[j]) <= 1e-8;
    if (!dup) ++distinct;
  }
  inst.nonunitary_expected = distinct > 2;
  inst.nonunitary_asserted = distinct > 2;

  finish_common(inst, quad);
  if (inst.nonunitary_asserted && inst.t_class.unitary)
    throw Error("expected a nonunitary perturbation");

  std::ostringstream os;
  os << "crofoot: theta degree " << theta.degree() << ", lambda "
     << fmt_cplx(lambda) << ", c arg " << c.arg_frac();
  inst.provenance = os.str();
  return inst;
}

Instance example_clark_weight(const FiniteBlaschke& theta, const UnitPoint& c,
                              Eigen::VectorXcd phi, int quad) {
  if (std::abs(c.value() - 1.0) < 1e-12)
    throw Error("clark parameter must differ from one");

  Instance inst;
  inst.params.kind = "clark_weight";
  inst.params.theta_zeros = theta.zeros();
  inst.params.theta_front_arg = theta.front_constant().arg_frac();
  inst.params.c_arg = c.arg_frac();
  inst.c = c;
  inst.intertwined_c = UnitPoint();

  inst.dom = make_space(theta, quad);
  const int n = inst.dom->dim();
  const JMap jm = j_map(inst.dom, c);
  const AtomicMeasure& nu = jm.sigma_c;

  if (phi.size() == 0) phi = Eigen::VectorXcd::Ones(n);
  if (phi.size() != n) throw Error("phi dimension mismatch");
  for (int k = 0; k < n; ++k)
    if (std::abs(phi(k)) < 1e-12) throw Error("phi vanishes at an atom");
  inst.params.phi = phi;

  // Prescale so that the reweighted measure has total mass one; skipped when
  // already normalized so a replayed instance reproduces the same bits.
  double mass = 0.0;
  for (int k = 0; k < n; ++k)
    mass += nu.atom(static_cast<size_t>(k)).weight / std::norm(phi(k));
  const Eigen::VectorXcd phiv =
      std::abs(mass - 1.0) <= 1e-12
          ? phi
          : Eigen::VectorXcd(phi * cplx(std::sqrt(mass), 0.0));

  const WeightTransform wt = weight_transform(nu, phiv.cwiseInverse());
  gate(std::abs(wt.a - 1.0), 1e-10, "weight normalization");
  const AtomicMeasure& nu1 = wt.mu1;

  const FiniteBlaschke omega = FiniteBlaschke::from_clark_measure(nu1);
  inst.cod = make_space(omega, nu1, quad);

  const cplx cb = std::conj(c.value());
  Eigen::VectorXcd uvals(n);
  for (int k = 0; k < n; ++k) uvals(k) = (cb - 1.0) * std::norm(phiv(k)) + 1.0;
  inst.u = model_vector_from_values(inst.cod, uvals);
  inst.t = rank_one_perturbation(inst.cod, inst.u);

  // In Clark coordinates the intertwiner is |phi| times the coordinate map of
  // the c-level basis, rotated by conj(c); no quadrature enters.
  Eigen::MatrixXcd xmat = jm.forward;
  for (int k = 0; k < n; ++k) xmat.row(k) *= cb * std::abs(phiv(k));
  inst.x = OperatorMatrix{xmat, inst.dom, inst.cod};

  const Eigen::MatrixXcd u1 = clark_unitary(inst.dom, UnitPoint()).mat;
  inst.intertwining_residual = operator_norm(xmat * u1 - inst.t.mat * xmat);

  const cplx front_scale =
      omega.front_constant().value() / theta.front_constant().value();
  const Poly q_dom = theta.denominator();
  const Poly q_cod = omega.denominator();
  inst.g = [front_scale, q_dom, q_cod](cplx z) {
    return front_scale * poly_eval(q_dom, z) / poly_eval(q_cod, z);
  };

  double idres = 0.0;
  for (int k = 0; k < n; ++k)
    idres = std::max(idres,
                     std::abs(inst.g(inst.cod->clark_point(k).value()) -
                              cb * std::norm(phiv(k))));
  inst.identity_residual = idres;

  const Projection pg = project(inst.cod, inst.g, quad);
  inst.membership_residual = std::sqrt(pg.residual_norm);

  double mod_max = 0.0, mod_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    mod_max = std::max(mod_max, std::abs(phiv(k)));
    mod_min = std::min(mod_min, std::abs(phiv(k)));
  }
  const double ratio = mod_max / mod_min;
  inst.nonunitary_expected = ratio > 1.0 + 1e-10;
  inst.nonunitary_asserted = ratio >= 1.1;

  finish_common(inst, quad);
  if (inst.nonunitary_asserted && inst.t_class.unitary)
    throw Error("expected a nonunitary perturbation");
  if (ratio <= 1.0 + 1e-12 && !inst.t_class.unitary)
    throw Error("expected a unitary perturbation");

  std::ostringstream os;
  os << "clark weight: theta degree " << theta.degree() << ", c arg "
     << c.arg_frac() << ", |phi| spread " << ratio;
  inst.provenance = os.str();
  return inst;
}

namespace {

Instance build_triangular(const InstanceParams& params, int quad) {
  InstanceParams core_p = params;
  core_p.kind = "clark_weight";
  core_p.head_args.clear();
  core_p.head_u.clear();
  core_p.tail_args.clear();
  Instance inst = build_instance(core_p, quad);

  if (params.head_u.size() != params.head_args.size())
    throw Error("coordinate dimension mismatch");
  for (const cplx& h : params.head_u)
    if (std::abs(h) < 1e-12) throw Error("head data must not vanish");

  const RankOneData rod = rank_one_data(inst.cod, inst.u);
  const int h = static_cast<int>(params.head_args.size());
  const int tl = static_cast<int>(params.tail_args.size());
  const int mid = static_cast<int>(rod.diag.size());
  const int total = h + mid + tl;

  // The frame diagonal must stay clear of both spectra the reduction meets:
  // the middle-block atoms and the Clark points of the core domain.
  std::vector<double> protected_args;
  for (int k = 0; k < mid; ++k)
    protected_args.push_back(inst.cod->clark_point(k).arg_frac());
  for (int k = 0; k < inst.dom->dim(); ++k)
    protected_args.push_back(inst.dom->clark_point(k).arg_frac());
  const double min_gap = 0.05 / total;
  std::vector<double> frame = params.head_args;
  frame.insert(frame.end(), params.tail_args.begin(), params.tail_args.end());
  for (size_t i = 0; i < frame.size(); ++i) {
    for (double q : protected_args)
      if (circular_gap(frame[i], q) < min_gap)
        throw Error("frame point collides with the core spectrum");
    for (size_t j = 0; j < i; ++j)
      if (circular_gap(frame[i], frame[j]) < min_gap)
        throw Error("frame points too close together");
  }

  inst.tri_diag.resize(total);
  inst.tri_u = Eigen::VectorXcd::Zero(total);
  inst.tri_v = Eigen::VectorXcd::Zero(total);
  for (int i = 0; i < h; ++i) {
    inst.tri_diag(i) =
        UnitPoint::from_arg_frac(params.head_args[static_cast<size_t>(i)])
            .value();
    inst.tri_u(i) = params.head_u[static_cast<size_t>(i)];
  }
  inst.tri_diag.segment(h, mid) = rod.diag;
  inst.tri_u.segment(h, mid) = rod.u;
  inst.tri_v.segment(h, mid) = rod.v;
  for (int i = 0; i < tl; ++i)
    inst.tri_diag(h + mid + i) =
        UnitPoint::from_arg_frac(params.tail_args[static_cast<size_t>(i)])
            .value();

  cplx det_ratio = 1.0;
  for (int k = 0; k < total; ++k)
    det_ratio += std::conj(inst.tri_v(k)) * inst.tri_u(k) / inst.tri_diag(k);
  if (std::abs(det_ratio) < 1e-12) throw Error("frame operator is singular");

  InstanceParams full = params;
  full.phi = inst.params.phi;  // resolved values, so a replay is identical
  inst.params = full;

  std::ostringstream os;
  os << inst.provenance << "; framed " << h << "+" << mid << "+" << tl;
  inst.provenance = os.str();
  return inst;
}

}  // namespace

Instance build_instance(const InstanceParams& params, int quad) {
  const FiniteBlaschke theta(params.theta_zeros,
                             UnitPoint::from_arg_frac(params.theta_front_arg));
  if (params.kind == "crofoot") {
    return example_crofoot(theta, params.lambda,
                           UnitPoint::from_arg_frac(params.c_arg), quad);
  }
  if (params.kind == "clark_weight") {
    Instance inst = example_clark_weight(
        theta, UnitPoint::from_arg_frac(params.c_arg), params.phi, quad);
    return inst;
  }
  if (params.kind == "triangular") return build_triangular(params, quad);
  throw Error("unknown instance kind: " + params.kind);
}

namespace {

AtomicMeasure draw_measure(std::mt19937_64& rng, int degree) {
  const double gap = 0.05 / degree;
  std::vector<double> args;
  for (int tries = 0; tries < 50 && args.empty(); ++tries) {
    std::vector<double> cand(static_cast<size_t>(degree));
    for (double& a : cand) a = u01(rng);
    std::vector<double> sorted = cand;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (int i = 0; i < degree && ok; ++i) {
      const double next = sorted[static_cast<size_t>((i + 1) % degree)];
      ok = circular_gap(sorted[static_cast<size_t>(i)], next) >= gap ||
           degree == 1;
    }
    if (ok) args = cand;
  }
  if (args.empty()) throw Error("atom draw exhausted");

  std::vector<double> e(static_cast<size_t>(degree));
  double esum = 0.0;
  for (double& x : e) {
    x = 1e-3 + u01(rng);
    esum += x;
  }
  std::vector<Atom> atoms;
  const double denom = 0.05 * degree + 0.95;
  for (int i = 0; i < degree; ++i)
    atoms.push_back({UnitPoint::from_arg_frac(args[static_cast<size_t>(i)]),
                     (0.05 + 0.95 * e[static_cast<size_t>(i)] / esum) / denom});
  return AtomicMeasure(atoms, "drawn");
}

InstanceParams draw_params(std::mt19937_64& rng, int degree,
                           const std::string& kind) {
  if (kind == "triangular") {
    const int h = degree >= 2 ? std::max(1, degree / 4) : 0;
    const int t = degree >= 3 ? std::max(1, degree / 4) : 0;
    const int mid = degree - h - t;
    InstanceParams p = draw_params(rng, mid, "clark_weight");
    p.kind = "triangular";

    // Build the core once to learn both spectra the frame must avoid.
    const Instance core = build_instance(p, 0);
    std::vector<double> protected_args;
    for (int k = 0; k < core.cod->dim(); ++k)
      protected_args.push_back(core.cod->clark_point(k).arg_frac());
    for (int k = 0; k < core.dom->dim(); ++k)
      protected_args.push_back(core.dom->clark_point(k).arg_frac());
    const double gap = 0.05 / degree;

    std::vector<double> frame;
    auto draw_separated = [&](int count, std::vector<double>& dst) {
      for (int i = 0; i < count; ++i) {
        bool placed = false;
        for (int tries = 0; tries < 50 && !placed; ++tries) {
          const double a = u01(rng);
          placed = true;
          for (double q : protected_args)
            if (circular_gap(a, q) < gap) placed = false;
          for (double q : frame)
            if (placed && circular_gap(a, q) < gap) placed = false;
          if (placed) {
            dst.push_back(a);
            frame.push_back(a);
          }
        }
        if (!placed) throw Error("frame draw exhausted");
      }
    };
    draw_separated(h, p.head_args);
    draw_separated(t, p.tail_args);
    for (int i = 0; i < h; ++i)
      p.head_u.push_back(std::polar(0.5 + u01(rng), kTau * u01(rng)));
    return p;
  }

  const AtomicMeasure mu = draw_measure(rng, degree);
  const FiniteBlaschke theta = FiniteBlaschke::from_clark_measure(mu);
  InstanceParams p;
  p.kind = kind;
  p.theta_zeros = theta.zeros();
  p.theta_front_arg = theta.front_constant().arg_frac();

  if (kind == "crofoot") {
    p.c_arg = u01(rng);
    bool placed = false;
    for (int tries = 0; tries < 50 && !placed; ++tries) {
      const cplx lam = std::polar(0.2 + 0.6 * u01(rng), kTau * u01(rng));
      if (std::abs(theta.evaluate(lam)) >= 1e-3) {
        p.lambda = lam;
        placed = true;
      }
    }
    if (!placed) throw Error("interpolation point draw exhausted");
    return p;
  }

  p.c_arg = 0.05 + 0.9 * u01(rng);
  bool placed = false;
  for (int tries = 0; tries < 50 && !placed; ++tries) {
    Eigen::VectorXcd phi(degree);
    double mmax = 0.0, mmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < degree; ++k) {
      phi(k) = std::polar(0.5 + 1.5 * u01(rng), kTau * u01(rng));
      mmax = std::max(mmax, std::abs(phi(k)));
      mmin = std::min(mmin, std::abs(phi(k)));
    }
    if (degree == 1 || mmax / mmin >= 1.1) {
      p.phi = phi;
      placed = true;
    }
  }
  if (!placed) throw Error("weight draw exhausted");
  return p;
}

}  // namespace

Instance random_instance(int degree, const std::string& kind,
                         std::uint64_t seed) {
  if (degree < 1 || degree > 16) throw Error("degree out of range");
  if (kind != "crofoot" && kind != "clark_weight" && kind != "triangular")
    throw Error("unknown instance kind: " + kind);

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      const InstanceParams p = draw_params(rng, degree, kind);
      Instance inst = build_instance(p, 0);
      if (kind == "triangular") {
        cplx det_ratio = 1.0;
        for (Eigen::Index k = 0; k < inst.tri_diag.size(); ++k)
          det_ratio +=
              std::conj(inst.tri_v(k)) * inst.tri_u(k) / inst.tri_diag(k);
        if (std::abs(det_ratio) < 1e-3) continue;
        Eigen::MatrixXcd tmat = inst.tri_diag.asDiagonal();
        tmat.noalias() += inst.tri_u * inst.tri_v.adjoint();
        const PowerSweep ps = power_sweep(tmat, 128);
        if (ps.diverged || ps.m_plus > 1e4) continue;
      }
      inst.params.seed = seed;
      inst.provenance += " [seed " + std::to_string(seed) + "]";
      return inst;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("degenerate seed");
}

namespace {

const char* kEigenPathStages[] = {
    "unimodular_spectrum",       "spectrum_separation",
    "eigenvector_condition",     "adjoint_cyclicity",
    "normalization_chibar",      "normalization_form",
    "normalization_intertwining", "model_transfer",
    "model_chibar",              "multiplier_realization",
    "inverse_power_bound",       "adjoint_norm_transfer"};

}  // namespace

PipelineReport similarity_pipeline(const Eigen::VectorXcd& v_diag,
                                   const Eigen::VectorXcd& u,
                                   const Eigen::VectorXcd& v,
                                   const PipelineOptions& opts) {
  const Eigen::Index n = v_diag.size();
  if (u.size() != n || v.size() != n)
    throw Error("coordinate dimension mismatch");

  PipelineReport rep;
  bool alive = true;
  auto stage = [&](const std::string& name, bool pass, double value,
                   std::string detail, bool structural) {
    rep.stages.push_back({name, pass, value, std::move(detail)});
    if (!pass && structural) {
      if (opts.throw_on_stage_failure)
        throw Error("pipeline stage failed: " + name);
      alive = false;
    }
  };
  auto finish = [&]() {
    rep.all_pass =
        std::all_of(rep.stages.begin(), rep.stages.end(),
                    [](const PipelineStage& s) { return s.pass; });
    return rep;
  };

  Eigen::MatrixXcd tmat = v_diag.asDiagonal();
  tmat.noalias() += u * v.adjoint();
  const double tnorm = operator_norm(tmat);

  {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(tmat);
    const double smin = svd.singularValues()(n - 1);
    const double smax = svd.singularValues()(0);
    stage("invertible", smin > 1e-12 * std::max(1.0, smax), smin, "", true);
  }
  if (!alive) return finish();

  const PowerSweep ps = power_sweep(tmat, opts.n_sweep);
  rep.m_plus = ps.m_plus;
  rep.m_minus = ps.m_minus;
  stage("power_bounded", !ps.diverged, ps.m_plus, "sup over the sweep", true);
  if (!alive) return finish();

  rep.blocks = triangularize_reductive(v_diag, u, v);
  const TriangularBlocks& tb = rep.blocks;
  const double rtol = 1e-9 * (1.0 + tnorm);
  stage("triangular_reconstruction", tb.triangular_residual <= rtol,
        tb.triangular_residual, "", true);
  stage("reducing_blocks", tb.reducing_residual <= rtol, tb.reducing_residual,
        "", true);
  if (!alive) return finish();

  const bool has_mid = tb.dim_t1 > 0;
  if (has_mid) {
    const PowerSweep ps1 = power_sweep(tb.t1, opts.n_sweep);
    rep.m1_plus = ps1.m_plus;
    rep.m1_minus = ps1.m_minus;
    stage("middle_power_bounded", !ps1.diverged, ps1.m_plus, "", true);
  } else {
    stage("middle_power_bounded", true, 1.0, "empty middle block", false);
  }
  if (!alive) return finish();

  rep.qqq_lhs = rep.m_minus;
  rep.qqq_rhs = rep.m1_minus * (2.0 * rep.m_plus * rep.m_plus + 1.0);
  stage("block_inverse_chain", rep.qqq_lhs <= rep.qqq_rhs * (1.0 + 1e-9),
        rep.qqq_lhs, "against m1_minus (2 m_plus^2 + 1)", false);

  rep.certificate =
      certify(tmat, opts.n_sweep, {"chain", "block_step"}, rep.m1_minus);
  stage("power_bound_certificates", rep.certificate.all_pass, rep.m_minus,
        "chain and block_step", false);

  if (!has_mid) {
    for (const char* name : kEigenPathStages)
      stage(name, true, 0.0, "empty middle block", false);
    return finish();
  }

  // Adjoint side of the middle block: conjugated atoms, swapped rank-one
  // data, coordinates permuted to the sorted order of the new atoms.
  const int d = tb.dim_t1;
  const AtomicMeasure& nu = *tb.nu;
  std::vector<int> perm(static_cast<size_t>(d));
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    return nu.atom(static_cast<size_t>(a)).point.conj().arg_frac() <
           nu.atom(static_cast<size_t>(b)).point.conj().arg_frac();
  });
  std::vector<Atom> atoms_star;
  Eigen::VectorXcd phi_t(d), psi_t(d);
  for (int k = 0; k < d; ++k) {
    atoms_star.push_back(
        {nu.atom(static_cast<size_t>(perm[static_cast<size_t>(k)])).point.conj(),
         1.0});
    phi_t(k) = tb.phi(perm[static_cast<size_t>(k)]);
    psi_t(k) = tb.psi(perm[static_cast<size_t>(k)]);
  }
  const AtomicMeasure nu_star(atoms_star, "adjoint");

  Eigen::MatrixXcd rstar = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k)
    rstar(k, k) = nu_star.atom(static_cast<size_t>(k)).point.value();
  rstar.noalias() += psi_t * phi_t.adjoint();

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(rstar);
  if (es.info() != Eigen::Success) {
    stage("unimodular_spectrum", false, 0.0, "eigensolver failed", true);
    return finish();
  }
  Eigen::VectorXcd lam = es.eigenvalues();
  Eigen::MatrixXcd w = es.eigenvectors();
  std::vector<int> eperm(static_cast<size_t>(d));
  std::iota(eperm.begin(), eperm.end(), 0);
  std::vector<double> efrac(static_cast<size_t>(d));
  double udev = 0.0;
  for (int k = 0; k < d; ++k) {
    const double r = std::abs(lam(k));
    udev = std::max(udev, std::abs(r - 1.0));
    efrac[static_cast<size_t>(k)] =
        r > 0.0 ? UnitPoint(lam(k) / r).arg_frac() : 0.0;
  }
  stage("unimodular_spectrum", udev <= 1e-6, udev, "", true);
  if (!alive) return finish();

  std::sort(eperm.begin(), eperm.end(), [&](int a, int b) {
    return efrac[static_cast<size_t>(a)] < efrac[static_cast<size_t>(b)];
  });
  Eigen::VectorXcd lam_sorted(d);
  Eigen::MatrixXcd w_sorted(d, d);
  std::vector<Atom> mu_atoms;
  for (int k = 0; k < d; ++k) {
    const int j = eperm[static_cast<size_t>(k)];
    lam_sorted(k) = lam(j);
    w_sorted.col(k) = w.col(j);
    mu_atoms.push_back(
        {UnitPoint::from_arg_frac(efrac[static_cast<size_t>(j)]), 1.0});
  }

  double min_chord = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      min_chord = std::min(min_chord, std::abs(mu_atoms[static_cast<size_t>(i)]
                                                   .point.value() -
                                               mu_atoms[static_cast<size_t>(j)]
                                                   .point.value()));
  if (d == 1) min_chord = 2.0;
  stage("spectrum_separation", min_chord >= 2e-10, min_chord, "", true);
  if (!alive) return finish();

  const double wcond = condition_of(w_sorted);
  stage("eigenvector_condition", wcond <= 1e10, wcond, "", true);
  if (!alive) return finish();

  const Eigen::VectorXcd wphi = w_sorted.adjoint() * phi_t;
  const double cyc = wphi.cwiseAbs().minCoeff();
  stage("adjoint_cyclicity", cyc > 1e-10 * phi_t.norm(), cyc, "", true);
  if (!alive) return finish();

  const AtomicMeasure mu_star(mu_atoms, "adjoint spectrum");
  std::string norm_err;
  try {
    rep.normalized =
        normalize_intertwining(nu_star, psi_t, phi_t, mu_star, w_sorted);
  } catch (const Error& e) {
    norm_err = e.what();
  }
  if (!rep.normalized) {
    stage("normalization_chibar", false, 0.0, norm_err, true);
    return finish();
  }
  const NormalizedPair& np = *rep.normalized;
  const double t1norm = operator_norm(np.t1);
  const double xnorm = operator_norm(np.x);
  stage("normalization_chibar", np.chibar_residual <= 1e-8 * (1.0 + xnorm),
        np.chibar_residual, "", true);
  stage("normalization_form", np.form_residual <= 1e-8 * (1.0 + t1norm),
        np.form_residual, "", true);
  const double itol = 1e-8 * (1.0 + t1norm) + 2.0 * udev * xnorm;
  stage("normalization_intertwining", np.intertwining_residual <= itol,
        np.intertwining_residual, "", true);
  if (!alive) return finish();

  double mt_val = -1.0, mc_val = 0.0;
  std::optional<RecoveredMultiplier> rec;
  Eigen::MatrixXcd rop_mat;
  std::string err;
  try {
    const FiniteBlaschke theta_m = FiniteBlaschke::from_clark_measure(np.mu1);
    const FiniteBlaschke omega_m = FiniteBlaschke::from_clark_measure(np.nu1);
    const SpacePtr dom_m = make_space(theta_m, np.mu1, opts.quad);
    const SpacePtr cod_m = make_space(omega_m, np.nu1, opts.quad);
    const Eigen::VectorXcd uvals =
        np.phi1 + Eigen::VectorXcd::Ones(np.phi1.size());
    const ModelVector um = model_vector_from_values(cod_m, uvals);
    const OperatorMatrix rop = rank_one_perturbation(cod_m, um);
    mt_val = operator_norm(rop.mat - np.t1);
    mc_val = (np.x.adjoint() * chibar_theta(cod_m).coords -
              chibar_theta(dom_m).coords)
                 .norm();
    rop_mat = rop.mat;
    const OperatorMatrix zop{np.x, dom_m, cod_m};
    rec = multiplier_from_intertwiner(zop, rop, UnitPoint(), opts.quad);
  } catch (const Error& e) {
    err = e.what();
  }
  if (mt_val < 0.0) {
    stage("model_transfer", false, 0.0, err, true);
    return finish();
  }
  stage("model_transfer", mt_val <= 1e-7 * (1.0 + t1norm), mt_val, "", true);
  stage("model_chibar", mc_val <= 1e-7, mc_val, "", true);
  if (!alive) return finish();
  if (!rec) {
    stage("multiplier_realization", false, 0.0, err, true);
    return finish();
  }
  rep.recovered = *rec;
  stage("multiplier_realization", rec->defect <= 1e-6 * (1.0 + xnorm),
        rec->defect, "", true);
  if (!alive) return finish();

  const Certificate c5 = certify(rop_mat, opts.n_sweep, {"pow5"});
  stage("inverse_power_bound", c5.all_pass, c5.sweep.m_minus,
        "pow5 on the transferred operator", false);
  const double rd =
      std::max(std::abs(c5.sweep.m_plus - rep.m1_plus) /
                   std::max(1.0, rep.m1_plus),
               std::abs(c5.sweep.m_minus - rep.m1_minus) /
                   std::max(1.0, rep.m1_minus));
  stage("adjoint_norm_transfer", rd <= 1e-6, rd, "", false);

  return finish();
}

PipelineReport similarity_pipeline(const Instance& inst,
                                   const PipelineOptions& opts) {
  if (inst.params.kind == "triangular")
    return similarity_pipeline(inst.tri_diag, inst.tri_u, inst.tri_v, opts);
  const RankOneData rod = rank_one_data(inst.cod, inst.u);
  return similarity_pipeline(rod.diag, rod.u, rod.v, opts);
}

}  // namespace clarklab
