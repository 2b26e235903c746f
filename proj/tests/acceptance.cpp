// Acceptance gate: twelve end-to-end criteria, one line of output each.
// Every tolerance is pinned here, next to the check it guards.  The last
// criterion shells out to the command line tool, so the binary needs
// CLARKLAB_CLI_PATH and CLARKLAB_MANIFEST_PATH baked in at compile time.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "clarklab/verify.hpp"

namespace {

using namespace clarklab;

double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

AtomicMeasure draw_probability_measure(std::mt19937_64& rng, int degree) {
  const double gap = 0.05 / degree;
  for (int tries = 0; tries < 100; ++tries) {
    std::vector<double> args(static_cast<size_t>(degree));
    for (double& a : args) a = u01(rng);
    std::vector<double> sorted = args;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (int i = 0; i < degree && ok; ++i) {
      double next = sorted[static_cast<size_t>((i + 1) % degree)];
      double d = std::abs(next - sorted[static_cast<size_t>(i)]);
      d = std::min(d, 1.0 - d);
      ok = d >= gap || degree == 1;
    }
    if (!ok) continue;
    std::vector<Atom> atoms;
    double esum = 0.0;
    std::vector<double> e(static_cast<size_t>(degree));
    for (double& x : e) {
      x = 0.05 + u01(rng);
      esum += x;
    }
    for (int i = 0; i < degree; ++i)
      atoms.push_back({UnitPoint::from_arg_frac(args[static_cast<size_t>(i)]),
                       e[static_cast<size_t>(i)] / esum});
    return AtomicMeasure(atoms);
  }
  throw Error("measure draw exhausted");
}

SpacePtr draw_space(std::mt19937_64& rng, int degree) {
  return make_space(
      FiniteBlaschke::from_clark_measure(draw_probability_measure(rng, degree)));
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

// ---------------------------------------------------------------- criterion 1
bool clark_correspondence(std::string& detail) {
  std::mt19937_64 rng(1001);
  double worst_atom = 0.0, worst_mass = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int degree = 3 + trial;  // 3 .. 12
    const AtomicMeasure mu = draw_probability_measure(rng, degree);
    const FiniteBlaschke theta = FiniteBlaschke::from_clark_measure(mu);
    const AtomicMeasure back = clark_measure(theta, UnitPoint());
    if (back.size() != mu.size()) {
      detail = "atom count changed";
      return false;
    }
    for (size_t k = 0; k < mu.size(); ++k) {
      worst_atom = std::max(worst_atom,
                            chord(back.atom(k).point, mu.atom(k).point));
      worst_atom = std::max(worst_atom,
                            std::abs(back.atom(k).weight - mu.atom(k).weight));
    }
    for (int j = 0; j < 3; ++j) {
      const AtomicMeasure sc =
          clark_measure(theta, UnitPoint::from_arg_frac(u01(rng)));
      worst_mass = std::max(worst_mass, std::abs(sc.total_mass() - 1.0));
    }
  }
  detail = "round trip " + fmt(worst_atom) + ", mass " + fmt(worst_mass);
  return worst_atom < 1e-8 && worst_mass < 1e-10;
}

// ---------------------------------------------------------------- criterion 2
bool model_space_axioms(std::string& detail) {
  std::mt19937_64 rng(1002);
  double worst_gram = 0.0, worst_repro = 0.0, worst_jmap = 0.0,
         worst_conj = 0.0;
  std::vector<SpacePtr> spaces;
  spaces.push_back(make_space(
      FiniteBlaschke(std::vector<cplx>(3, cplx(0, 0)), UnitPoint())));
  spaces.push_back(draw_space(rng, 4));
  spaces.push_back(draw_space(rng, 5));
  for (SpacePtr sp : spaces) {
    const int n = sp->dim();
    const Eigen::MatrixXcd gram = quadrature_gram(*sp);
    worst_gram = std::max(
        worst_gram,
        (gram - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());

    ModelVector f{sp, Eigen::VectorXcd(n)};
    for (int k = 0; k < n; ++k) f.coords(k) = cplx(u01(rng) - 0.5, u01(rng) - 0.5);
    for (int j = 0; j < 3; ++j) {
      const cplx lam = std::polar(0.8 * u01(rng), kTau * u01(rng));
      const KernelPair kp = kernel(sp, lam);
      const double scale = 1.0 + f.norm() * kp.k.norm();
      worst_repro = std::max(
          worst_repro,
          std::abs(inner(f, kp.k) - evaluate_in_disk(f, lam)) / scale);
      // the conjugation exchanges the kernel pair
      const ModelVector ck = conjugation(kp.k);
      worst_conj = std::max(
          worst_conj,
          (ck.coords - kp.k_star.coords).cwiseAbs().maxCoeff() / scale);
    }
    for (int j = 0; j < 2; ++j) {
      const UnitPoint c = UnitPoint::from_arg_frac(0.05 + 0.9 * u01(rng));
      const JMap jm = j_map(sp, c);
      worst_jmap = std::max(worst_jmap, jm.unitarity_residual);
      // J carries the perturbed unitary to multiplication by z
      Eigen::MatrixXcd dz = Eigen::MatrixXcd::Zero(n, n);
      for (size_t k = 0; k < jm.sigma_c.size(); ++k)
        dz(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) =
            jm.sigma_c.atom(k).point.value();
      const Eigen::MatrixXcd uc = clark_unitary(sp, c).mat;
      worst_jmap = std::max(
          worst_jmap,
          (jm.forward * uc - dz * jm.forward).cwiseAbs().maxCoeff());
    }
    Eigen::VectorXcd gamma(n);
    for (int k = 0; k < n; ++k) gamma(k) = cplx(u01(rng) - 0.5, u01(rng) - 0.5);
    const ConjugationIdentities ci = conjugation_identities(sp, gamma);
    worst_conj = std::max({worst_conj, ci.residual_conj, ci.residual_shift});
  }
  detail = "gram " + fmt(worst_gram) + ", kernel " + fmt(worst_repro) +
           ", j " + fmt(worst_jmap) + ", conj " + fmt(worst_conj);
  return worst_gram < 1e-10 && worst_repro < 1e-10 && worst_jmap < 1e-10 &&
         worst_conj < 1e-8;
}

// ---------------------------------------------------------------- criterion 3
bool unitary_classification(std::string& detail) {
  std::mt19937_64 rng(1003);
  SpacePtr spaces[2] = {
      make_space(FiniteBlaschke(std::vector<cplx>(4, cplx(0, 0)), UnitPoint())),
      draw_space(rng, 3)};
  double worst_defect = 0.0, best_rough = 1e300;
  for (int j = 0; j < 10; ++j) {
    SpacePtr sp = spaces[j % 2];
    const cplx c = std::polar(1.0, kTau * u01(rng));
    const ModelVector u = model_vector_from_values(
        sp, Eigen::VectorXcd::Constant(sp->dim(), c));
    const IsometryClass cl = isometry_classification(sp, u);
    if (!cl.unitary || !cl.in_clark_family ||
        std::abs(cl.clark_parameter - c) > 1e-8) {
      detail = "clark family member misclassified";
      return false;
    }
    worst_defect = std::max(worst_defect, cl.defect);
  }
  for (int j = 0; j < 20; ++j) {
    SpacePtr sp = spaces[j % 2];
    const int n = sp->dim();
    Eigen::VectorXcd vals(n);
    double spread = 0.0;
    do {
      for (int k = 0; k < n; ++k)
        vals(k) = std::polar(0.3 + 1.2 * u01(rng), kTau * u01(rng));
      spread = 0.0;
      for (int k = 1; k < n; ++k)
        spread = std::max(spread, std::abs(vals(k) - vals(0)));
    } while (spread < 0.3);
    const IsometryClass cl =
        isometry_classification(sp, model_vector_from_values(sp, vals));
    if (cl.unitary || cl.in_clark_family) {
      detail = "nonconstant u flagged as clark unitary";
      return false;
    }
    best_rough = std::min(best_rough, cl.defect);
  }
  detail = "unitary defect " + fmt(worst_defect) + ", nonunitary margin " +
           fmt(best_rough);
  return worst_defect < 1e-10 && best_rough > 1e-6;
}

// ---------------------------------------------------------------- criterion 4
bool resolvent_agreement(std::string& detail) {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 8;
    SpacePtr sp = draw_space(rng, n);
    Eigen::VectorXcd vals(n), b(n);
    for (int k = 0; k < n; ++k) {
      vals(k) = std::polar(0.4 + u01(rng), kTau * u01(rng));
      b(k) = cplx(u01(rng) - 0.5, u01(rng) - 0.5);
    }
    const RankOneData rd = rank_one_data(sp, model_vector_from_values(sp, vals));
    const Eigen::MatrixXcd dense = rd.dense();
    const double radius = trial % 2 == 0 ? 0.5 : 1.7;
    const cplx lambda = std::polar(radius, kTau * u01(rng));
    const Eigen::VectorXcd fast = rank_one_resolvent(rd, lambda, b);
    const Eigen::VectorXcd exact =
        (dense - lambda * Eigen::MatrixXcd::Identity(n, n))
            .fullPivLu()
            .solve(b);
    worst = std::max(worst, (fast - exact).norm() / exact.norm());
  }
  detail = "max relative deviation " + fmt(worst);
  return worst < 1e-9;
}

// ---------------------------------------------------------------- criterion 5
bool kernel_quotient_round_trips(std::string& detail) {
  double worst_int = 0.0, worst_g = 0.0;
  auto probe = [&](const Instance& inst) {
    worst_int = std::max(worst_int, inst.intertwining_residual);
    const RecoveredMultiplier rec =
        multiplier_from_intertwiner(inst.x, inst.t, inst.intertwined_c);
    worst_g = std::max(
        worst_g,
        (rec.g_at_cod_clark - inst.g_at_cod_clark).cwiseAbs().maxCoeff());
    worst_g = std::max(worst_g, std::abs(rec.beta - inst.beta));
  };
  for (int deg = 2; deg <= 4; ++deg)
    for (cplx lam : {cplx(0.3, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.5)})
      probe(example_crofoot(
          FiniteBlaschke(std::vector<cplx>(deg, cplx(0, 0)), UnitPoint()), lam,
          UnitPoint::from_arg_frac(0.13)));
  for (int k = 0; k < 20; ++k)
    probe(random_instance(2 + k % 5, "crofoot", 5000 + k));
  detail = "intertwining " + fmt(worst_int) + ", symbol recovery " +
           fmt(worst_g);
  return worst_int < 1e-8 && worst_g < 1e-7;
}

// ---------------------------------------------------------------- criterion 6
bool certified_nonunitary(std::string& detail) {
  const Instance inst = example_crofoot(
      FiniteBlaschke(std::vector<cplx>(3, cplx(0, 0)), UnitPoint()),
      cplx(0.5, 0.0), UnitPoint());
  const Certificate cert = certify(inst.t.mat, 2000, {"pow5"});
  detail = "condition " + fmt(inst.x_condition) + ", defect " +
           fmt(inst.t_class.defect) + ", inverse bound " +
           fmt(cert.checks.front().lhs) + " <= " +
           fmt(cert.checks.front().bound);
  return inst.x_condition < 1e8 && inst.t_class.defect > 1e-6 &&
         !inst.t_class.unitary && cert.all_pass;
}

// ---------------------------------------------------------------- criterion 7
bool weighted_perturbations(std::string& detail) {
  double worst_res = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Instance inst = random_instance(2 + k % 5, "clark_weight", 7000 + k);
    worst_res = std::max({worst_res, inst.identity_residual,
                          inst.membership_residual,
                          inst.intertwining_residual,
                          inst.hypothesis_residual});
    if (inst.t_class.unitary == inst.nonunitary_expected) {
      detail = "classification does not match the weight spread";
      return false;
    }
  }
  detail = "max construction residual " + fmt(worst_res);
  return worst_res < 1e-8;
}

// ---------------------------------------------------------------- criterion 8
bool compression_structure(std::string& detail) {
  std::mt19937_64 rng(1008);
  // kernel dimension against the common-inner-divisor count; dom at least as
  // large as cod so the range closure can reach full rank
  for (int trial = 0; trial < 30; ++trial) {
    const int cod_deg = 2 + trial % 3;
    SpacePtr dom = draw_space(rng, cod_deg + trial % 2);
    SpacePtr cod = draw_space(rng, cod_deg);
    FactoredSymbol g;
    g.outer = [](cplx) { return cplx(1, 0); };
    const std::vector<cplx>& wz = cod->theta().zeros();
    const int picks = trial % 3;
    std::vector<size_t> idx(wz.size());
    std::iota(idx.begin(), idx.end(), size_t{0});
    for (int p = 0; p < picks; ++p) {
      if (u01(rng) < 0.5 && !idx.empty()) {
        const size_t at = static_cast<size_t>(u01(rng) * idx.size());
        g.inner_zeros.push_back(wz[idx[std::min(at, idx.size() - 1)]]);
        idx.erase(idx.begin() + static_cast<long>(std::min(at, idx.size() - 1)));
      } else {
        g.inner_zeros.push_back(std::polar(0.2 + 0.3 * u01(rng),
                                           kTau * u01(rng)));
      }
    }
    const AttStructure st = att_structure(dom, cod, g);
    if (st.kernel_dim != st.kernel_dim_predicted || !st.closure_rank_match ||
        st.kernel_residual > 1e-7) {
      detail = "kernel dimension " + std::to_string(st.kernel_dim) +
               " vs predicted " + std::to_string(st.kernel_dim_predicted) +
               ", residual " + fmt(st.kernel_residual);
      return false;
    }
  }
  // analytic symbols with analytic reciprocal invert exactly
  double worst_inv = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    SpacePtr sp = draw_space(rng, 2 + trial % 3);
    const cplx a = std::polar(0.1 + 0.4 * u01(rng), kTau * u01(rng));
    const OperatorMatrix x =
        att_operator(sp, sp, [a](cplx z) { return 1.0 + a * z; });
    const AttInverse inv =
        att_inverse(x, [a](cplx z) { return 1.0 / (1.0 + a * z); });
    worst_inv = std::max({worst_inv, inv.left_residual, inv.right_residual});
  }
  // a sup distance below one forces an invertible cross gram
  int premises = 0;
  for (int trial = 0; trial < 10; ++trial) {
    SpacePtr a = draw_space(rng, 2 + trial % 3);
    std::vector<cplx> moved = a->theta().zeros();
    for (cplx& z : moved) {
      if (std::abs(z) <= 1e-12) continue;
      z += std::polar(0.01, kTau * u01(rng));
      if (std::abs(z) > 0.97) z *= 0.97 / std::abs(z);
    }
    SpacePtr b = make_space(
        FiniteBlaschke(moved, a->theta().front_constant()));
    const DirectSumCheck ds = direct_sum_check(a, b);
    if (ds.distance_criterion) {
      ++premises;
      if (!ds.invertible) {
        detail = "distance criterion met but compression singular";
        return false;
      }
    }
  }
  detail = "inverse residual " + fmt(worst_inv) + ", " +
           std::to_string(premises) + "/10 distance premises";
  return worst_inv < 1e-8 && premises >= 5;
}

// ---------------------------------------------------------------- criterion 9
bool return_identities(std::string& detail) {
  std::mt19937_64 rng(1009);
  double worst_excess = -1e300;
  const std::vector<std::vector<double>> configs{
      {0.25}, {0.125, 0.625}, {1.0 / 12.0, 5.0 / 12.0, 7.0 / 12.0}};
  const std::vector<long> caps{40, 80, 120};
  for (size_t ci = 0; ci < configs.size(); ++ci) {
    std::vector<Atom> atoms;
    double esum = 0.0;
    std::vector<double> e(configs[ci].size());
    for (double& x : e) {
      x = 0.2 + u01(rng);
      esum += x;
    }
    for (size_t k = 0; k < configs[ci].size(); ++k)
      atoms.push_back({UnitPoint::from_arg_frac(configs[ci][k]), e[k] / esum});
    SpacePtr sp = make_space(
        FiniteBlaschke::from_clark_measure(AtomicMeasure(atoms)));
    const int n = sp->dim();
    const Eigen::VectorXcd targets = Eigen::VectorXcd::Ones(n);
    std::vector<UnitPoint> tpts(static_cast<size_t>(n));
    const std::vector<long> times =
        find_return_times(sp->clark_data(), tpts, 1e-3, caps[ci]);
    const BoundaryFn g = [](cplx z) { return 1.0 + 0.5 * z; };
    for (BoundaryFn p : {BoundaryFn([](cplx) { return cplx(1, 0); }),
                         BoundaryFn([](cplx z) { return z; }),
                         BoundaryFn([](cplx z) { return 1.0 + z; })}) {
      const LimitIdentities li =
          return_time_norm_identities(sp, g, p, targets, times);
      worst_excess = std::max(worst_excess, li.max_excess);
      if (!li.pass) {
        detail = "identity misses its tolerance by " + fmt(li.max_excess);
        return false;
      }
    }
  }
  detail = "max excess over tolerance " + fmt(worst_excess);
  return true;
}

// --------------------------------------------------------------- criterion 10
bool asymptote_bounds(std::string& detail) {
  double worst_unit = 0.0, worst_y = -1e300, worst_drift = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Instance inst =
        k % 2 == 0 ? random_instance(2 + k % 4, "crofoot", 9000 + k)
                   : random_instance(2 + k % 4, "clark_weight", 9000 + k);
    const PowerSweep ps = power_sweep(inst.t.mat, 2000);
    const CesaroAsymptote ca = cesaro_asymptote(inst.t.mat);
    worst_unit = std::max(worst_unit, ca.unitarity_residual);
    worst_y = std::max({worst_y, ca.y_norm - (ps.m_plus + 1e-6),
                        ca.y_inv_norm - (ps.m_plus * ps.m_plus + 1e-6)});

    const Eigen::VectorXcd targets = Eigen::VectorXcd::Ones(inst.t.mat.rows());
    const double m_bound = ps.kappa_available
                               ? std::min(ps.m_plus, ps.kappa)
                               : ps.m_plus;
    const ReturnLimit rl =
        weak_limit_along_returns(inst.t.mat, targets, 400000, 0.35, m_bound);
    if (!rl.converged || !rl.inverse_pass) {
      detail = "weak limit failed to converge (drift " + fmt(rl.final_drift) +
               ", ratio " + fmt(rl.inverse_ratio) + " vs " +
               fmt(rl.inverse_bound) + ")";
      return false;
    }
    worst_drift = std::max(worst_drift, rl.final_drift - rl.tol);
  }
  detail = "unitarity " + fmt(worst_unit) + ", y bound slack " + fmt(-worst_y) +
           ", drift slack " + fmt(-worst_drift);
  return worst_unit < 1e-6 && worst_y <= 0.0;
}

// --------------------------------------------------------------- criterion 11
bool triangular_chain(std::string& detail) {
  std::mt19937_64 rng(1011);
  // the two-block inverse inequality on random block triangular operators
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 5;
    const int split = 1 + trial % (n - 1 > 0 ? n - 1 : 1);
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      t(i, i) = std::polar(1.0, kTau * u01(rng));
      for (int j = i + 1; j < n; ++j)
        t(i, j) = 0.5 * cplx(u01(rng) - 0.5, u01(rng) - 0.5);
    }
    t.block(split, 0, n - split, split).setZero();
    for (const BlockBound& b : block_inverse_bound(t, split, 50))
      if (!b.pass) {
        detail = "block bound fails at n = " + std::to_string(b.n);
        return false;
      }
  }
  // full reduction pipeline on framed instances
  double worst_q = -1e300;
  for (int k = 0; k < 10; ++k) {
    const int dim = 3 + k % 6;
    const Instance inst = random_instance(dim, "triangular", 11000 + k);
    const PipelineReport rep = similarity_pipeline(inst);
    if (!rep.all_pass || !rep.certificate.all_pass) {
      std::string stage = "?";
      for (const PipelineStage& s : rep.stages)
        if (!s.pass) {
          stage = s.name;
          break;
        }
      detail = "pipeline stage " + stage + " fails on seed " +
               std::to_string(11000 + k);
      return false;
    }
    worst_q = std::max(worst_q, rep.qqq_lhs - rep.qqq_rhs * (1.0 + 1e-9));
  }
  detail = "all block bounds hold, chain slack " + fmt(-worst_q);
  return worst_q <= 0.0;
}

// --------------------------------------------------------------- criterion 12
bool deterministic_reports(std::string& detail) {
  namespace fs = std::filesystem;
  const std::string cli = CLARKLAB_CLI_PATH;
  const std::string manifest = CLARKLAB_MANIFEST_PATH;
  const std::string out1 = (fs::temp_directory_path() / "clarklab_rep1.json").string();
  const std::string out2 = (fs::temp_directory_path() / "clarklab_rep2.json").string();
  auto run = [&](const std::string& out) {
    const std::string cmd = "\"" + cli + "\" verify --manifest \"" + manifest +
                            "\" --out \"" + out + "\" > /dev/null";
    return std::system(cmd.c_str());
  };
  const int rc1 = run(out1);
  const int rc2 = run(out2);
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  const std::string r1 = slurp(out1), r2 = slurp(out2);
  std::remove(out1.c_str());
  std::remove(out2.c_str());
  if (rc1 != 0 || rc2 != 0) {
    detail = "cli exit codes " + std::to_string(rc1) + ", " +
             std::to_string(rc2);
    return false;
  }
  if (r1.empty() || r1 != r2) {
    detail = "reports differ (" + std::to_string(r1.size()) + " vs " +
             std::to_string(r2.size()) + " bytes)";
    return false;
  }
  detail = std::to_string(r1.size()) + " byte report, byte identical";
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    bool (*run)(std::string&);
  };
  const Criterion criteria[] = {
      {"clark correspondence round trip", clark_correspondence},
      {"model space axioms", model_space_axioms},
      {"unitary classification", unitary_classification},
      {"rank one resolvent agreement", resolvent_agreement},
      {"kernel quotient round trips", kernel_quotient_round_trips},
      {"certified nonunitary perturbation", certified_nonunitary},
      {"weighted perturbation family", weighted_perturbations},
      {"compression kernel and inverse structure", compression_structure},
      {"return time norm identities", return_identities},
      {"cesaro asymptote and weak limits", asymptote_bounds},
      {"triangular reduction and norm chain", triangular_chain},
      {"deterministic verification reports", deterministic_reports},
  };
  int failures = 0;
  int num = 0;
  for (const Criterion& c : criteria) {
    ++num;
    std::string detail;
    bool pass = false;
    try {
      pass = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << num << ": "
              << c.label << (detail.empty() ? "" : " (" + detail + ")")
              << std::endl;
    if (!pass) ++failures;
  }
  if (failures > 0)
    std::cout << failures << " of 12 criteria failing" << std::endl;
  else
    std::cout << "all 12 criteria pass" << std::endl;
  return failures == 0 ? 0 : 1;
}
