#include "clarklab/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace clarklab {

namespace {

void add(SuiteReport& rep, const std::string& name, bool pass, double value,
         double tol, std::string detail = "") {
  rep.checks.push_back({name, pass, value, tol, std::move(detail)});
  rep.all_pass = rep.all_pass && pass;
}

void residual_check(SuiteReport& rep, const std::string& name, double value,
                    double tol) {
  add(rep, name, value <= tol, value, tol);
}

Eigen::MatrixXcd framed_matrix(const Instance& inst) {
  Eigen::MatrixXcd t = inst.tri_diag.asDiagonal();
  t.noalias() += inst.tri_u * inst.tri_v.adjoint();
  return t;
}

void core_checks(const Instance& inst, const SuiteOptions& opts,
                 SuiteReport& rep) {
  residual_check(rep, "membership", inst.membership_residual, 1e-8);
  residual_check(rep, "intertwining", inst.intertwining_residual, 1e-8);
  residual_check(rep, "adjoint_mapping", inst.hypothesis_residual, 1e-8);
  residual_check(rep, "boundary_identity", inst.identity_residual, 1e-8);
  residual_check(rep, "multiplier_recovery", inst.multiplier_defect, 1e-6);

  const RecoveredMultiplier rec =
      multiplier_from_intertwiner(inst.x, inst.t, inst.intertwined_c, opts.quad);
  double gdev = 0.0;
  for (Eigen::Index k = 0; k < inst.g_at_cod_clark.size(); ++k)
    gdev = std::max(gdev,
                    std::abs(rec.g_at_cod_clark(k) - inst.g_at_cod_clark(k)));
  residual_check(rep, "g_match", gdev, 1e-7);

  bool cls = true;
  std::string why;
  if (inst.nonunitary_asserted && inst.t_class.unitary) {
    cls = false;
    why = "expected nonunitary";
  }
  if (inst.params.kind == "clark_weight" &&
      inst.t_class.unitary == inst.nonunitary_expected) {
    cls = false;
    why = "unitarity must match |phi| constancy";
  }
  add(rep, "unitarity_classification", cls, inst.t_class.defect, 0.0, why);

  if (inst.params.kind == "triangular") {
    cplx det_ratio = 1.0;
    for (Eigen::Index k = 0; k < inst.tri_diag.size(); ++k)
      det_ratio += std::conj(inst.tri_v(k)) * inst.tri_u(k) / inst.tri_diag(k);
    add(rep, "frame_invertible", std::abs(det_ratio) >= 1e-12,
        std::abs(det_ratio), 1e-12);
  }
}

void inequality_checks(const Instance& inst, const SuiteOptions& opts,
                       SuiteReport& rep) {
  const Eigen::MatrixXcd tmat =
      inst.params.kind == "triangular" ? framed_matrix(inst) : inst.t.mat;

  const PowerSweep ps = power_sweep(tmat, opts.n_sweep);
  add(rep, "power_bounded", !ps.diverged, ps.m_plus, 0.0,
      "sup ||T^n|| over the sweep");

  const Certificate c5 = certify(tmat, opts.n_sweep, {"pow5"});
  double lhs5 = 0.0, bound5 = 0.0;
  std::string mode5;
  if (!c5.checks.empty()) {
    lhs5 = c5.checks.front().lhs;
    bound5 = c5.checks.front().bound;
    mode5 = c5.checks.front().swept_only ? "swept" : "certified";
  }
  add(rep, "pow5_certificate", c5.all_pass, lhs5, bound5, mode5);

  double ca_unit = -1.0, ca_y = 0.0, ca_yinv = 0.0;
  std::string ca_err;
  try {
    const CesaroAsymptote ca = cesaro_asymptote(tmat);
    ca_unit = ca.unitarity_residual;
    ca_y = ca.y_norm;
    ca_yinv = ca.y_inv_norm;
  } catch (const Error& e) {
    ca_err = e.what();
  }
  if (ca_unit < 0.0) {
    add(rep, "asymptote_unitary", false, 0.0, 1e-6, ca_err);
  } else {
    residual_check(rep, "asymptote_unitary", ca_unit, 1e-6);
    const bool yb = ca_y <= ps.m_plus + 1e-6 &&
                    ca_yinv <= ps.m_plus * ps.m_plus + 1e-6;
    std::ostringstream os;
    os << "||Y|| = " << ca_y << ", ||Y^-1|| = " << ca_yinv
       << ", sharper inverse bound " << std::min(ps.m_minus, ps.m_plus * ps.m_plus);
    add(rep, "asymptote_y_bounds", yb, std::max(ca_y, ca_yinv),
        ps.m_plus * ps.m_plus + 1e-6, os.str());
  }

  PipelineOptions popts;
  popts.n_sweep = opts.n_sweep;
  popts.quad = opts.quad;
  popts.throw_on_stage_failure = false;
  const PipelineReport pipe = similarity_pipeline(inst, popts);
  for (const PipelineStage& s : pipe.stages)
    add(rep, "pipeline." + s.name, s.pass, s.value, 0.0, s.detail);
}

}  // namespace

SuiteReport run_suite(const Instance& inst, const SuiteOptions& opts) {
  SuiteReport rep;
  rep.source = inst.provenance;
  if (opts.suite != "core" && opts.suite != "inequalities" &&
      opts.suite != "all")
    throw Error("unknown suite: " + opts.suite);
  if (opts.suite == "core" || opts.suite == "all")
    core_checks(inst, opts, rep);
  if (opts.suite == "inequalities" || opts.suite == "all")
    inequality_checks(inst, opts, rep);
  return rep;
}

namespace {

SuiteReport run_entry(const Json& entry, size_t index,
                      const SuiteOptions& opts) {
  std::string name = "entry-" + std::to_string(index);
  SuiteReport rep;
  try {
    if (entry.contains("name")) name = entry.at("name").get<std::string>();
    rep.source = name;
    Instance inst =
        entry.contains("params")
            ? build_instance(params_from_json(entry.at("params")), opts.quad)
            : random_instance(entry.at("degree").get<int>(),
                              entry.at("kind").get<std::string>(),
                              entry.at("seed").get<std::uint64_t>());
    rep = run_suite(inst, opts);
    rep.source = name;
  } catch (const Json::exception& e) {
    rep.checks.push_back(
        {"build", false, 0.0, 0.0, std::string("malformed JSON: ") + e.what()});
    rep.all_pass = false;
  } catch (const Error& e) {
    rep.checks.push_back({"build", false, 0.0, 0.0, e.what()});
    rep.all_pass = false;
  }
  return rep;
}

}  // namespace

ManifestReport run_manifest(const Json& manifest, const SuiteOptions& opts,
                            int jobs) {
  if (!manifest.is_object() || !manifest.contains("schema") ||
      manifest["schema"] != "clarklab.manifest.v1")
    throw Error("malformed JSON: expected schema clarklab.manifest.v1");
  if (!manifest.contains("entries") || !manifest["entries"].is_array())
    throw Error("malformed JSON: manifest needs an entries array");
  const Json& entries = manifest["entries"];

  ManifestReport out;
  out.reports.resize(entries.size());
  const int workers =
      std::max(1, std::min<int>(jobs, static_cast<int>(entries.size())));
  if (workers == 1) {
    for (size_t i = 0; i < entries.size(); ++i)
      out.reports[i] = run_entry(entries[i], i, opts);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&]() {
        for (size_t i = next.fetch_add(1); i < entries.size();
             i = next.fetch_add(1))
          out.reports[i] = run_entry(entries[i], i, opts);
      });
    for (std::thread& th : pool) th.join();
  }

  for (const SuiteReport& r : out.reports) {
    out.all_pass = out.all_pass && r.all_pass;
    out.checks_run += static_cast<int>(r.checks.size());
    for (const CheckRecord& c : r.checks)
      if (!c.pass) ++out.checks_failed;
  }
  return out;
}

Json suite_report_to_json(const SuiteReport& r) {
  Json checks = Json::array();
  for (const CheckRecord& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"pass", c.pass},
                          {"value", c.value},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
  return Json{{"source", r.source}, {"all_pass", r.all_pass},
              {"checks", checks}};
}

Json manifest_report_to_json(const ManifestReport& r,
                             const SuiteOptions& opts) {
  Json instances = Json::array();
  for (const SuiteReport& rep : r.reports)
    instances.push_back(suite_report_to_json(rep));
  return Json{{"schema", "clarklab.report.v1"},
              {"suite", opts.suite},
              {"n_sweep", opts.n_sweep},
              {"quad", opts.quad},
              {"seed", opts.seed},
              {"all_pass", r.all_pass},
              {"checks_run", r.checks_run},
              {"checks_failed", r.checks_failed},
              {"instances", instances}};
}

}  // namespace clarklab
