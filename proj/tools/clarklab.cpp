// Command line front end: measures, inverse Clark correspondence, worked
// examples, manifest verification, power sweeps.  All angles are entered and
// printed as fractions of a full turn.  Exit codes: 0 success, 1 a check
// failed, 2 malformed input or a domain error.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "clarklab/verify.hpp"

namespace {

using namespace clarklab;

void emit(const Json& doc, const std::string& out_path) {
  const std::string text = dump_canonical(doc);
  if (out_path.empty())
    std::cout << text;
  else
    write_text_file(out_path, text);
}

Eigen::VectorXcd vector_from_file(const std::string& path) {
  const Json j = load_json_file(path);
  if (!j.is_array()) throw Error("malformed JSON: expected an array of values");
  Eigen::VectorXcd v(j.size());
  for (size_t k = 0; k < j.size(); ++k)
    v(static_cast<Eigen::Index>(k)) =
        j[k].is_number() ? cplx(j[k].get<double>(), 0.0) : cplx_from_json(j[k]);
  return v;
}

InstanceParams params_from_file(const std::string& path) {
  const Json j = load_json_file(path);
  if (j.is_object() && j.contains("schema") &&
      j["schema"] == "clarklab.instance.v1")
    return params_from_json(j.at("params"));
  return params_from_json(j);
}

int report_and_exit_code(const ManifestReport& mr, const SuiteOptions& opts,
                         const std::string& out_path) {
  const Json doc = manifest_report_to_json(mr, opts);
  if (out_path.empty()) {
    std::cout << dump_canonical(doc);
  } else {
    write_text_file(out_path, dump_canonical(doc));
    for (const SuiteReport& r : mr.reports)
      std::cout << (r.all_pass ? "[ ok ] " : "[FAIL] ") << r.source << " ("
                << r.checks.size() << " checks)\n";
    std::cout << "checks: " << mr.checks_run << " run, " << mr.checks_failed
              << " failed\n";
  }
  if (mr.all_pass) return 0;
  for (const SuiteReport& r : mr.reports)
    for (const CheckRecord& c : r.checks)
      if (!c.pass) {
        std::cerr << "first failure: " << r.source << ": " << c.name
                  << " (value " << c.value << ", tolerance " << c.tolerance
                  << (c.detail.empty() ? "" : ", " + c.detail) << ")\n";
        return 1;
      }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clark measures, model spaces, and rank one perturbations"};
  app.require_subcommand(1);

  std::string theta_path, mu_path, phi_path, op_path, out_path;
  std::string instance_path, manifest_path;
  double c_arg = 0.0;
  double lambda_re = 0.0, lambda_im = 0.0;
  int quad = 0, n_sweep = 2000, degree = 2, jobs = 1, n_powers = 64;
  std::uint64_t seed = 1234;
  std::string suite = "all", kind = "crofoot", csv_path;

  CLI::App* clark = app.add_subcommand(
      "clark", "Clark measure of a Blaschke product at a base point");
  clark->add_option("--theta", theta_path, "Blaschke JSON document")
      ->required();
  clark->add_option("--c", c_arg, "base point argument (fraction of a turn)");
  clark->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* fromm = app.add_subcommand(
      "from-measure", "Blaschke product with the given Clark measure at 1");
  fromm->add_option("--mu", mu_path, "measure JSON document")->required();
  fromm->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* example =
      app.add_subcommand("example", "build a worked example instance");
  example->require_subcommand(1);
  CLI::App* crofoot = example->add_subcommand(
      "crofoot", "perturbation carrying a reproducing kernel quotient");
  crofoot->add_option("--theta", theta_path, "Blaschke JSON document")
      ->required();
  crofoot->add_option("--lambda-re", lambda_re, "kernel point, real part")
      ->required();
  crofoot->add_option("--lambda-im", lambda_im, "kernel point, imaginary part");
  crofoot->add_option("--c", c_arg, "perturbation parameter (fraction)");
  crofoot->add_option("--quad", quad, "quadrature nodes (0 = default)");
  crofoot->add_option("--out", out_path, "output path (default stdout)");
  CLI::App* cweight = example->add_subcommand(
      "clark-weight", "perturbation from a weight on the Clark atoms");
  cweight->add_option("--theta", theta_path, "Blaschke JSON document")
      ->required();
  cweight->add_option("--c", c_arg, "perturbation parameter (fraction)")
      ->required();
  cweight->add_option("--phi", phi_path,
                      "JSON array of weight values (default all ones)");
  cweight->add_option("--quad", quad, "quadrature nodes (0 = default)");
  cweight->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* verify =
      app.add_subcommand("verify", "run check suites over instances");
  CLI::Option* vi =
      verify->add_option("--instance", instance_path, "instance JSON document");
  CLI::Option* vm =
      verify->add_option("--manifest", manifest_path, "manifest JSON document");
  vi->excludes(vm);
  verify->add_option("--suite", suite, "core | inequalities | all")
      ->check(CLI::IsMember({"core", "inequalities", "all"}));
  verify->add_option("--n-sweep", n_sweep, "power sweep length");
  verify->add_option("--quad", quad, "quadrature nodes (0 = default)");
  verify->add_option("--seed", seed, "seed recorded in the report");
  verify->add_option("--jobs", jobs, "worker threads for manifests");
  verify->add_option("--out", out_path, "write the report here");

  CLI::App* sweep =
      app.add_subcommand("sweep", "norms of powers of a dense operator");
  sweep->add_option("--operator", op_path, "operator JSON document")
      ->required();
  sweep->add_option("--n", n_powers, "largest power");
  sweep->add_option("--out", out_path, "output path (default stdout)");
  sweep->add_option("--csv", csv_path, "also write n,forward,backward rows");

  CLI::App* random =
      app.add_subcommand("random", "draw a reproducible random instance");
  random->add_option("--degree", degree, "model space dimension")->required();
  random->add_option("--kind", kind, "crofoot | clark_weight | triangular")
      ->check(CLI::IsMember({"crofoot", "clark_weight", "triangular"}));
  random->add_option("--seed", seed, "draw seed")->required();
  random->add_option("--out", out_path, "output path (default stdout)");

  try {
    app.parse(argc, argv);

    if (clark->parsed()) {
      const FiniteBlaschke theta = blaschke_from_json(load_json_file(theta_path));
      emit(measure_to_json(
               clark_measure(theta, UnitPoint::from_arg_frac(c_arg))),
           out_path);
      return 0;
    }
    if (fromm->parsed()) {
      const AtomicMeasure mu = measure_from_json(load_json_file(mu_path));
      emit(blaschke_to_json(FiniteBlaschke::from_clark_measure(mu)), out_path);
      return 0;
    }
    if (example->parsed()) {
      InstanceParams p;
      const FiniteBlaschke theta = blaschke_from_json(load_json_file(theta_path));
      p.theta_zeros = theta.zeros();
      p.theta_front_arg = theta.front_constant().arg_frac();
      p.c_arg = c_arg;
      if (crofoot->parsed()) {
        p.kind = "crofoot";
        p.lambda = cplx(lambda_re, lambda_im);
      } else {
        p.kind = "clark_weight";
        if (!phi_path.empty()) p.phi = vector_from_file(phi_path);
      }
      emit(instance_to_json(build_instance(p, quad)), out_path);
      return 0;
    }
    if (verify->parsed()) {
      SuiteOptions opts;
      opts.suite = suite;
      opts.n_sweep = n_sweep;
      opts.quad = quad;
      opts.seed = seed;
      ManifestReport mr;
      if (!instance_path.empty()) {
        const Instance inst = build_instance(params_from_file(instance_path),
                                             quad);
        mr.reports.push_back(run_suite(inst, opts));
        mr.all_pass = mr.reports.back().all_pass;
        mr.checks_run = static_cast<int>(mr.reports.back().checks.size());
        for (const CheckRecord& c : mr.reports.back().checks)
          if (!c.pass) ++mr.checks_failed;
      } else if (!manifest_path.empty()) {
        mr = run_manifest(load_json_file(manifest_path), opts, jobs);
      } else {
        throw Error("verify needs --instance or --manifest");
      }
      return report_and_exit_code(mr, opts, out_path);
    }
    if (sweep->parsed()) {
      const Eigen::MatrixXcd t = operator_from_json(load_json_file(op_path));
      const PowerSweep ps = power_sweep(t, n_powers);
      if (!csv_path.empty()) write_text_file(csv_path, sweep_to_csv(ps));
      emit(sweep_to_json(ps), out_path);
      return 0;
    }
    if (random->parsed()) {
      emit(instance_to_json(random_instance(degree, kind, seed)), out_path);
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
