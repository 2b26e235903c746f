#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "clarklab/io.hpp"
#include "clarklab/scenarios.hpp"

namespace clarklab {

struct CheckRecord {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct SuiteOptions {
  std::string suite = "all";  // core | inequalities | all
  int n_sweep = 2000;
  int quad = 0;  // 0 picks the per-space default
  std::uint64_t seed = 1234;
};

struct SuiteReport {
  std::string source;
  std::vector<CheckRecord> checks;
  bool all_pass = true;
};

// core: the construction identities stored on the instance plus a fresh
// multiplier round trip.  inequalities: power sweeps, the fifth-power inverse
// certificate, the Cesaro asymptote bounds, and the full reduction pipeline
// recorded stage by stage.
SuiteReport run_suite(const Instance& inst, const SuiteOptions& opts);

struct ManifestReport {
  std::vector<SuiteReport> reports;
  bool all_pass = true;
  int checks_run = 0;
  int checks_failed = 0;
};

// Manifest entries carry a name and either stored params or a random spec
// (degree, kind, seed).  jobs > 1 distributes instances over threads; the
// merged report keeps manifest order, so serial and parallel runs agree.
ManifestReport run_manifest(const Json& manifest, const SuiteOptions& opts,
                            int jobs = 1);

Json suite_report_to_json(const SuiteReport& r);
Json manifest_report_to_json(const ManifestReport& r,
                             const SuiteOptions& opts);

}  // namespace clarklab
