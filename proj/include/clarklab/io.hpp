#pragma once

#include <Eigen/Dense>
#include <string>

#include "clarklab/asymptotics.hpp"
#include "clarklab/blaschke.hpp"
#include "clarklab/measure.hpp"
#include "clarklab/scenarios.hpp"
#include "json.hpp"

namespace clarklab {

using Json = nlohmann::json;

// Every document carries a "schema" tag (clarklab.measure.v1 and friends);
// readers check the tag and translate parse problems into Error("malformed
// JSON: ...") so the front end can map them to a distinct exit code.

Json cplx_to_json(cplx z);
cplx cplx_from_json(const Json& j);

Json measure_to_json(const AtomicMeasure& mu);
AtomicMeasure measure_from_json(const Json& j);

Json blaschke_to_json(const FiniteBlaschke& b);
FiniteBlaschke blaschke_from_json(const Json& j);

// Dense complex matrix, row-major entries as [re, im] pairs.
Json operator_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd operator_from_json(const Json& j);

Json params_to_json(const InstanceParams& p);
InstanceParams params_from_json(const Json& j);

// Parameters plus derived summaries (residuals, classification, omega).
// Replay goes through the "params" object alone.
Json instance_to_json(const Instance& inst);

Json sweep_to_json(const PowerSweep& s);
std::string sweep_to_csv(const PowerSweep& s);  // header n,forward,backward

// Sorted keys, two-space indent, trailing newline; doubles print in shortest
// round-trip form, so equal documents are byte-equal.
std::string dump_canonical(const Json& j);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace clarklab
