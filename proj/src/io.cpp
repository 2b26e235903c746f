#include "clarklab/io.hpp"

#include <fstream>
#include <sstream>

namespace clarklab {

namespace {

void check_schema(const Json& j, const char* expected) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != expected)
    throw Error(std::string("malformed JSON: expected schema ") + expected);
}

// nlohmann throws its own exception hierarchy; run the body under a
// translator so callers see only clarklab::Error.
template <typename F>
auto translated(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

Json cplx_to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

cplx cplx_from_json(const Json& j) {
  return translated([&] {
    return cplx(j.at("re").get<double>(), j.at("im").get<double>());
  });
}

Json measure_to_json(const AtomicMeasure& mu) {
  Json atoms = Json::array();
  for (size_t k = 0; k < mu.size(); ++k)
    atoms.push_back(Json{{"arg_over_2pi", mu.atom(k).point.arg_frac()},
                         {"weight", mu.atom(k).weight}});
  return Json{{"schema", "clarklab.measure.v1"},
              {"label", mu.label()},
              {"atoms", atoms}};
}

AtomicMeasure measure_from_json(const Json& j) {
  return translated([&] {
    check_schema(j, "clarklab.measure.v1");
    std::vector<Atom> atoms;
    for (const Json& a : j.at("atoms"))
      atoms.push_back(
          {UnitPoint::from_arg_frac(a.at("arg_over_2pi").get<double>()),
           a.at("weight").get<double>()});
    return AtomicMeasure(atoms, j.value("label", std::string()));
  });
}

Json blaschke_to_json(const FiniteBlaschke& b) {
  Json zeros = Json::array();
  for (const cplx& a : b.zeros()) zeros.push_back(cplx_to_json(a));
  return Json{{"schema", "clarklab.blaschke.v1"},
              {"front_constant_arg_over_2pi", b.front_constant().arg_frac()},
              {"zeros", zeros}};
}

FiniteBlaschke blaschke_from_json(const Json& j) {
  return translated([&] {
    check_schema(j, "clarklab.blaschke.v1");
    std::vector<cplx> zeros;
    for (const Json& z : j.at("zeros")) zeros.push_back(cplx_from_json(z));
    return FiniteBlaschke(
        zeros, UnitPoint::from_arg_frac(
                   j.at("front_constant_arg_over_2pi").get<double>()));
  });
}

Json operator_to_json(const Eigen::MatrixXcd& m) {
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      entries.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
  return Json{{"schema", "clarklab.operator.v1"},
              {"rows", m.rows()},
              {"cols", m.cols()},
              {"entries", entries}};
}

Eigen::MatrixXcd operator_from_json(const Json& j) {
  return translated([&] {
    check_schema(j, "clarklab.operator.v1");
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& entries = j.at("entries");
    if (rows < 0 || cols < 0 ||
        entries.size() != static_cast<size_t>(rows * cols))
      throw Error("malformed JSON: entry count does not match rows*cols");
    Eigen::MatrixXcd m(rows, cols);
    size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c, ++i)
        m(r, c) = cplx(entries[i].at(0).get<double>(),
                       entries[i].at(1).get<double>());
    return m;
  });
}

Json params_to_json(const InstanceParams& p) {
  Json zeros = Json::array();
  for (const cplx& a : p.theta_zeros) zeros.push_back(cplx_to_json(a));
  Json phi = Json::array();
  for (Eigen::Index k = 0; k < p.phi.size(); ++k)
    phi.push_back(cplx_to_json(p.phi(k)));
  Json head_u = Json::array();
  for (const cplx& h : p.head_u) head_u.push_back(cplx_to_json(h));
  Json out{{"kind", p.kind},
           {"theta_zeros", zeros},
           {"theta_front_arg", p.theta_front_arg},
           {"c_arg", p.c_arg},
           {"lambda", cplx_to_json(p.lambda)},
           {"phi", phi},
           {"head_args", p.head_args},
           {"head_u", head_u},
           {"tail_args", p.tail_args}};
  if (p.seed) out["seed"] = *p.seed;
  return out;
}

InstanceParams params_from_json(const Json& j) {
  return translated([&] {
    InstanceParams p;
    p.kind = j.at("kind").get<std::string>();
    for (const Json& z : j.at("theta_zeros"))
      p.theta_zeros.push_back(cplx_from_json(z));
    p.theta_front_arg = j.at("theta_front_arg").get<double>();
    p.c_arg = j.at("c_arg").get<double>();
    if (j.contains("lambda")) p.lambda = cplx_from_json(j.at("lambda"));
    if (j.contains("phi")) {
      const Json& phi = j.at("phi");
      p.phi.resize(static_cast<Eigen::Index>(phi.size()));
      for (size_t k = 0; k < phi.size(); ++k)
        p.phi(static_cast<Eigen::Index>(k)) = cplx_from_json(phi[k]);
    }
    if (j.contains("head_args"))
      p.head_args = j.at("head_args").get<std::vector<double>>();
    if (j.contains("head_u"))
      for (const Json& h : j.at("head_u"))
        p.head_u.push_back(cplx_from_json(h));
    if (j.contains("tail_args"))
      p.tail_args = j.at("tail_args").get<std::vector<double>>();
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    return p;
  });
}

Json instance_to_json(const Instance& inst) {
  Json g_vals = Json::array();
  for (Eigen::Index k = 0; k < inst.g_at_cod_clark.size(); ++k)
    g_vals.push_back(cplx_to_json(inst.g_at_cod_clark(k)));
  Json derived{{"provenance", inst.provenance},
               {"dom_degree", inst.dom->dim()},
               {"cod_degree", inst.cod->dim()},
               {"intertwined_c_arg", inst.intertwined_c.arg_frac()},
               {"beta", cplx_to_json(inst.beta)},
               {"membership_residual", inst.membership_residual},
               {"intertwining_residual", inst.intertwining_residual},
               {"hypothesis_residual", inst.hypothesis_residual},
               {"identity_residual", inst.identity_residual},
               {"multiplier_defect", inst.multiplier_defect},
               {"x_condition", inst.x_condition},
               {"isometry_defect", inst.t_class.defect},
               {"t_isometric", inst.t_class.isometric},
               {"t_unitary", inst.t_class.unitary},
               {"t_in_clark_family", inst.t_class.in_clark_family},
               {"nonunitary_expected", inst.nonunitary_expected},
               {"nonunitary_asserted", inst.nonunitary_asserted},
               {"omega", blaschke_to_json(inst.cod->theta())},
               {"g_at_cod_clark", g_vals}};
  if (inst.params.kind == "triangular")
    derived["frame_dims"] = Json::array(
        {inst.params.head_args.size(),
         static_cast<size_t>(inst.cod->dim()), inst.params.tail_args.size()});
  return Json{{"schema", "clarklab.instance.v1"},
              {"params", params_to_json(inst.params)},
              {"derived", derived}};
}

Json sweep_to_json(const PowerSweep& s) {
  return Json{{"schema", "clarklab.sweep.v1"},
              {"m_plus", s.m_plus},
              {"m_minus", s.m_minus},
              {"diverged", s.diverged},
              {"stabilized", s.stabilized},
              {"kappa", s.kappa},
              {"kappa_available", s.kappa_available},
              {"forward", s.forward},
              {"backward", s.backward}};
}

std::string sweep_to_csv(const PowerSweep& s) {
  std::ostringstream os;
  os.precision(17);
  os << "n,forward,backward\n";
  const size_t n = std::min(s.forward.size(), s.backward.size());
  for (size_t i = 0; i < n; ++i)
    os << i << "," << s.forward[i] << "," << s.backward[i] << "\n";
  return os.str();
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << text;
  if (!out) throw Error("cannot write file: " + path);
}

}  // namespace clarklab
