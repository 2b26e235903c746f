#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clarklab/asymptotics.hpp"
#include "clarklab/blaschke.hpp"
#include "clarklab/model.hpp"
#include "clarklab/operators.hpp"

namespace clarklab {

// Everything needed to rebuild an instance from scratch.  For the triangular
// kind the Blaschke data describes the middle-block core; head/tail describe
// the diagonal frame around it.
struct InstanceParams {
  std::string kind;               // "crofoot" | "clark_weight" | "triangular"
  std::vector<cplx> theta_zeros;  // zeros of theta, one of them at the origin
  double theta_front_arg = 0.0;   // front constant, fraction of a full turn
  double c_arg = 0.0;             // Clark parameter, fraction of a full turn
  cplx lambda{0.0, 0.0};          // crofoot: interpolation point in the disk
  Eigen::VectorXcd phi;  // clark_weight: values on the sigma_c atoms (empty
                         // means all ones)
  std::vector<double> head_args;  // triangular: diagonal frame above T1
  std::vector<cplx> head_u;       // triangular: u entries on the head block
  std::vector<double> tail_args;  // triangular: diagonal frame below T1
  std::optional<std::uint64_t> seed;
};

// A fully assembled multiplier/perturbation pair X U_{(theta)c'} = T X with
// every construction identity measured.  Residual fields are operator or sup
// norms; all of them are checked against 1e-8 (the multiplier round trip
// against 1e-6) before the constructor returns.
struct Instance {
  InstanceParams params;
  std::string provenance;

  SpacePtr dom;  // K_theta
  SpacePtr cod;  // K_omega
  UnitPoint c;   // parameter the construction was run with
  UnitPoint intertwined_c;  // X intertwines U_{(theta)intertwined_c} with T

  BoundaryFn g;  // multiplier symbol in closed rational form
  Eigen::VectorXcd g_at_cod_clark;
  ModelVector u;     // rank-one direction, T = S_omega + (., chibar omega) u
  OperatorMatrix x;  // intertwiner K_theta -> K_omega
  OperatorMatrix t;
  cplx beta{0.0, 0.0};  // X* (chibar omega) = beta (chibar theta)

  double membership_residual = 0.0;    // u (resp. g) sits in K_omega
  double intertwining_residual = 0.0;  // ||X U_{(theta)c'} - T X||
  double hypothesis_residual = 0.0;    // adjoint mapping of chibar
  double identity_residual = 0.0;      // kind-specific boundary identity
  double multiplier_defect = 0.0;      // round trip through recovery
  double x_condition = 0.0;

  IsometryClass t_class;
  bool nonunitary_expected = false;  // classification predicted by the data
  bool nonunitary_asserted = false;  // prediction strong enough to enforce

  // Triangular kind only: the framed operator diag + u v^* around the core.
  Eigen::VectorXcd tri_diag, tri_u, tri_v;
};

// omega = chi k*_{theta,lambda} / k_{theta,lambda}, g = 1 / k_{theta,lambda}.
// Requires theta(lambda) != 0 (so lambda != 0 as well).
Instance example_crofoot(const FiniteBlaschke& theta, cplx lambda,
                         const UnitPoint& c, int quad = 0);

// nu = sigma_c(theta), nu1 = |phi|^{-2} nu after prescaling phi so that nu1
// is a probability measure, omega = from_clark_measure(nu1); X is the
// composition of the two Clark coordinate maps with multiplication by |phi|,
// and X U_{(theta)1} = T X holds exactly.  phi empty means all ones.
Instance example_clark_weight(const FiniteBlaschke& theta, const UnitPoint& c,
                              Eigen::VectorXcd phi = Eigen::VectorXcd(),
                              int quad = 0);

// Rebuild from stored parameters; random_instance output replays bit for bit.
Instance build_instance(const InstanceParams& params, int quad = 0);

// Deterministic draw: atoms separated by >= 0.05/degree in argument, weights
// bounded away from zero, and the construction retried on a fresh draw (at
// most 20 times) when a residual gate or a degeneracy guard trips.
Instance random_instance(int degree, const std::string& kind,
                         std::uint64_t seed);

struct PipelineOptions {
  int n_sweep = 2000;
  int quad = 0;
  // Stages whose failure leaves later stages meaningless throw when set;
  // inequality checks are always recorded rather than thrown.
  bool throw_on_stage_failure = true;
};

struct PipelineStage {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string detail;
};

struct PipelineReport {
  std::vector<PipelineStage> stages;
  bool all_pass = false;

  double m_plus = 0.0;   // sup ||T^n|| over the sweep
  double m_minus = 0.0;  // sup ||T^{-n}||
  double m1_plus = 1.0;  // same for the middle block (1 when empty)
  double m1_minus = 1.0;
  double qqq_lhs = 0.0;  // observed sup ||T^{-n}||
  double qqq_rhs = 0.0;  // m1_minus * (2 m_plus^2 + 1)

  TriangularBlocks blocks;
  std::optional<NormalizedPair> normalized;
  Certificate certificate;        // chain + block_step on the full operator
  RecoveredMultiplier recovered;  // valid once multiplier_realization ran
};

// Runs the full reduction for T = diag(v_diag) + u v^*: triangularize, bound
// the inverse powers through the middle block, renormalize the middle block
// intertwining to chibar form, transfer to a model-space rank-one
// perturbation, recover the multiplier, and certify the inverse power bounds.
PipelineReport similarity_pipeline(const Eigen::VectorXcd& v_diag,
                                   const Eigen::VectorXcd& u,
                                   const Eigen::VectorXcd& v,
                                   const PipelineOptions& opts = {});

// Same, reading the operator off an instance: the framed operator for the
// triangular kind, T in Clark coordinates otherwise.
PipelineReport similarity_pipeline(const Instance& inst,
                                   const PipelineOptions& opts = {});

}  // namespace clarklab
