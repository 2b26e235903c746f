#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "clarklab/model.hpp"

namespace clarklab {

// Norms of T^n and T^{-n} for n = 0..n_max (so both suprema are >= 1), with
// an eigenvector condition number when the operator is comfortably
// diagonalizable.
struct PowerSweep {
  std::vector<double> forward;
  std::vector<double> backward;
  double m_plus = 0.0;
  double m_minus = 0.0;
  bool diverged = false;    // some norm passed 1e100; the sweep stops there
  bool stabilized = false;  // no new maximum appears after the third quartile
  double kappa = 0.0;
  bool kappa_available = false;
};
PowerSweep power_sweep(const Eigen::MatrixXcd& t, int n_max);

// Named inequality sup ||T^{-n}|| <= f(M) with M = min(m_plus, kappa): the
// observed side uses the swept supremum, the certified side uses kappa as an
// upper bound for all n at once.
struct CertifiedBound {
  std::string name;
  double lhs = 0.0;
  double bound = 0.0;
  bool pass = false;
  double lhs_upper = 0.0;      // certified sup bound (kappa), 0 if unavailable
  bool pass_certified = false;
  bool swept_only = false;
};
struct Certificate {
  PowerSweep sweep;
  double extra = 0.0;
  std::vector<CertifiedBound> checks;
  bool all_pass = true;
};
// Recognized names: pow5 (M^5), pow2 (M^2), c_pow2 (extra * M^2),
// chain ((2 M^2 + 1) M^5), block_step (extra * (2 M^2 + 1)).
Certificate certify(const Eigen::MatrixXcd& t, int n_max,
                    const std::vector<std::string>& names, double extra = 0.0);

// For a block upper triangular T, ||T^{-n}|| against the product bound
// max(1, ||A^{-n}||) max(1, ||C^{-n}||) sqrt(max(2, 2 ||T^n||^2 + 1)).
struct BlockBound {
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};
std::vector<BlockBound> block_inverse_bound(const Eigen::MatrixXcd& t,
                                            int split, int n_max);

// Exact limit Q of the Cesaro means of T^{*n} T^n for diagonalizable T with
// unimodular spectrum, with a Stein-equation certificate and Y = Q^{1/2}
// conjugating T to a unitary.
struct CesaroAsymptote {
  Eigen::MatrixXcd q;
  double stein_residual = 0.0;
  double psd_margin = 0.0;
  double finite_consistency = 0.0;  // finite Cesaro mean vs Q, diagnostic
  int finite_n = 0;
  Eigen::MatrixXcd y;
  Eigen::MatrixXcd unitary;  // Y T Y^{-1}
  double unitarity_residual = 0.0;
  double y_norm = 0.0;
  double y_inv_norm = 0.0;
};
CesaroAsymptote cesaro_asymptote(const Eigen::MatrixXcd& t, int finite_n = 512);

// Powers of T along return times n_k converge to R = X diag(targets) X^{-1};
// the selection keeps only record-improving times so the drift decreases.
struct ReturnLimit {
  std::vector<long> times;
  std::vector<double> deviation;  // spectral deviation at each kept time
  std::vector<double> drift;      // ||T^{n_k} - R||
  Eigen::MatrixXcd r;
  double final_drift = 0.0;
  double tol = 0.0;  // condition-scaled acceptance threshold
  bool converged = false;
  double inverse_ratio = 0.0;  // max ||R^{-1}x|| / ||R x|| over spot checks
  double inverse_bound = 0.0;  // m_bound^3, the allowed ratio
  bool inverse_pass = false;
};
ReturnLimit weak_limit_along_returns(const Eigen::MatrixXcd& t,
                                     const Eigen::VectorXcd& targets,
                                     long n_max, double eps_goal,
                                     double m_bound, std::uint64_t seed = 1234);

// Values along return times of the norm combination
//   s(n) = ||g J^{-1}(chi^n p)||^2 - ||p g J^{-1}(chi^{-n})||^2
// against its limit computed from the target phases, with a rigorous
// Lipschitz-in-deviation tolerance.
struct LimitIdentities {
  std::vector<long> times;
  Eigen::VectorXd s_values;
  double rhs = 0.0;
  Eigen::VectorXd tolerances;
  double max_excess = 0.0;  // max of |s - rhs| - tol; pass means <= 0
  bool pass = false;
};
LimitIdentities return_time_norm_identities(SpacePtr space,
                                            const BoundaryFn& g,
                                            const BoundaryFn& p,
                                            const Eigen::VectorXcd& targets,
                                            const std::vector<long>& times,
                                            int quad = 0);

}  // namespace clarklab
