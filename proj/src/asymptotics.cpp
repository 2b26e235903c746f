#include "clarklab/asymptotics.hpp"

#include "clarklab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace clarklab {

namespace {

constexpr double kDivergenceCap = 1e100;

bool no_late_maximum(const std::vector<double>& xs) {
  if (xs.size() < 4) return true;
  const size_t q3 = (3 * (xs.size() - 1)) / 4;
  const double early = *std::max_element(xs.begin(), xs.begin() + q3 + 1);
  const double global = *std::max_element(xs.begin(), xs.end());
  return global - early <= 1e-6;
}

// Eigenvector condition number with unit-normalized columns; returns false
// when the solver fails or the basis is numerically singular.
bool eigen_condition(const Eigen::MatrixXcd& t, double* kappa,
                     Eigen::MatrixXcd* vectors = nullptr,
                     Eigen::VectorXcd* values = nullptr) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(t);
  if (es.info() != Eigen::Success) return false;
  Eigen::MatrixXcd v = es.eigenvectors();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    const double nj = v.col(j).norm();
    if (nj == 0.0) return false;
    v.col(j) /= nj;
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(v);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin <= 0.0) return false;
  *kappa = sv(0) / smin;
  if (vectors) *vectors = v;
  if (values) *values = es.eigenvalues();
  return *kappa <= 1e12;
}

Eigen::MatrixXcd checked_inverse(const Eigen::MatrixXcd& t) {
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(t);
  if (!lu.isInvertible()) throw Error("operator is not invertible");
  return lu.inverse();
}

}  // namespace

PowerSweep power_sweep(const Eigen::MatrixXcd& t, int n_max) {
  if (t.rows() != t.cols()) throw Error("operator must be square");
  if (n_max < 0) throw Error("negative power range");
  const auto n = t.rows();
  const Eigen::MatrixXcd tinv = checked_inverse(t);

  PowerSweep out;
  Eigen::MatrixXcd fwd = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd bwd = fwd;
  out.forward.reserve(static_cast<size_t>(n_max) + 1);
  out.backward.reserve(static_cast<size_t>(n_max) + 1);
  for (int k = 0; k <= n_max; ++k) {
    const double nf = operator_norm(fwd);
    const double nb = operator_norm(bwd);
    out.forward.push_back(nf);
    out.backward.push_back(nb);
    if (nf > kDivergenceCap || nb > kDivergenceCap) {
      out.diverged = true;
      break;
    }
    if (k < n_max) {
      fwd = fwd * t;
      bwd = bwd * tinv;
    }
  }
  out.m_plus = *std::max_element(out.forward.begin(), out.forward.end());
  out.m_minus = *std::max_element(out.backward.begin(), out.backward.end());
  out.stabilized = !out.diverged && no_late_maximum(out.forward) &&
                   no_late_maximum(out.backward);
  out.kappa_available = eigen_condition(t, &out.kappa);
  return out;
}

Certificate certify(const Eigen::MatrixXcd& t, int n_max,
                    const std::vector<std::string>& names, double extra) {
  Certificate out;
  out.sweep = power_sweep(t, n_max);
  out.extra = extra;
  const double base = out.sweep.kappa_available
                          ? std::min(out.sweep.m_plus, out.sweep.kappa)
                          : out.sweep.m_plus;
  for (const std::string& name : names) {
    CertifiedBound c;
    c.name = name;
    c.lhs = out.sweep.m_minus;
    if (name == "pow5") {
      c.bound = std::pow(base, 5);
    } else if (name == "pow2") {
      c.bound = base * base;
    } else if (name == "c_pow2") {
      c.bound = extra * base * base;
    } else if (name == "chain") {
      c.bound = (2.0 * base * base + 1.0) * std::pow(base, 5);
    } else if (name == "block_step") {
      c.bound = extra * (2.0 * base * base + 1.0);
    } else {
      throw Error("unknown certificate name: " + name);
    }
    c.pass = c.lhs <= c.bound + 1e-9;
    c.swept_only = !out.sweep.kappa_available;
    if (out.sweep.kappa_available) {
      c.lhs_upper = out.sweep.kappa;
      c.pass_certified = c.lhs_upper <= c.bound + 1e-9;
    }
    out.all_pass = out.all_pass && c.pass;
    out.checks.push_back(std::move(c));
  }
  return out;
}

std::vector<BlockBound> block_inverse_bound(const Eigen::MatrixXcd& t,
                                            int split, int n_max) {
  const auto n = t.rows();
  if (t.cols() != n) throw Error("operator must be square");
  if (split <= 0 || split >= n) throw Error("block split out of range");
  if (t.bottomLeftCorner(n - split, split).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("operator is not block upper triangular");

  const Eigen::MatrixXcd a = t.topLeftCorner(split, split);
  const Eigen::MatrixXcd c = t.bottomRightCorner(n - split, n - split);
  const Eigen::MatrixXcd tinv = checked_inverse(t);
  const Eigen::MatrixXcd ainv = checked_inverse(a);
  const Eigen::MatrixXcd cinv = checked_inverse(c);

  std::vector<BlockBound> out;
  Eigen::MatrixXcd tn = t, tni = tinv, ani = ainv, cni = cinv;
  for (int k = 1; k <= n_max; ++k) {
    BlockBound b;
    b.n = k;
    b.lhs = operator_norm(tni);
    const double tf = operator_norm(tn);
    b.rhs = std::max(1.0, operator_norm(ani)) *
            std::max(1.0, operator_norm(cni)) *
            std::sqrt(std::max(2.0, 2.0 * tf * tf + 1.0));
    b.pass = b.lhs <= b.rhs * (1.0 + 1e-9);
    out.push_back(b);
    if (k < n_max) {
      tn = tn * t;
      tni = tni * tinv;
      ani = ani * ainv;
      cni = cni * cinv;
    }
  }
  return out;
}

CesaroAsymptote cesaro_asymptote(const Eigen::MatrixXcd& t, int finite_n) {
  const auto n = t.rows();
  if (t.cols() != n) throw Error("operator must be square");

  double kappa = 0.0;
  Eigen::MatrixXcd s;
  Eigen::VectorXcd lam;
  if (!eigen_condition(t, &kappa, &s, &lam))
    throw Error("operator too far from diagonalizable");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(std::abs(lam(i)) - 1.0) > 1e-8)
      throw Error("spectrum off the unit circle");

  // T^{*m} T^m = S^{-*} (conj(L)^m G L^m) S^{-1} with G = S^* S; averaging
  // in m kills every entry with lam_i != lam_j, so the limit is the Hadamard
  // product of G with the equal-eigenvalue indicator.
  const Eigen::MatrixXcd g = s.adjoint() * s;
  Eigen::MatrixXcd ge = g;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (std::abs(lam(i) - lam(j)) > 1e-8) ge(i, j) = 0.0;
  const Eigen::MatrixXcd sinv = checked_inverse(s);
  CesaroAsymptote out;
  out.q = sinv.adjoint() * ge * sinv;
  out.q = 0.5 * (out.q + out.q.adjoint()).eval();
  out.stein_residual = operator_norm(t.adjoint() * out.q * t - out.q);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> saes(out.q);
  if (saes.info() != Eigen::Success) throw Error("asymptote eigensolver failed");
  const Eigen::VectorXd ev = saes.eigenvalues();
  out.psd_margin = ev(0);
  if (ev(0) <= 1e-12) throw Error("asymptote is singular");
  const Eigen::MatrixXcd v = saes.eigenvectors();
  out.y = v * ev.cwiseSqrt().asDiagonal() * v.adjoint();
  const Eigen::MatrixXcd yinv =
      v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
  out.unitary = out.y * t * yinv;
  out.unitarity_residual = operator_norm(
      out.unitary.adjoint() * out.unitary -
      Eigen::MatrixXcd::Identity(n, n));
  out.y_norm = std::sqrt(ev(n - 1));
  out.y_inv_norm = 1.0 / std::sqrt(ev(0));

  // Finite-mean diagnostic: expected to agree only to O(1/(N * gap)).
  out.finite_n = finite_n;
  Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
  for (int m = 0; m < finite_n; ++m) {
    acc += pw.adjoint() * pw;
    pw = pw * t;
  }
  acc /= static_cast<double>(finite_n);
  out.finite_consistency = operator_norm(acc - out.q);
  return out;
}

ReturnLimit weak_limit_along_returns(const Eigen::MatrixXcd& t,
                                     const Eigen::VectorXcd& targets,
                                     long n_max, double eps_goal,
                                     double m_bound, std::uint64_t seed) {
  const auto n = t.rows();
  if (t.cols() != n) throw Error("operator must be square");
  if (targets.size() != n) throw Error("coordinate dimension mismatch");

  double kappa = 0.0;
  Eigen::MatrixXcd x;
  Eigen::VectorXcd lam;
  if (!eigen_condition(t, &kappa, &x, &lam))
    throw Error("operator too far from diagonalizable");
  std::vector<UnitPoint> phases;
  phases.reserve(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(std::abs(lam(i)) - 1.0) > 1e-8)
      throw Error("spectrum off the unit circle");
    phases.emplace_back(lam(i) / std::abs(lam(i)));
  }

  // The targets must be assigned in the eigensolver's eigenvalue order; the
  // caller passes them aligned with sorted-by-argument spectrum, so realign.
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return phases[static_cast<size_t>(a)].arg_frac() <
           phases[static_cast<size_t>(b)].arg_frac();
  });
  Eigen::VectorXcd tgt(n);
  for (Eigen::Index i = 0; i < n; ++i) tgt(order[static_cast<size_t>(i)]) = targets(i);

  const Eigen::MatrixXcd xinv = checked_inverse(x);
  ReturnLimit out;
  out.r = x * tgt.asDiagonal() * xinv;

  double best = std::numeric_limits<double>::infinity();
  for (long m = 1; m <= n_max; ++m) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      dev = std::max(dev, std::abs(phases[static_cast<size_t>(i)].pow(m) - tgt(i)));
    if (dev < best) {
      best = dev;
      out.times.push_back(m);
      out.deviation.push_back(dev);
      Eigen::VectorXcd lpow(n);
      for (Eigen::Index i = 0; i < n; ++i)
        lpow(i) = phases[static_cast<size_t>(i)].pow(m);
      const Eigen::MatrixXcd tm = x * lpow.asDiagonal() * xinv;
      out.drift.push_back(operator_norm(tm - out.r));
      if (dev <= eps_goal) break;
    }
  }
  if (out.times.empty()) throw Error("no return time within range");
  out.final_drift = out.drift.back();
  out.tol = kappa * std::max(out.deviation.back(), eps_goal) + 1e-12;
  out.converged = out.deviation.back() <= eps_goal && out.final_drift <= out.tol;

  // Inverse-power spot check ||R^{-1} x|| <= M^3 ||R x||.
  const Eigen::MatrixXcd rinv = checked_inverse(out.r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(gauss(rng), gauss(rng));
    const double denom = (out.r * v).norm();
    if (denom > 0.0) worst = std::max(worst, (rinv * v).norm() / denom);
  }
  out.inverse_ratio = worst;
  out.inverse_bound = std::pow(m_bound, 3);
  out.inverse_pass = worst <= out.inverse_bound * (1.0 + 1e-9);
  return out;
}

LimitIdentities return_time_norm_identities(SpacePtr space,
                                            const BoundaryFn& g,
                                            const BoundaryFn& p,
                                            const Eigen::VectorXcd& targets,
                                            const std::vector<long>& times,
                                            int quad) {
  const int n = space->dim();
  if (targets.size() != n) throw Error("coordinate dimension mismatch");
  if (times.empty()) throw Error("no return times supplied");

  const int N = quad > 0 ? quad : space->quadrature_size();
  const Eigen::VectorXcd grid = circle_grid(N);
  Eigen::VectorXcd gv(N), pv(N);
  for (int i = 0; i < N; ++i) {
    gv(i) = g(grid(i));
    pv(i) = p(grid(i));
  }
  const double sup_g = gv.cwiseAbs().maxCoeff();
  const double sup_p = pv.cwiseAbs().maxCoeff();

  Eigen::VectorXcd p_at_atoms(n);
  for (int k = 0; k < n; ++k) p_at_atoms(k) = p(space->clark_point(k).value());

  const auto grid_norm = [&](const ModelVector& f,
                             bool with_p) {
    Eigen::VectorXcd samples(N);
    for (int i = 0; i < N; ++i) {
      cplx v = gv(i) * f.eval(grid(i));
      if (with_p) v *= pv(i);
      samples(i) = v;
    }
    return std::sqrt(samples.squaredNorm() / N);
  };

  // Limit value from the target phases.
  Eigen::VectorXcd f_lim_vals(n), h_lim_vals(n);
  for (int k = 0; k < n; ++k) {
    f_lim_vals(k) = targets(k) * p_at_atoms(k);
    h_lim_vals(k) = std::conj(targets(k));
  }
  const ModelVector f_lim = model_vector_from_values(space, f_lim_vals);
  const ModelVector h_lim = model_vector_from_values(space, h_lim_vals);
  const double nf_lim = grid_norm(f_lim, false);
  const double nh_lim = grid_norm(h_lim, true);

  LimitIdentities out;
  out.times = times;
  out.rhs = nf_lim * nf_lim - nh_lim * nh_lim;
  out.s_values.resize(static_cast<Eigen::Index>(times.size()));
  out.tolerances.resize(static_cast<Eigen::Index>(times.size()));
  double excess = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < times.size(); ++k) {
    const long m = times[k];
    Eigen::VectorXcd fv(n), hv(n);
    double dev = 0.0;
    for (int i = 0; i < n; ++i) {
      const cplx zm = space->clark_point(i).pow(m);
      fv(i) = zm * p_at_atoms(i);
      hv(i) = std::conj(zm);
      dev = std::max(dev, std::abs(zm - targets(i)));
    }
    const ModelVector fm = model_vector_from_values(space, fv);
    const ModelVector hm = model_vector_from_values(space, hv);
    const double nf = grid_norm(fm, false);
    const double nh = grid_norm(hm, true);
    const double s = nf * nf - nh * nh;
    out.s_values(static_cast<Eigen::Index>(k)) = s;
    // |s - rhs| is Lipschitz in the spectral deviation: each norm moves by
    // at most sup|g| (1 + sup|p|) dev, applied to the sum of the four norms.
    const double tol =
        2.0 * sup_g * (1.0 + sup_p) * (nf + nh + nf_lim + nh_lim) * dev + 1e-8;
    out.tolerances(static_cast<Eigen::Index>(k)) = tol;
    excess = std::max(excess, std::abs(s - out.rhs) - tol);
  }
  out.max_excess = excess;
  out.pass = excess <= 0.0;
  return out;
}

}  // namespace clarklab
