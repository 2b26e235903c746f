#include "clarklab/blaschke.hpp"

#include <algorithm>
#include <cmath>

namespace clarklab {

namespace {

// Deterministic well-spread sample points in the disk (golden-angle spiral).
std::vector<cplx> disk_samples(int count, double r_min, double r_max) {
  std::vector<cplx> pts;
  pts.reserve(count);
  const double golden = 0.6180339887498949;
  for (int k = 0; k < count; ++k) {
    const double r =
        r_min + (r_max - r_min) * (count == 1 ? 0.5 : double(k) / (count - 1));
    const double t = std::fmod(0.137 + golden * k, 1.0);
    pts.push_back(std::polar(r, kTau * t));
  }
  return pts;
}

}  // namespace

FiniteBlaschke::FiniteBlaschke(std::vector<cplx> zeros, UnitPoint front,
                               int degree_cap)
    : zeros_(std::move(zeros)), front_(front) {
  if (zeros_.empty()) throw Error("Blaschke product needs at least one zero");
  if (static_cast<int>(zeros_.size()) > degree_cap)
    throw Error("degree cap exceeded");
  bool has_origin = false;
  for (cplx& a : zeros_) {
    if (std::abs(a) < 1e-12) {
      a = cplx(0.0, 0.0);
      has_origin = true;
    } else if (std::abs(a) >= 1.0 - 1e-10) {
      throw Error("Blaschke zero too close to the circle");
    }
  }
  if (!has_origin) throw Error("Blaschke product must vanish at the origin");
  std::sort(zeros_.begin(), zeros_.end(), [](cplx a, cplx b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    const double ta = std::arg(a), tb = std::arg(b);
    if (ta != tb) return ta < tb;
    return false;
  });
  num_ = poly_from_roots(zeros_);
  num_ = poly_scale(num_, front_.value());
  // Denominator = degree-n reflection of the monic numerator, normalized so
  // Q(0) = 1 (holds automatically: Q(0) = prod conj(-a_j) ... for monic P the
  // reflection has constant term 1 only when leading coeff of P is 1).
  Poly monic = poly_from_roots(zeros_);
  den_ = poly_reflect(monic, static_cast<int>(zeros_.size()));
}

cplx FiniteBlaschke::evaluate(cplx z) const {
  if (std::abs(z) > 1.0 + 1e-9) throw Error("evaluation outside closed disk");
  cplx acc = front_.value();
  for (const cplx& a : zeros_) {
    const cplx d = 1.0 - std::conj(a) * z;
    if (std::abs(d) < 1e-12) throw Error("pole");
    acc *= (z - a) / d;
  }
  return acc;
}

cplx FiniteBlaschke::derivative(cplx z) const {
  if (std::abs(z) > 1.0 + 1e-9) throw Error("evaluation outside closed disk");
  // Product rule with the per-factor derivative (1-|a|^2)/(1-conj(a)z)^2;
  // the cancelled form stays finite at the zeros.
  const std::size_t n = zeros_.size();
  std::vector<cplx> fac(n), pref(n + 1), suff(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx d = 1.0 - std::conj(zeros_[j]) * z;
    if (std::abs(d) < 1e-12) throw Error("pole");
    fac[j] = (z - zeros_[j]) / d;
  }
  pref[0] = cplx(1.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) pref[j + 1] = pref[j] * fac[j];
  suff[n] = cplx(1.0, 0.0);
  for (std::size_t j = n; j-- > 0;) suff[j] = suff[j + 1] * fac[j];
  cplx acc(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const cplx d = 1.0 - std::conj(zeros_[j]) * z;
    const cplx dj = (1.0 - std::norm(zeros_[j])) / (d * d);
    acc += pref[j] * dj * suff[j + 1];
  }
  return front_.value() * acc;
}

double FiniteBlaschke::boundary_derivative(const UnitPoint& zeta) const {
  double s = 0.0;
  for (const cplx& a : zeros_)
    s += (1.0 - std::norm(a)) / std::norm(zeta.value() - a);
  return s;
}

double FiniteBlaschke::derivative_sup_bound() const {
  double s = 0.0;
  for (const cplx& a : zeros_)
    s += (1.0 + std::abs(a)) / (1.0 - std::abs(a));
  return s;
}

FiniteBlaschke FiniteBlaschke::from_clark_measure(const AtomicMeasure& mu,
                                                  int degree_cap) {
  if (std::abs(mu.total_mass() - 1.0) > 1e-10)
    throw Error("measure not normalized");
  const std::size_t n = mu.size();
  if (static_cast<int>(n) > degree_cap) throw Error("degree cap exceeded");

  // 1/(1-theta) = N/D with D = prod (1 - z conj(zeta_k)),
  // N = sum_k w_k prod_{j != k} (1 - z conj(zeta_j)); then
  // theta = (N - D)/N and the zeros of theta are the roots of N - D.
  std::vector<cplx> conj_pts(n);
  for (std::size_t k = 0; k < n; ++k)
    conj_pts[k] = std::conj(mu.atom(k).point.value());

  Poly D(1);
  D(0) = cplx(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    Poly lin(2);
    lin(0) = cplx(1.0, 0.0);
    lin(1) = -conj_pts[k];
    D = poly_mul(D, lin);
  }
  // Weights enter divided by the total mass: N(0) - D(0) is then a clean
  // rounding-level zero even when the stored weights sum to 1 +- 1e-10.
  const double mass = mu.total_mass();
  Poly N = Poly::Zero(n);
  for (std::size_t k = 0; k < n; ++k) {
    Poly t(1);
    t(0) = cplx(mu.atom(k).weight / mass, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == k) continue;
      Poly lin(2);
      lin(0) = cplx(1.0, 0.0);
      lin(1) = -conj_pts[j];
      t = poly_mul(t, lin);
    }
    N = poly_add(N, t);
  }
  Poly num = poly_add(N, poly_scale(D, cplx(-1.0, 0.0)));

  // An m-fold zero at the origin makes the m trailing coefficients vanish,
  // and rounding noise splits such a root into a cluster of radius eps^(1/m)
  // that no snap tolerance can absorb.  Peel the noise coefficients off as
  // exact origin zeros and root-find only the reduced polynomial.
  const double coeff_scale = num.cwiseAbs().maxCoeff();
  Eigen::Index fold = 0;
  while (fold + 1 < num.size() &&
         std::abs(num(fold)) < 1e-12 * coeff_scale)
    ++fold;
  std::vector<cplx> zeros(static_cast<std::size_t>(fold), cplx(0.0, 0.0));
  const Poly reduced = num.tail(num.size() - fold).eval();
  for (const cplx& a : poly_roots(reduced)) zeros.push_back(a);
  if (zeros.size() != n) throw Error("ill-conditioned measure");
  for (cplx& a : zeros) {
    if (std::abs(a) < 1e-12) a = cplx(0.0, 0.0);
    if (std::abs(a) >= 1.0 - 1e-10) throw Error("ill-conditioned measure");
  }

  // Front constant from a sample-point ratio.
  UnitPoint front;
  {
    bool found = false;
    for (const cplx& z0 : disk_samples(8, 0.21, 0.47)) {
      cplx b0(1.0, 0.0);
      for (const cplx& a : zeros) b0 *= (z0 - a) / (1.0 - std::conj(a) * z0);
      if (std::abs(b0) < 1e-6) continue;
      const cplx target =
          1.0 - poly_eval(D, z0) / poly_eval(N, z0);
      const cplx c = target / b0;
      if (std::abs(std::abs(c) - 1.0) > 1e-8)
        throw Error("ill-conditioned measure");
      front = UnitPoint(c / std::abs(c));
      found = true;
      break;
    }
    if (!found) throw Error("ill-conditioned measure");
  }

  FiniteBlaschke theta(zeros, front, degree_cap);

  // Postcondition: the Cauchy-transform identity at spread disk samples.
  for (const cplx& z : disk_samples(32, 0.1, 0.8)) {
    cplx lhs = 1.0 / (1.0 - theta.evaluate(z));
    cplx rhs(0.0, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      rhs += (mu.atom(k).weight / mass) / (1.0 - z * conj_pts[k]);
    if (std::abs(lhs - rhs) > 1e-9) throw Error("ill-conditioned measure");
  }
  return theta;
}

std::vector<UnitPoint> level_set(const FiniteBlaschke& theta,
                                 const UnitPoint& c) {
  // Roots of front*P - c*Q, all on the circle.
  Poly p = poly_add(theta.numerator(),
                    poly_scale(theta.denominator(), -c.value()));
  std::vector<cplx> roots = poly_roots(p);
  if (static_cast<int>(roots.size()) != theta.degree())
    throw Error("level-set solve failed");
  std::vector<UnitPoint> out;
  out.reserve(roots.size());
  for (cplx r : roots) {
    if (std::abs(std::abs(r) - 1.0) > 1e-6)
      throw Error("spurious off-circle root");
    double s = std::arg(r);
    // Newton in the argument: theta(e^{is}) winds monotonically with speed
    // |theta'|, so s <- s - arg(theta conj(c)) / |theta'| converges fast.
    for (int it = 0; it < 30; ++it) {
      const cplx zeta = std::polar(1.0, s);
      const double res = std::arg(theta.evaluate(zeta) * std::conj(c.value()));
      const double speed = theta.boundary_derivative(UnitPoint(zeta));
      s -= res / speed;
      if (std::abs(res) / speed < 1e-15) break;
    }
    const UnitPoint zeta = UnitPoint(std::polar(1.0, s));
    if (std::abs(theta.evaluate(zeta.value()) - c.value()) > 1e-11)
      throw Error("level-set solve failed");
    out.push_back(zeta);
  }
  std::sort(out.begin(), out.end(), [](const UnitPoint& a, const UnitPoint& b) {
    return a.arg_frac() < b.arg_frac();
  });
  return out;
}

AtomicMeasure clark_measure(const FiniteBlaschke& theta, const UnitPoint& c) {
  std::vector<UnitPoint> pts = level_set(theta, c);
  std::vector<Atom> atoms;
  atoms.reserve(pts.size());
  for (const UnitPoint& zeta : pts)
    atoms.push_back({zeta, 1.0 / theta.boundary_derivative(zeta)});
  AtomicMeasure mu(std::move(atoms), "sigma_c");
  if (std::abs(mu.total_mass() - 1.0) > 1e-10)
    throw Error("level-set solve failed");
  if (mu.size() != pts.size()) throw Error("level-set solve failed");
  return mu;
}

double sup_distance(const FiniteBlaschke& theta, const FiniteBlaschke& omega) {
  const int N = 4096 * std::max(1, std::max(theta.degree(), omega.degree()));
  double grid_max = 0.0;
  for (int i = 0; i < N; ++i) {
    const cplx z = std::polar(1.0, kTau * i / N);
    grid_max = std::max(grid_max,
                        std::abs(theta.evaluate(z) - omega.evaluate(z)));
  }
  // Any circle point sits within arc pi/N of the grid; |d/ds f(e^{is})| is
  // bounded by the derivative sup bounds.
  const double inflation =
      (kTau / (2.0 * N)) *
      (theta.derivative_sup_bound() + omega.derivative_sup_bound());
  return grid_max + inflation;
}

}  // namespace clarklab
