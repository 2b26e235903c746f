#include "clarklab/measure.hpp"

#include <algorithm>
#include <cmath>

namespace clarklab {

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, std::string label,
                             double merge_tol)
    : label_(std::move(label)) {
  if (atoms.empty()) throw Error("empty measure");
  for (const Atom& a : atoms) {
    if (!(a.weight > 0.0)) throw Error("nonpositive atom weight");
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
    return a.point.arg_frac() < b.point.arg_frac();
  });
  atoms_.push_back(atoms.front());
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (chord(atoms_.back().point, atoms[i].point) <= merge_tol) {
      atoms_.back().weight += atoms[i].weight;
    } else {
      atoms_.push_back(atoms[i]);
    }
  }
  // The circle wraps: the last atom may coincide with the first.
  if (atoms_.size() > 1 &&
      chord(atoms_.front().point, atoms_.back().point) <= merge_tol) {
    atoms_.front().weight += atoms_.back().weight;
    atoms_.pop_back();
  }
}

double AtomicMeasure::total_mass() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.weight;
  return m;
}

Eigen::VectorXd AtomicMeasure::weights() const {
  Eigen::VectorXd w(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) w(i) = atoms_[i].weight;
  return w;
}

Eigen::VectorXcd AtomicMeasure::points() const {
  Eigen::VectorXcd z(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) z(i) = atoms_[i].point.value();
  return z;
}

cplx fourier_coefficient(const AtomicMeasure& mu, long n) {
  cplx acc(0.0, 0.0);
  for (const Atom& a : mu.atoms()) acc += a.weight * a.point.pow(-n);
  return acc;
}

std::pair<AtomicMeasure, double> normalize(const AtomicMeasure& mu) {
  const double mass = mu.total_mass();
  std::vector<Atom> atoms = mu.atoms();
  for (Atom& a : atoms) a.weight /= mass;
  return {AtomicMeasure(std::move(atoms), mu.label()), mass};
}

WeightTransform weight_transform(const AtomicMeasure& mu,
                                 const Eigen::VectorXcd& phi_values) {
  const std::size_t n = mu.size();
  if (static_cast<std::size_t>(phi_values.size()) != n)
    throw Error("phi values do not match atom count");
  double a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(phi_values(k)) < 1e-12) throw Error("vanishing weight");
    a += mu.atom(k).weight * std::norm(phi_values(k));
  }
  std::vector<Atom> atoms;
  atoms.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    atoms.push_back(
        {mu.atom(k).point, mu.atom(k).weight * std::norm(phi_values(k)) / a});
  }
  WeightTransform out{AtomicMeasure(std::move(atoms), mu.label()),
                      Eigen::VectorXcd(n), a};
  const double sqrt_a = std::sqrt(a);
  for (std::size_t k = 0; k < n; ++k) {
    out.z_diag(k) =
        sqrt_a * std::conj(mu.atom(k).point.value()) / phi_values(k);
  }
  return out;
}

std::vector<long> find_return_times(const AtomicMeasure& mu,
                                    const std::vector<UnitPoint>& targets,
                                    double eps, long n_max) {
  if (targets.size() != mu.size())
    throw Error("one return target required per atom");
  std::vector<long> times;
  double best = 2.0 * static_cast<double>(mu.size()) + 4.0;
  for (long n = 1; n <= n_max; ++n) {
    double dev = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      dev = std::max(dev,
                     std::abs(mu.atom(k).point.pow(n) - targets[k].value()));
      if (dev > eps && dev >= best) break;
    }
    best = std::min(best, dev);
    if (dev <= eps) times.push_back(n);
  }
  if (times.empty()) {
    throw Error("no return time within n_max (best deviation " +
                std::to_string(best) + ")");
  }
  return times;
}

Eigen::VectorXcd coords_from_values(const AtomicMeasure& mu,
                                    const Eigen::VectorXcd& values) {
  if (static_cast<std::size_t>(values.size()) != mu.size())
    throw Error("value count does not match atom count");
  Eigen::VectorXcd x(values.size());
  for (Eigen::Index k = 0; k < values.size(); ++k)
    x(k) = std::sqrt(mu.atom(k).weight) * values(k);
  return x;
}

Eigen::VectorXcd values_from_coords(const AtomicMeasure& mu,
                                    const Eigen::VectorXcd& coords) {
  if (static_cast<std::size_t>(coords.size()) != mu.size())
    throw Error("coordinate count does not match atom count");
  Eigen::VectorXcd f(coords.size());
  for (Eigen::Index k = 0; k < coords.size(); ++k)
    f(k) = coords(k) / std::sqrt(mu.atom(k).weight);
  return f;
}

}  // namespace clarklab
