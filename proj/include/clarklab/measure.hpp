#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "clarklab/types.hpp"

namespace clarklab {

struct Atom {
  UnitPoint point;
  double weight = 0.0;
};

// Finitely atomic positive measure on the unit circle.  Atoms are kept sorted
// by argument; atoms closer than merge_tol (chordal) are merged at
// construction.
class AtomicMeasure {
 public:
  explicit AtomicMeasure(std::vector<Atom> atoms, std::string label = "",
                         double merge_tol = 1e-10);

  std::size_t size() const { return atoms_.size(); }
  const Atom& atom(std::size_t i) const { return atoms_.at(i); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::string& label() const { return label_; }

  double total_mass() const;
  Eigen::VectorXd weights() const;
  Eigen::VectorXcd points() const;

 private:
  std::vector<Atom> atoms_;
  std::string label_;
};

// n-th Fourier coefficient: sum_k w_k conj(zeta_k)^n.
cplx fourier_coefficient(const AtomicMeasure& mu, long n);

// Probability rescaling; second member is the original total mass.
std::pair<AtomicMeasure, double> normalize(const AtomicMeasure& mu);

// Conjugation 1/|phi|^2-reweighting together with the diagonal unitary that
// intertwines the two multiplication-by-z operators:
//   a      = integral of |phi|^2 dmu,
//   mu1    = (1/a) |phi|^2 dmu,
//   z_diag = sqrt(a) conj(zeta_k) / phi_k   (Z f = sqrt(a) (conj(z)/phi) f).
struct WeightTransform {
  AtomicMeasure mu1;
  Eigen::VectorXcd z_diag;
  double a = 0.0;
};
WeightTransform weight_transform(const AtomicMeasure& mu,
                                 const Eigen::VectorXcd& phi_values);

// All n in [1, n_max] with max_k |zeta_k^n - target_k| <= eps.  Throws when
// none exists, reporting the best deviation achieved.
std::vector<long> find_return_times(const AtomicMeasure& mu,
                                    const std::vector<UnitPoint>& targets,
                                    double eps, long n_max = 1000000);

// Coordinates in the orthonormal basis {delta_k / sqrt(w_k)} of L^2(mu):
// coords_k = sqrt(w_k) * f(zeta_k).
Eigen::VectorXcd coords_from_values(const AtomicMeasure& mu,
                                    const Eigen::VectorXcd& values);
Eigen::VectorXcd values_from_coords(const AtomicMeasure& mu,
                                    const Eigen::VectorXcd& coords);

}  // namespace clarklab
