#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace clarklab {

using cplx = std::complex<double>;

inline constexpr double kTau = 6.283185307179586476925286766559;

// Domain errors carry a short reason string ("empty measure", "pole", ...).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A point of the unit circle.  Stores both the complex value and the argument
// as a fraction of a full turn; the fractional form keeps high powers exact
// enough for return-time searches (arg of z^n accumulates no rounding beyond
// one fmod).
class UnitPoint {
 public:
  UnitPoint() : frac_(0.0), value_(1.0, 0.0) {}

  explicit UnitPoint(cplx z) {
    const double r = std::abs(z);
    if (std::abs(r - 1.0) > 1e-12) {
      throw Error("point not on unit circle (|z| deviates by " +
                  std::to_string(std::abs(r - 1.0)) + ")");
    }
    value_ = z / r;
    double t = std::arg(value_) / kTau;
    if (t < 0.0) t += 1.0;
    if (t >= 1.0) t -= 1.0;
    frac_ = t;
  }

  static UnitPoint from_arg_frac(double t) {
    UnitPoint p;
    t = t - std::floor(t);
    p.frac_ = t;
    p.value_ = std::polar(1.0, kTau * t);
    return p;
  }

  cplx value() const { return value_; }
  double arg_frac() const { return frac_; }

  UnitPoint conj() const {
    UnitPoint p;
    p.value_ = std::conj(value_);
    p.frac_ = frac_ == 0.0 ? 0.0 : 1.0 - frac_;
    return p;
  }

  // z^n computed through the argument, stable for |n| up to ~1e9.
  cplx pow(long n) const {
    if (n == 0) return cplx(1.0, 0.0);
    if (n == 1) return value_;
    if (n == -1) return std::conj(value_);
    double t = std::fmod(static_cast<double>(n) * frac_, 1.0);
    if (t < 0.0) t += 1.0;
    return std::polar(1.0, kTau * t);
  }

 private:
  double frac_;
  cplx value_;
};

inline double chord(const UnitPoint& a, const UnitPoint& b) {
  return std::abs(a.value() - b.value());
}

}  // namespace clarklab
