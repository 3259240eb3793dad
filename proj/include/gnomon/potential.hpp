#pragma once

#include <cmath>
#include <stdexcept>

#include "gnomon/common.hpp"

namespace gnomon {

// central potentials V(r); the harmonic constant is mass-weighted so that
// dV/dr = m w0^2 r
struct Potential {
  enum class Kind { Free, Harmonic, CoulombLike };
  Kind kind = Kind::Free;
  double omega0 = 0.0;  // Harmonic
  double alpha = 0.0;   // CoulombLike

  static constexpr double r_min = 1e-9;  // CoulombLike guard radius

  static Potential free() { return {}; }
  static Potential harmonic(double w0) {
    if (!(w0 > 0.0)) throw std::invalid_argument("Potential: omega0 must be > 0");
    return {Kind::Harmonic, w0, 0.0};
  }
  static Potential coulomb_like(double a) {
    if (!(a > 0.0)) throw std::invalid_argument("Potential: alpha must be > 0");
    return {Kind::CoulombLike, 0.0, a};
  }

  double V(double r, double mass) const {
    switch (kind) {
      case Kind::Free: return 0.0;
      case Kind::Harmonic: return 0.5 * mass * omega0 * omega0 * r * r;
      case Kind::CoulombLike: guard(r); return -alpha / r;
    }
    return 0.0;
  }

  double dVdr(double r, double mass) const {
    switch (kind) {
      case Kind::Free: return 0.0;
      case Kind::Harmonic: return mass * omega0 * omega0 * r;
      case Kind::CoulombLike: guard(r); return alpha / (r * r);
    }
    return 0.0;
  }

  // (1/r) dV/dr, finite at the origin for Free and Harmonic; the force term is
  // proportional to this times x so the 0/0 at r=0 never materializes
  double dVdr_over_r(double r, double mass) const {
    switch (kind) {
      case Kind::Free: return 0.0;
      case Kind::Harmonic: return mass * omega0 * omega0;
      case Kind::CoulombLike: guard(r); return alpha / (r * r * r);
    }
    return 0.0;
  }

 private:
  void guard(double r) const {
    if (r < r_min)
      throw InstabilityError("CoulombLike potential evaluated inside the guard radius");
  }
};

}  // namespace gnomon
