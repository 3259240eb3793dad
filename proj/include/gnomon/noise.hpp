#pragma once

// Noise seen by the particle: the free evolution of the initial bath
// amplitudes enters through R^N_a = a_ja Y_j and xi^N = -g^{-1} d/dt R^N.

#include <Eigen/Dense>
#include <cmath>

#include "gnomon/bath.hpp"
#include "gnomon/geometry.hpp"

namespace gnomon {

// Y_j(t) = sum_k c_k ( P0_kj sin(w_k t)/w_k + X0_kj cos(w_k t) )
inline Eigen::Vector3d bath_Y(const BathDiscretization& b, const BathState& s0,
                              double t) {
  if (b.count() == 0) return Eigen::Vector3d::Zero();
  const Eigen::ArrayXd ph = b.omega.array() * t;
  Eigen::VectorXd cp = (b.c.array() * ph.sin() / b.omega.array()).matrix();
  Eigen::VectorXd cx = (b.c.array() * ph.cos()).matrix();
  return s0.P.transpose() * cp + s0.X.transpose() * cx;
}

inline Eigen::Vector3d bath_Ydot(const BathDiscretization& b, const BathState& s0,
                                 double t) {
  if (b.count() == 0) return Eigen::Vector3d::Zero();
  const Eigen::ArrayXd ph = b.omega.array() * t;
  Eigen::VectorXd cp = (b.c.array() * ph.cos()).matrix();
  Eigen::VectorXd cx = (b.c.array() * b.omega.array() * ph.sin()).matrix();
  return s0.P.transpose() * cp - s0.X.transpose() * cx;
}

// ambient contraction of the current bath displacement (used by the coupled
// equations of motion, where X is live rather than freely evolved)
inline Eigen::Vector3d bath_coupling_Y(const BathDiscretization& b,
                                       const BathState& s) {
  if (b.count() == 0) return Eigen::Vector3d::Zero();
  return s.X.transpose() * b.c;
}

inline Vec2 noise_R(const CurvedSpace& space, const TangentPoint& p,
                    const BathDiscretization& b, const BathState& s0, double t) {
  return vielbein(space, p).transpose() * bath_Y(b, s0, t);
}

inline Vec2 noise_force(const CurvedSpace& space, const TangentPoint& p,
                        const BathDiscretization& b, const BathState& s0,
                        double t) {
  Vec2 rdot = vielbein(space, p).transpose() * bath_Ydot(b, s0, t);
  return -(inverse_metric(space, p) * rdot);
}

// Streams Ydot along an equally spaced time grid by incremental phase rotation:
// ~4 multiplies per mode per step instead of fresh trig calls. Phases are
// resynchronized periodically so rotation round-off cannot accumulate.
class NoiseSynth {
 public:
  NoiseSynth(const BathDiscretization& b, const BathState& s0, double dt)
      : omega_(b.omega.array()), dt_(dt), n_(0) {
    cd_ = (omega_ * dt).cos();
    sd_ = (omega_ * dt).sin();
    A_ = b.c.asDiagonal() * s0.P;
    B_ = (b.c.array() * b.omega.array()).matrix().asDiagonal() * s0.X;
    resync();
  }

  // Ydot at the current grid time n*dt
  Eigen::Vector3d ydot() const {
    if (A_.rows() == 0) return Eigen::Vector3d::Zero();
    return A_.transpose() * cs_.matrix() - B_.transpose() * sn_.matrix();
  }

  void advance() {
    ++n_;
    if (n_ % 4096 == 0) {
      resync();
      return;
    }
    Eigen::ArrayXd c2 = cs_ * cd_ - sn_ * sd_;
    sn_ = sn_ * cd_ + cs_ * sd_;
    cs_ = c2;
  }

 private:
  void resync() {
    const Eigen::ArrayXd ph = omega_ * (double(n_) * dt_);
    cs_ = ph.cos();
    sn_ = ph.sin();
  }

  Eigen::ArrayXd omega_, cd_, sd_, cs_, sn_;
  Eigen::MatrixXd A_, B_;
  double dt_;
  std::uint64_t n_;
};

}  // namespace gnomon
