#pragma once

// Quadrature realization of the oscillator continuum: Gauss-Legendre modes on
// [0, omega_max] with couplings c_k = f(omega_k) sqrt(w_k), plus thermal
// sampling of the per-mode amplitudes.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>

#include "gnomon/common.hpp"
#include "gnomon/kernel.hpp"
#include "gnomon/quadrature.hpp"
#include "gnomon/rng.hpp"
#include "gnomon/susceptibility.hpp"

namespace gnomon {

struct BathDiscretization {
  Eigen::VectorXd omega;  // node frequencies, strictly increasing in (0, omega_max)
  Eigen::VectorXd c;      // effective couplings f(omega_k) sqrt(w_k)
  Eigen::VectorXd w;      // quadrature weights
  double omega_max = 0.0;
  double reconstruction_error = -1.0;  // relative sup-norm, -1 if never validated
  int count() const { return int(omega.size()); }
};

// phase-space amplitudes, one 3-vector pair per mode
struct BathState {
  Eigen::MatrixXd X;  // N x 3
  Eigen::MatrixXd P;  // N x 3
};

struct BathOptions {
  bool validate = true;   // compare mode sum against the quadrature kernel
  double t_check = 10.0;  // horizon for the reconstruction check
  double tol = 1e-3;      // relative sup-norm bound
};

// discrete stand-ins for the kernel integrals; these are the exact kernels of
// the discretized bath, so they double as oracles for noise statistics
inline double mode_sum_gamma(const BathDiscretization& b, double t) {
  if (b.count() == 0) return 0.0;
  return (b.c.array().square() * (b.omega.array() * t).sin() / b.omega.array()).sum();
}

inline double mode_sum_K(const BathDiscretization& b, double tau) {
  if (b.count() == 0) return 0.0;
  return (b.c.array().square() * (b.omega.array() * tau).cos() /
          b.omega.array().square())
      .sum();
}

inline BathDiscretization discretize_bath(const SusceptibilityModel& model, int N,
                                          double omega_max = -1.0,
                                          const BathOptions& opt = {}) {
  if (N < 1) throw std::invalid_argument("discretize_bath: need N >= 1");
  BathDiscretization b;
  b.omega_max = omega_max > 0.0 ? omega_max : model.default_omega_max();
  QuadratureRule q = mapped_gauss_legendre(N, 0.0, b.omega_max);
  b.omega = Eigen::Map<const Eigen::VectorXd>(q.nodes.data(), N);
  b.w = Eigen::Map<const Eigen::VectorXd>(q.weights.data(), N);
  b.c.resize(N);
  for (int k = 0; k < N; ++k)
    b.c[k] = model.coupling_f(b.omega[k]) * std::sqrt(b.w[k]);

  if (opt.validate) {
    KernelOptions ko;
    ko.omega_max = b.omega_max;
    MemoryKernel ref = kernel_from_model(model, 0.01, opt.t_check, ko);
    double scale = 0.0, worst = 0.0;
    for (double g : ref.gamma) scale = std::max(scale, std::abs(g));
    for (std::size_t i = 0; i < ref.gamma.size(); ++i)
      worst = std::max(worst, std::abs(mode_sum_gamma(b, double(i) * ref.dt_kernel) -
                                       ref.gamma[i]));
    if (!(scale > 0.0) || worst > opt.tol * scale) {
      std::ostringstream msg;
      msg << "discretize_bath: N=" << N << " modes reconstruct the kernel to "
          << (scale > 0.0 ? worst / scale : worst) << " relative on [0," << opt.t_check
          << "], tolerance " << opt.tol
          << "; increase N (rule of thumb N > omega_max*t/pi = "
          << b.omega_max * opt.t_check / pi << ")";
      throw std::runtime_error(msg.str());
    }
    b.reconstruction_error = worst / scale;
  }
  return b;
}

// Var[X_kj] = kB T / omega_k^2, Var[P_kj] = kB T, all independent; draws are a
// pure function of (seed, replica, mode, component) so the sampling schedule
// and thread layout cannot change the result
inline BathState sample_thermal(const BathDiscretization& b, double T,
                                std::uint64_t seed, std::uint64_t replica = 0,
                                const Units& units = {}) {
  if (T < 0.0) throw std::invalid_argument("sample_thermal: negative temperature");
  const int N = b.count();
  BathState s;
  s.X = Eigen::MatrixXd::Zero(N, 3);
  s.P = Eigen::MatrixXd::Zero(N, 3);
  if (T == 0.0) return s;
  const double sig = std::sqrt(units.kB * T);
  RngStream sx(seed, {kStreamBathX, replica});
  RngStream sp(seed, {kStreamBathP, replica});
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < 3; ++j) {
      const std::uint64_t n = std::uint64_t(k) * 3 + std::uint64_t(j);
      s.X(k, j) = sig / b.omega[k] * sx.normal(n);
      s.P(k, j) = sig * sp.normal(n);
    }
  return s;
}

}  // namespace gnomon
