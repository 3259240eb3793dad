#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gnomon/quadrature.hpp"
#include "gnomon/susceptibility.hpp"

namespace gnomon {

// Time-domain friction kernel on a uniform grid:
//   gamma(t)     = integral_0^wmax f^2(w) sin(wt)/w dw,   gamma(0) = 0,
//   gamma_dot(t) = integral_0^wmax f^2(w) cos(wt)    dw,
// zero for t < 0 (causality). Tables are built with a composite Gauss-Legendre
// rule fine enough to resolve the oscillation at the longest horizon, then
// spot-checked against adaptive Gauss-Kronrod; the worst deviation found is
// stored as achieved_error.
struct MemoryKernel {
  double dt_kernel = 0.0;
  double t_max = 0.0;
  double omega_max = 0.0;
  std::vector<double> gamma;      // gamma[i] at t = i*dt_kernel
  std::vector<double> gamma_dot;
  double achieved_error = 0.0;

  double gamma_at(double t) const { return interp(gamma, t); }
  double gamma_dot_at(double t) const { return interp(gamma_dot, t); }

 private:
  double interp(const std::vector<double>& tab, double t) const {
    if (t < 0.0) return 0.0;
    double u = t / dt_kernel;
    size_t i = static_cast<size_t>(u);
    if (i + 1 >= tab.size()) {
      if (t <= t_max * (1.0 + 1e-12)) return tab.back();
      throw std::out_of_range("MemoryKernel: t beyond tabulated horizon");
    }
    double f = u - static_cast<double>(i);
    return tab[i] + f * (tab[i + 1] - tab[i]);
  }
};

struct KernelOptions {
  double omega_max = -1.0;   // < 0: model default (8 x spectral scale)
  double tol = 1e-10;        // adaptive spot-check target
  int check_points = 8;      // random grid times verified adaptively
  double check_tol = 1e-6;   // relative to kernel scale; exceeded -> throw
};

inline MemoryKernel kernel_from_model(const SusceptibilityModel& model,
                                      double dt_kernel, double t_max,
                                      const KernelOptions& opt = {}) {
  if (dt_kernel <= 0.0 || t_max <= 0.0)
    throw std::invalid_argument("kernel_from_model: dt_kernel and t_max must be > 0");
  MemoryKernel k;
  k.dt_kernel = dt_kernel;
  k.t_max = t_max;
  k.omega_max = opt.omega_max > 0.0 ? opt.omega_max : model.default_omega_max();

  const size_t nt = static_cast<size_t>(std::ceil(t_max / dt_kernel)) + 1;
  k.gamma.assign(nt, 0.0);
  k.gamma_dot.assign(nt, 0.0);

  // composite rule: panels no wider than a half period of the slowest-resolved
  // oscillation, with model breakpoints merged in (tabulated grid points; a
  // geometric cluster around a Lorentz resonance so narrow lines are resolved)
  const double horizon = std::max(t_max, 1e-3);
  double width = std::min(pi / horizon, k.omega_max / 64.0);
  std::vector<double> extra;
  if (model.kind == SusceptibilityModel::Kind::Tabulated) extra = model.tab_w;
  if (model.kind == SusceptibilityModel::Kind::Lorentz) {
    extra.push_back(model.resonance);
    for (double d = 0.5 * model.damping; d < 2.0 * k.omega_max; d *= 2.0) {
      extra.push_back(model.resonance - d);
      extra.push_back(model.resonance + d);
    }
  }
  std::vector<double> edges = panel_edges(0.0, k.omega_max, width, extra);

  for (size_t e = 0; e + 1 < edges.size(); ++e) {
    QuadratureRule rule = mapped_gauss_legendre(16, edges[e], edges[e + 1]);
    for (int q = 0; q < 16; ++q) {
      const double w = rule.nodes[q];
      if (w <= 0.0) continue;
      const double f2w = model.coupling_f2(w) * rule.weights[q];
      // phase rotation down the time grid: 4 mults per node per step
      const double cd = std::cos(w * dt_kernel), sd = std::sin(w * dt_kernel);
      double c = 1.0, s = 0.0;
      for (size_t i = 0; i < nt; ++i) {
        k.gamma[i] += f2w * s / w;
        k.gamma_dot[i] += f2w * c;
        const double c2 = c * cd - s * sd;
        s = s * cd + c * sd;
        c = c2;
      }
    }
  }
  k.gamma[0] = 0.0;

  // adaptive spot check at a few grid times (deterministic pseudo-random picks)
  double scale = std::abs(k.gamma_dot[0]);
  for (size_t i = 0; i < nt; ++i) scale = std::max(scale, std::abs(k.gamma[i]));
  if (scale == 0.0) scale = 1.0;
  auto check_at = [&](size_t i) {
    const double t = static_cast<double>(i) * dt_kernel;
    auto fg = [&](double w) {
      return w > 0.0 ? model.coupling_f2(w) * std::sin(w * t) / w : 0.0;
    };
    auto fd = [&](double w) { return w > 0.0 ? model.coupling_f2(w) * std::cos(w * t) : 0.0; };
    std::vector<double> ed =
        panel_edges(0.0, k.omega_max, t > 0.0 ? pi / std::max(t, 1e-3) : k.omega_max,
                    extra);
    double dg = std::abs(integrate_panels(fg, ed, opt.tol).value - k.gamma[i]);
    double dd = std::abs(integrate_panels(fd, ed, opt.tol).value - k.gamma_dot[i]);
    k.achieved_error = std::max(k.achieved_error, std::max(dg, dd));
  };
  check_at(0);
  check_at(nt - 1);
  uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int c = 0; c < opt.check_points; ++c) {
    h = h * 6364136223846793005ULL + 1442695040888963407ULL;
    check_at(1 + (h >> 33) % (nt - 1));
  }
  if (k.achieved_error > opt.check_tol * scale)
    throw std::runtime_error(
        "kernel_from_model: quadrature disagreement " +
        std::to_string(k.achieved_error) + " exceeds " +
        std::to_string(opt.check_tol * scale) + " (achieved error estimate)");
  return k;
}

}  // namespace gnomon
