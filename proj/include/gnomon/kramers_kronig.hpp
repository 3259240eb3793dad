#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "gnomon/common.hpp"

namespace gnomon {

// Causality ties the real part to the dissipative part through
//   Re chi(w) = (2/pi) PV integral_0^inf u Im chi(u) / (u^2 - w^2) du.
// Samples are treated as exactly piecewise linear, so every segment integral has
// a closed form and the principal value needs no grid excision: subtract the
// pole value h(w) = w Im(w), integrate the regular remainder segment by segment,
// and add back the analytic log term of the subtracted constant. The integrand
// is extended past the last sample by a short linear ramp of h to zero so that
// the edge target stays regular; the un-sampled true tail is only estimated.
struct KKResult {
  std::vector<double> re;
  std::vector<double> tail;   // per-point truncation-tail estimate (not added)
  double tail_estimate = 0.0; // max over the interior (w <= 0.9 wmax)
};

inline KKResult kramers_kronig_re(const std::vector<double>& omega,
                                  const std::vector<double>& im) {
  using Arr = Eigen::ArrayXd;
  const size_t n = omega.size();
  if (n < 3 || im.size() != n)
    throw std::invalid_argument("kramers_kronig_re: need >= 3 matching samples");
  for (size_t i = 0; i < n; ++i) {
    if (omega[i] < 0.0)
      throw std::invalid_argument("kramers_kronig_re: omega must be >= 0");
    if (i > 0 && omega[i] <= omega[i - 1])
      throw std::invalid_argument("kramers_kronig_re: grid must be strictly increasing");
  }
  if (omega[0] == 0.0 && im[0] != 0.0)
    throw std::invalid_argument(
        "kramers_kronig_re: Im chi(0) must vanish (otherwise the dispersion "
        "integral diverges at omega = 0)");

  // working nodes: prepend u=0 (h=0) if absent, append the closing ramp
  const int off = omega[0] > 0.0 ? 1 : 0;
  const double W = omega[n - 1];
  const double pad = 4.0 * (omega[n - 1] - omega[n - 2]);
  const int nn = static_cast<int>(n) + off + 1;  // nodes
  Arr u(nn), h(nn);
  if (off) {
    u[0] = 0.0;
    h[0] = 0.0;
  }
  for (size_t i = 0; i < n; ++i) {
    u[off + static_cast<int>(i)] = omega[i];
    h[off + static_cast<int>(i)] = omega[i] * im[i];
  }
  u[nn - 1] = W + pad;
  h[nn - 1] = 0.0;
  const double Wp = u[nn - 1];
  const int ns = nn - 1;  // segments

  // per-segment slope/intercept of the piecewise-linear h
  Arr beta = (h.tail(ns) - h.head(ns)) / (u.tail(ns) - u.head(ns));
  Arr alpha = h.head(ns) - beta * u.head(ns);

  KKResult out;
  out.re.assign(n, 0.0);
  out.tail.assign(n, 0.0);
  const double hW = W * im[n - 1];
  Arr Lm(nn), Lp(nn), D(nn), S(nn);

  for (size_t i = 0; i < n; ++i) {
    const double w0 = omega[i];
    double acc = 0.0;
    if (w0 == 0.0) {
      // Re(0) = (2/pi) integral Im/u du, Im piecewise linear (alpha_im = 0 on
      // the first segment because Im(0) = 0)
      for (int s = 0; s < ns; ++s) {
        const double a = u[s], b = u[s + 1];
        const double ia = a > 0.0 ? h[s] / a : 0.0;
        const double ib = b > 0.0 ? h[s + 1] / b : 0.0;
        const double bi = (ib - ia) / (b - a);
        acc += bi * (b - a);
        if (a > 0.0) acc += (ia - bi * a) * std::log(b / a);
      }
    } else {
      const int ip = off + static_cast<int>(i);  // pole node index
      const double h0 = h[ip];
      Lm = (u - w0).abs().max(1e-300).log();
      Lm[ip] = 0.0;  // dummy; the two adjacent segments are fixed up below
      Lp = (u + w0).log();
      D = Lm - Lp;
      S = Lm + Lp;
      // segment sums: (alpha - h0) * I1 + beta * I2 with
      // I1 = (D_{s+1} - D_s) / (2 w0), I2 = (S_{s+1} - S_s) / 2
      acc = (((alpha - h0) / (2.0 * w0)) * (D.tail(ns) - D.head(ns)) +
             0.5 * beta * (S.tail(ns) - S.head(ns)))
                .sum();
      // replace the two pole-adjacent segments by the regular closed form
      // (the interpolant passes through (w0, h0), so the integrand there is
      // beta/(u + w0))
      for (int s = std::max(0, ip - 1); s <= std::min(ns - 1, ip); ++s) {
        const double bogus = (alpha[s] - h0) / (2.0 * w0) * (D[s + 1] - D[s]) +
                             0.5 * beta[s] * (S[s + 1] - S[s]);
        acc += beta[s] * (Lp[s + 1] - Lp[s]) - bogus;
      }
      // analytic term of the subtracted constant over [0, Wp]
      acc += h0 * 0.5 / w0 * std::log((Wp - w0) / (Wp + w0));
    }
    out.re[i] = 2.0 / pi * acc;

    // tail beyond the grid, assuming h ~ h(W) (W/u)^2 out there
    if (w0 < 1e-3 * W) {
      out.tail[i] = 2.0 / pi * hW / (3.0 * W);
    } else if (w0 < W) {
      out.tail[i] = 2.0 / pi * hW * (W * W) / (w0 * w0) *
                    (0.5 / w0 * std::log((W + w0) / (W - w0)) - 1.0 / W);
    } else {
      out.tail[i] = out.tail[i > 0 ? i - 1 : 0];
    }
    if (w0 <= 0.9 * W)
      out.tail_estimate = std::max(out.tail_estimate, std::abs(out.tail[i]));
  }
  return out;
}

}  // namespace gnomon
