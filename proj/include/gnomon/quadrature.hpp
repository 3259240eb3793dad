#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gnomon/common.hpp"

namespace gnomon {

struct QuadratureRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // positive
};

// Gauss-Legendre on [-1,1]: Newton on P_N with the Tricomi starting guess.
// Converges in < 10 iterations for every N used here; symmetric pairs filled once.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int j = 0; j < half; ++j) {
    double x = std::cos(pi * (j + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      // Legendre recurrence for P_n(x) and P_n'(x)
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one clean evaluation at the converged node for the weight
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[n - 1 - j] = x;        // x > 0 side
    r.weights[n - 1 - j] = w;
    r.nodes[j] = -x;
    r.weights[j] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;  // kill the -0.0 from the symmetric fill
  return r;
}

// affine map of a [-1,1] rule onto [a,b]
inline QuadratureRule mapped_gauss_legendre(int n, double a, double b) {
  QuadratureRule r = gauss_legendre(n);
  const double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = mid + hw * r.nodes[i];
    r.weights[i] *= hw;
  }
  return r;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // accumulated estimate
};

// adaptive Gauss-Kronrod on one interval
inline QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                     double b, double tol = 1e-10) {
  QuadResult q;
  q.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 12, tol, &q.error);
  return q;
}

// adaptive integration over explicit panel boundaries (used for oscillatory
// integrands: panels at the half-periods tame the oscillation)
inline QuadResult integrate_panels(const std::function<double(double)>& f,
                                   const std::vector<double>& edges,
                                   double tol = 1e-10) {
  QuadResult q;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    QuadResult p = integrate_adaptive(f, edges[i], edges[i + 1], tol);
    q.value += p.value;
    q.error += p.error;
  }
  return q;
}

// panel edges on [a,b]: at most `width` wide, with `extra` breakpoints merged in
inline std::vector<double> panel_edges(double a, double b, double width,
                                       const std::vector<double>& extra = {}) {
  std::vector<double> edges;
  long n = std::max(1L, static_cast<long>(std::ceil((b - a) / width)));
  n = std::min(n, 2000000L);
  edges.reserve(static_cast<size_t>(n) + 1 + extra.size());
  for (long i = 0; i <= n; ++i)
    edges.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
  for (double e : extra)
    if (e > a && e < b) edges.push_back(e);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-14; }),
              edges.end());
  return edges;
}

}  // namespace gnomon
