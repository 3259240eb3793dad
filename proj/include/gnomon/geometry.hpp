#pragma once

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "gnomon/common.hpp"

namespace gnomon {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat32 = Eigen::Matrix<double, 3, 2>;

// Sphere of curvature lambda = 1/R^2 seen through the gnomonic chart (central
// projection onto the tangent plane at the pole). lambda = 0 is the flat plane.
struct CurvedSpace {
  double lambda = 0.0;
  double mass = 1.0;

  CurvedSpace() = default;
  CurvedSpace(double lam, double m = 1.0) : lambda(lam), mass(m) {
    if (lam < 0.0) throw std::invalid_argument("CurvedSpace: lambda must be >= 0");
    if (m <= 0.0) throw std::invalid_argument("CurvedSpace: mass must be > 0");
  }
};

struct TangentPoint {
  Vec2 x = Vec2::Zero();
  TangentPoint() = default;
  explicit TangentPoint(const Vec2& xx) : x(xx) {}
  TangentPoint(double x1, double x2) : x(x1, x2) {}
  double r2() const { return x.squaredNorm(); }
};

struct TangentState {
  TangentPoint point;
  Vec2 v = Vec2::Zero();
  TangentState() = default;
  TangentState(const TangentPoint& p, const Vec2& vv) : point(p), v(vv) {}
};

struct EmbeddedPoint {
  Vec3 q = Vec3::Zero();
};

// Lambda = sqrt(1 + lambda r^2); blows up toward the equator of the chart
inline double lambda_factor(const CurvedSpace& s, const TangentPoint& p) {
  return std::sqrt(1.0 + s.lambda * p.r2());
}

// g = (I - lambda x x^T / Lambda^2) / Lambda^2
inline Mat2 metric(const CurvedSpace& s, const TangentPoint& p) {
  const double L2 = 1.0 + s.lambda * p.r2();
  Mat2 g = Mat2::Identity();
  g.noalias() -= (s.lambda / L2) * (p.x * p.x.transpose());
  g /= L2;
  return g;
}

// g^{-1} = Lambda^2 (I + lambda x x^T)
inline Mat2 inverse_metric(const CurvedSpace& s, const TangentPoint& p) {
  const double L2 = 1.0 + s.lambda * p.r2();
  Mat2 gi = Mat2::Identity();
  gi.noalias() += s.lambda * (p.x * p.x.transpose());
  gi *= L2;
  return gi;
}

// d g^{-1} / d x_alpha, alpha = 0,1
inline Mat2 inverse_metric_derivative(const CurvedSpace& s, const TangentPoint& p,
                                      int alpha) {
  const double lam = s.lambda;
  const double L2 = 1.0 + lam * p.r2();
  Mat2 d = (2.0 * lam * p.x[alpha]) *
           (Mat2::Identity() + lam * (p.x * p.x.transpose()));
  Mat2 sym = Mat2::Zero();
  sym.row(alpha) += p.x.transpose();
  sym.col(alpha) += p.x;
  d.noalias() += (L2 * lam) * sym;
  return d;
}

// Embedding Jacobian gauge: a = dq/dx, rows are embedding components.
// Top block delta/Lambda - lambda x x^T / Lambda^3, bottom row -sqrt(lambda) x^T / Lambda^3.
// Satisfies a^T a = g identically.
inline Mat32 vielbein(const CurvedSpace& s, const TangentPoint& p) {
  const double lam = s.lambda;
  const double L = lambda_factor(s, p);
  const double L3 = L * L * L;
  Mat32 a;
  a.topRows<2>() = Mat2::Identity() / L - (lam / L3) * (p.x * p.x.transpose());
  a.row(2) = -(std::sqrt(lam) / L3) * p.x.transpose();
  return a;
}

// d a / d x_alpha (exact derivative of the Jacobian gauge above)
inline Mat32 vielbein_derivative(const CurvedSpace& s, const TangentPoint& p,
                                 int alpha) {
  const double lam = s.lambda;
  const double sq = std::sqrt(lam);
  const double L = lambda_factor(s, p);
  const double L3 = L * L * L, L5 = L3 * L * L;
  const double xa = p.x[alpha];
  Mat32 d;
  for (int j = 0; j < 2; ++j)
    for (int b = 0; b < 2; ++b) {
      double t = -((j == b) ? 1.0 : 0.0) * lam * xa / L3;
      t -= lam * (((j == alpha) ? 1.0 : 0.0) * p.x[b] +
                  p.x[j] * ((b == alpha) ? 1.0 : 0.0)) / L3;
      t += 3.0 * lam * lam * p.x[j] * p.x[b] * xa / L5;
      d(j, b) = t;
    }
  for (int b = 0; b < 2; ++b)
    d(2, b) = -sq * ((b == alpha) ? 1.0 : 0.0) / L3 +
              3.0 * sq * lam * p.x[b] * xa / L5;
  return d;
}

// q = (x1, x2, 1/sqrt(lambda)) / Lambda, |q| = R
inline EmbeddedPoint embed(const CurvedSpace& s, const TangentPoint& p) {
  if (s.lambda <= 0.0)
    throw std::invalid_argument("embed: needs lambda > 0 (flat plane has no sphere)");
  const double L = lambda_factor(s, p);
  EmbeddedPoint e;
  e.q << p.x[0] / L, p.x[1] / L, 1.0 / (std::sqrt(s.lambda) * L);
  return e;
}

// inverse chart map; defined on the open upper hemisphere only
inline TangentPoint project(const CurvedSpace& s, const EmbeddedPoint& e) {
  if (s.lambda <= 0.0) throw std::invalid_argument("project: needs lambda > 0");
  if (e.q[2] <= 0.0)
    throw std::invalid_argument("project: point outside the upper-hemisphere chart");
  const double denom = e.q[2] * std::sqrt(s.lambda);
  return TangentPoint(e.q[0] / denom, e.q[1] / denom);
}

// free-motion curvature term 2 lambda (x.v) v / Lambda^2 (parallel to v:
// the projected free motion stays on a straight chart line)
inline Vec2 geodesic_acceleration(const CurvedSpace& s, const TangentState& st) {
  const double L2 = 1.0 + s.lambda * st.point.r2();
  return (2.0 * s.lambda * st.point.x.dot(st.v) / L2) * st.v;
}

// m (x1 v2 - x2 v1) / Lambda^2: conserved for central potentials
inline double angular_momentum(const CurvedSpace& s, const TangentState& st) {
  const double L2 = 1.0 + s.lambda * st.point.r2();
  return s.mass * (st.point.x[0] * st.v[1] - st.point.x[1] * st.v[0]) / L2;
}

}  // namespace gnomon
