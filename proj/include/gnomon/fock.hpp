#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gnomon/common.hpp"

namespace gnomon {

// two-mode number basis ordered by total quanta; within a block by the second
// mode's count, so flat index = n(n+1)/2 + n2 with n = n1 + n2
struct FockBasis2D {
  int n_max;

  explicit FockBasis2D(int nmax) : n_max(nmax) {
    if (nmax < 1) throw std::invalid_argument("FockBasis2D: n_max must be >= 1");
    states_.reserve(std::size_t(dimension()));
    for (int n = 0; n <= nmax; ++n)
      for (int n2 = 0; n2 <= n; ++n2) states_.emplace_back(n - n2, n2);
  }

  int dimension() const { return (n_max + 1) * (n_max + 2) / 2; }

  int index(int n1, int n2) const {
    if (n1 < 0 || n2 < 0 || n1 + n2 > n_max)
      throw std::invalid_argument("FockBasis2D: quanta outside the basis");
    const int n = n1 + n2;
    return n * (n + 1) / 2 + n2;
  }

  std::pair<int, int> quanta(int idx) const {
    if (idx < 0 || idx >= dimension())
      throw std::invalid_argument("FockBasis2D: index out of range");
    return states_[std::size_t(idx)];
  }

  int total(int idx) const {
    auto [n1, n2] = quanta(idx);
    return n1 + n2;
  }

 private:
  std::vector<std::pair<int, int>> states_;
};

namespace detail {

// x_axis = scale_x (a + a^dag)/sqrt(2): real symmetric
inline Eigen::MatrixXd position_matrix(const FockBasis2D& b, int axis, double sx) {
  const int D = b.dimension();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    auto [n1, n2] = b.quanta(i);
    if (n1 + n2 + 1 > b.n_max) continue;
    const int na = axis == 0 ? n1 : n2;
    const int jdx = axis == 0 ? b.index(n1 + 1, n2) : b.index(n1, n2 + 1);
    const double v = sx * std::sqrt(0.5 * double(na + 1));
    M(jdx, i) = v;
    M(i, jdx) = v;
  }
  return M;
}

// p_axis = i B with B = scale_p (a^dag - a)/sqrt(2): real antisymmetric
inline Eigen::MatrixXd momentum_b_matrix(const FockBasis2D& b, int axis, double sp) {
  const int D = b.dimension();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    auto [n1, n2] = b.quanta(i);
    if (n1 + n2 + 1 > b.n_max) continue;
    const int na = axis == 0 ? n1 : n2;
    const int jdx = axis == 0 ? b.index(n1 + 1, n2) : b.index(n1, n2 + 1);
    const double v = sp * std::sqrt(0.5 * double(na + 1));
    M(jdx, i) = v;
    M(i, jdx) = -v;
  }
  return M;
}

}  // namespace detail

}  // namespace gnomon
