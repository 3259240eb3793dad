#pragma once

// Golden-rule transition rates out of a chosen eigenstate, driven by the
// reservoir spectrum Im[gamma], and the finite-time spectral density whose
// bandwidth integral closes onto Gamma * t.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gnomon/common.hpp"
#include "gnomon/higgs.hpp"
#include "gnomon/susceptibility.hpp"

namespace gnomon {

struct OccupationSpec {
  enum class Kind { BoseEinstein, Fixed };
  Kind kind = Kind::BoseEinstein;
  double T = 0.0;      // BoseEinstein
  double value = 0.0;  // Fixed

  static OccupationSpec bose_einstein(double T) {
    if (T < 0) throw std::invalid_argument("OccupationSpec: T must be >= 0");
    return {Kind::BoseEinstein, T, 0.0};
  }
  static OccupationSpec fixed(double value) {
    if (value < 0) throw std::invalid_argument("OccupationSpec: occupation must be >= 0");
    return {Kind::Fixed, 0.0, value};
  }

  double occupation(double omega, Units u = {}) const {
    if (kind == Kind::Fixed) return value;
    if (T <= 0.0 || omega <= 0.0) return 0.0;
    return 1.0 / std::expm1(u.hbar * omega / (u.kB * T));
  }
};

struct LineShape {
  enum class Kind { Gaussian, Lorentzian };
  Kind kind = Kind::Gaussian;
  double sigma = 0.05;

  static LineShape gaussian(double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("LineShape: sigma must be > 0");
    return {Kind::Gaussian, sigma};
  }
  static LineShape lorentzian(double sigma) {
    if (!(sigma > 0)) throw std::invalid_argument("LineShape: sigma must be > 0");
    return {Kind::Lorentzian, sigma};
  }

  // peak value of the normalized broadened line at exact resonance
  double at_resonance() const {
    return kind == Kind::Gaussian ? 1.0 / (sigma * std::sqrt(2.0 * pi)) : 1.0 / (pi * sigma);
  }
};

struct RateRequest {
  int initial = 0;  // eigenstate index
  double lambda = 0.0;
  SusceptibilityModel reservoir;
  OccupationSpec occupation;
  LineShape line_shape;
  double floor = 1e-15;  // rows with both rates below this are dropped
};

struct RateRow {
  int m, n, j;
  double omega_nm;    // (E_n - E_m)/hbar, signed
  double V2, Vp2;     // |<n|A_j|m>|^2, |<n|A'_j|m>|^2
  double weight;      // |V + lambda V'|^2
  double Gamma_abs;   // populated when the transition goes up in energy
  double Gamma_emit;  // populated when it goes down
};

struct RateTable {
  std::vector<RateRow> rows;
  double delta0 = 0.0;  // line-shape factor used for every row
};

inline RateTable golden_rule_rates(const RateRequest& rq, const EigenSolution& eig,
                                   const VielbeinTerms& terms, Units u = {}) {
  const Eigen::Index D = eig.vectors.rows();
  if (rq.initial < 0 || rq.initial >= D)
    throw std::invalid_argument("golden_rule_rates: initial state out of range");
  if (rq.lambda != terms.lambda)
    throw std::invalid_argument("golden_rule_rates: lambda disagrees with the operator set");

  const Eigen::VectorXd& vm = eig.vectors.col(rq.initial);
  std::array<Eigen::VectorXd, 3> sv, spv;  // V_{j,nm} = i (phi_n . sv[j])
  for (int j = 0; j < 3; ++j) {
    sv[std::size_t(j)] = eig.vectors.transpose() * (terms.S[std::size_t(j)] * vm);
    spv[std::size_t(j)] = eig.vectors.transpose() * (terms.Sprime[std::size_t(j)] * vm);
  }

  RateTable out;
  out.delta0 = rq.line_shape.at_resonance();
  const double Em = eig.energies[rq.initial];
  for (Eigen::Index n = 0; n < D; ++n) {
    if (n == rq.initial) continue;
    const double wnm = (eig.energies[n] - Em) / u.hbar;
    for (int j = 0; j < 3; ++j) {
      const double s = sv[std::size_t(j)][n];
      const double sp = spv[std::size_t(j)][n];
      const double w = sqr(s + rq.lambda * sp);
      RateRow row{rq.initial, int(n), j, wnm, sqr(s), sqr(sp), w, 0.0, 0.0};
      if (wnm > 0) {
        row.Gamma_abs = rq.reservoir.im_chi(wnm) / (2.0 * u.hbar) *
                        rq.occupation.occupation(wnm, u) * w * out.delta0;
      } else if (wnm < 0) {
        row.Gamma_emit = rq.reservoir.im_chi(-wnm) / (2.0 * u.hbar) *
                         (rq.occupation.occupation(-wnm, u) + 1.0) * w * out.delta0;
      }
      if (std::max(row.Gamma_abs, row.Gamma_emit) >= rq.floor) out.rows.push_back(row);
    }
  }
  return out;
}

// integrated rate with the line-shape factor divided back out; this is what
// the bandwidth integral of the finite-time density converges to per unit time
inline double integrated_rate(const RateTable& table) {
  double sum = 0.0;
  for (const auto& r : table.rows) sum += r.Gamma_abs + r.Gamma_emit;
  return sum / table.delta0;
}

namespace detail {

struct Transition {
  double omega_nm;
  double weight;
};

inline std::vector<Transition> transition_list(const RateRequest& rq, const EigenSolution& eig,
                                               const VielbeinTerms& terms, Units u) {
  const Eigen::Index D = eig.vectors.rows();
  if (rq.initial < 0 || rq.initial >= D)
    throw std::invalid_argument("time_dependent_probability: initial state out of range");
  if (rq.lambda != terms.lambda)
    throw std::invalid_argument("time_dependent_probability: lambda disagrees with operator set");
  const Eigen::VectorXd& vm = eig.vectors.col(rq.initial);
  std::vector<Transition> list;
  list.reserve(std::size_t(3 * (D - 1)));
  for (int j = 0; j < 3; ++j) {
    const Eigen::VectorXd sv = eig.vectors.transpose() * (terms.S[std::size_t(j)] * vm);
    const Eigen::VectorXd spv = eig.vectors.transpose() * (terms.Sprime[std::size_t(j)] * vm);
    for (Eigen::Index n = 0; n < D; ++n) {
      if (n == rq.initial) continue;
      const double w = sqr(sv[n] + rq.lambda * spv[n]);
      if (w == 0.0) continue;
      list.push_back({(eig.energies[n] - eig.energies[rq.initial]) / u.hbar, w});
    }
  }
  return list;
}

// sin^2(d t/2) / (d/2)^2, the finite-time line factor; -> t^2 at d = 0
inline double sinc2_t(double d, double t) {
  const double h = 0.5 * d * t;
  if (std::abs(h) < 1e-8) return t * t * (1.0 - h * h / 3.0);
  return sqr(std::sin(h) / (0.5 * d));
}

inline double probability_density(const std::vector<Transition>& list, const RateRequest& rq,
                                  double t, double omega, Units u) {
  const double im = rq.reservoir.im_chi(omega);
  if (im == 0.0) return 0.0;
  const double occ = rq.occupation.occupation(omega, u);
  double sum = 0.0;
  for (const auto& tr : list) {
    sum += tr.weight * (occ * sinc2_t(tr.omega_nm - omega, t) +
                        (occ + 1.0) * sinc2_t(tr.omega_nm + omega, t));
  }
  return im / (4.0 * pi * u.hbar) * sum;
}

}  // namespace detail

// spectral density of transition probability at probe frequency omega after
// evolution time t; integrating over omega >= 0 approaches integrated_rate * t
// once t is long compared to the inverse level spacing
inline double time_dependent_probability(const RateRequest& rq, const EigenSolution& eig,
                                         const VielbeinTerms& terms, double t, double omega,
                                         Units u = {}) {
  if (!(t >= 0)) throw std::invalid_argument("time_dependent_probability: t must be >= 0");
  if (!(omega >= 0)) throw std::invalid_argument("time_dependent_probability: omega must be >= 0");
  const auto list = detail::transition_list(rq, eig, terms, u);
  return detail::probability_density(list, rq, t, omega, u);
}

// bulk evaluation over a frequency grid (shares the per-transition setup)
inline std::vector<double> time_dependent_probability(const RateRequest& rq,
                                                      const EigenSolution& eig,
                                                      const VielbeinTerms& terms, double t,
                                                      const std::vector<double>& omega,
                                                      Units u = {}) {
  if (!(t >= 0)) throw std::invalid_argument("time_dependent_probability: t must be >= 0");
  const auto list = detail::transition_list(rq, eig, terms, u);
  std::vector<double> out;
  out.reserve(omega.size());
  for (double w : omega) {
    if (!(w >= 0)) throw std::invalid_argument("time_dependent_probability: omega must be >= 0");
    out.push_back(detail::probability_density(list, rq, t, w, u));
  }
  return out;
}

}  // namespace gnomon
