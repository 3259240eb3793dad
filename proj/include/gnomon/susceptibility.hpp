#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnomon/common.hpp"

namespace gnomon {

// Dissipative part of the reservoir susceptibility, Im chi(omega) >= 0 for
// omega >= 0 (passivity). Analytic real parts are kept for the dispersion-
// relation cross checks where closed forms exist.
struct SusceptibilityModel {
  enum class Kind { Lorentz, OhmicDrude, Tabulated };

  Kind kind = Kind::OhmicDrude;
  // Lorentz: strength = omega_p^2, resonance omega0, damping Gamma_d
  double strength = 1.0, resonance = 1.0, damping = 0.1;
  // OhmicDrude: Im chi = eta w / (1 + (w/wc)^2)
  double eta = 0.5, omega_c = 10.0;
  // Tabulated: linear interpolation, zero outside the grid
  std::vector<double> tab_w, tab_im;

  static SusceptibilityModel lorentz(double strength, double resonance,
                                     double damping) {
    if (strength < 0.0 || resonance <= 0.0 || damping <= 0.0)
      throw std::invalid_argument("lorentz: need strength >= 0, resonance > 0, damping > 0");
    SusceptibilityModel m;
    m.kind = Kind::Lorentz;
    m.strength = strength;
    m.resonance = resonance;
    m.damping = damping;
    return m;
  }

  static SusceptibilityModel ohmic_drude(double eta, double omega_c) {
    if (eta < 0.0 || omega_c <= 0.0)
      throw std::invalid_argument("ohmic_drude: need eta >= 0, omega_c > 0");
    SusceptibilityModel m;
    m.kind = Kind::OhmicDrude;
    m.eta = eta;
    m.omega_c = omega_c;
    return m;
  }

  static SusceptibilityModel tabulated(std::vector<double> w, std::vector<double> im) {
    if (w.size() != im.size() || w.size() < 2)
      throw std::invalid_argument("tabulated: need >= 2 matching (omega, im) samples");
    for (size_t i = 0; i < w.size(); ++i) {
      if (w[i] < 0.0) throw std::invalid_argument("tabulated: omega must be >= 0");
      if (i > 0 && w[i] <= w[i - 1])
        throw std::invalid_argument("tabulated: omega grid must be strictly increasing");
      if (im[i] < 0.0)
        throw std::invalid_argument("tabulated: Im chi must be >= 0 (passivity)");
    }
    SusceptibilityModel m;
    m.kind = Kind::Tabulated;
    m.tab_w = std::move(w);
    m.tab_im = std::move(im);
    return m;
  }

  // two columns (omega, Im chi), '#' starts a comment
  static SusceptibilityModel tabulated_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("tabulated_from_file: cannot open " + path);
    std::vector<double> w, im;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      double a, b;
      if (!(ls >> a)) continue;  // blank / comment-only line
      if (!(ls >> b))
        throw std::runtime_error("tabulated_from_file: " + path + ":" +
                                 std::to_string(lineno) + ": need two columns");
      w.push_back(a);
      im.push_back(b);
    }
    return tabulated(std::move(w), std::move(im));
  }

  double im_chi(double w) const {
    if (w < 0.0) throw std::invalid_argument("im_chi: omega must be >= 0");
    switch (kind) {
      case Kind::Lorentz: {
        double d = sqr(sqr(resonance) - sqr(w)) + sqr(damping) * sqr(w);
        return strength * damping * w / d;
      }
      case Kind::OhmicDrude:
        return eta * w / (1.0 + sqr(w / omega_c));
      case Kind::Tabulated: {
        if (w <= tab_w.front() || w >= tab_w.back()) {
          // exactly on an endpoint still counts; outside is zero
          if (w == tab_w.front()) return tab_im.front();
          if (w == tab_w.back()) return tab_im.back();
          return 0.0;
        }
        auto it = std::upper_bound(tab_w.begin(), tab_w.end(), w);
        size_t i = static_cast<size_t>(it - tab_w.begin());
        double f = (w - tab_w[i - 1]) / (tab_w[i] - tab_w[i - 1]);
        return tab_im[i - 1] + f * (tab_im[i] - tab_im[i - 1]);
      }
    }
    return 0.0;
  }

  // mode coupling density: f^2(w) = 2 Im chi(w) / (pi w).
  // This inversion makes the reconstruction identity
  //   integral f^2(w) sin(wt)/w dw = gamma(t)
  // reproduce the Markovian friction limit exactly (Drude: gamma -> eta).
  double coupling_f2(double w) const {
    if (w <= 0.0) throw std::invalid_argument("coupling_f: omega must be > 0");
    return 2.0 * im_chi(w) / (pi * w);
  }

  double coupling_f(double w) const { return std::sqrt(coupling_f2(w)); }

  // characteristic frequency scale of the spectral support
  double spectral_scale() const {
    switch (kind) {
      case Kind::Lorentz:
        return resonance + 3.0 * damping;
      case Kind::OhmicDrude:
        return omega_c;
      case Kind::Tabulated:
        return tab_w.back() / 8.0;
    }
    return 1.0;
  }

  double default_omega_max() const { return 8.0 * spectral_scale(); }

  bool has_analytic_re() const { return kind != Kind::Tabulated; }

  // dispersion-relation partner of im_chi (closed forms)
  double analytic_re(double w) const {
    switch (kind) {
      case Kind::Lorentz: {
        double num = sqr(resonance) - sqr(w);
        return strength * num / (sqr(num) + sqr(damping) * sqr(w));
      }
      case Kind::OhmicDrude:
        return eta * omega_c / (1.0 + sqr(w / omega_c));
      case Kind::Tabulated:
        throw std::invalid_argument("analytic_re: not available for tabulated data");
    }
    return 0.0;
  }
};

}  // namespace gnomon
