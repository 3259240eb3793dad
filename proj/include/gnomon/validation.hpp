#pragma once

// Self-contained release gate: every analytic identity the library is built
// on, re-derived and checked at runtime.  Each check is independent and
// reports one PASS/FAIL line; exceptions count as failures.

#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gnomon/bath.hpp"
#include "gnomon/dynamics.hpp"
#include "gnomon/geometry.hpp"
#include "gnomon/higgs.hpp"
#include "gnomon/kernel.hpp"
#include "gnomon/kramers_kronig.hpp"
#include "gnomon/noise.hpp"
#include "gnomon/rates.hpp"
#include "gnomon/rng.hpp"
#include "gnomon/susceptibility.hpp"

namespace gnomon {

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct ValidationOptions {
  // test hook: lets a harness corrupt the tabulated kernel that the
  // fluctuation-dissipation consistency check compares against
  std::function<void(MemoryKernel&)> kernel_mutator;
};

namespace valdetail {

template <class F>
void check(ValidationReport& rep, const std::string& name, F&& fn) {
  ValidationCheck c;
  c.name = name;
  try {
    auto [ok, detail] = fn();
    c.pass = ok;
    c.detail = detail;
  } catch (const std::exception& e) {
    c.pass = false;
    c.detail = std::string("exception: ") + e.what();
  }
  rep.checks.push_back(std::move(c));
}

inline std::string scalar(const char* label, double v) {
  std::ostringstream os;
  os << label << " = " << v;
  return os.str();
}

}  // namespace valdetail

inline ValidationReport run_validation(const ValidationOptions& opt = {}) {
  using valdetail::check;
  using valdetail::scalar;
  using R = std::pair<bool, std::string>;
  ValidationReport rep;

  check(rep, "geometry-metric-inverse", []() -> R {
    RngStream rng(99, {7});
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      CurvedSpace sp{4.0 * rng.uniform(3 * i), 1.0};
      TangentPoint p(6.0 * rng.uniform(3 * i + 1) - 3.0, 6.0 * rng.uniform(3 * i + 2) - 3.0);
      Mat2 gg = metric(sp, p) * inverse_metric(sp, p) - Mat2::Identity();
      worst = std::max(worst, gg.cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, scalar("max |g g^-1 - I|", worst)};
  });

  check(rep, "geometry-frame-factorization", []() -> R {
    RngStream rng(99, {8});
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
      CurvedSpace sp{4.0 * rng.uniform(3 * i), 1.0};
      TangentPoint p(6.0 * rng.uniform(3 * i + 1) - 3.0, 6.0 * rng.uniform(3 * i + 2) - 3.0);
      Mat32 a = vielbein(sp, p);
      worst = std::max(worst, (a.transpose() * a - metric(sp, p)).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-12, scalar("max |a^T a - g|", worst)};
  });

  check(rep, "geometry-rectilinear-projection", []() -> R {
    CurvedSpace sp{1.0, 1.0};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 1200;
    cfg.stride = 25;
    Trajectory tr = run(sp, Potential::free(), cfg, {TangentPoint(0, 0), Vec2(1, 0)});
    double cross = 0.0, law = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      cross = std::max(cross, std::abs(tr.x[i][1]));
      const double expect = 1.0 + sqr(tr.x[i][0]);
      law = std::max(law, std::abs(std::abs(tr.v[i][0]) - expect) / expect);
    }
    const bool ok = cross <= 1e-9 && law <= 1e-5;
    return {ok, scalar("max |x2|", cross) + ", " + scalar("speed-law rel err", law)};
  });

  check(rep, "kernel-exponential-closed-form", []() -> R {
    const double eta = 0.5, wc = 10.0;
    auto k = kernel_from_model(SusceptibilityModel::ohmic_drude(eta, wc), 0.01, 6.0,
                               {.omega_max = 32.0 * wc});
    double worst = 0.0;
    for (std::size_t i = 5; i < k.gamma.size(); i += 17) {
      const double t = double(i) * k.dt_kernel;
      worst = std::max(worst, std::abs(k.gamma[i] - eta * (1.0 - std::exp(-wc * t))));
    }
    return {worst <= 1e-3 * eta, scalar("sup |gamma - eta(1-exp(-wc t))|", worst)};
  });

  check(rep, "kernel-damped-cosine-closed-form", []() -> R {
    const double wp2 = 1.0, w0 = 1.0, Gd = 0.1;
    auto k = kernel_from_model(SusceptibilityModel::lorentz(wp2, w0, Gd), 0.01, 8.0);
    const double w1 = std::sqrt(sqr(w0) - sqr(Gd) / 4.0);
    const double A = (sqr(w0) - sqr(Gd) / 2.0) / w1;
    double worst = 0.0;
    for (std::size_t i = 0; i < k.gamma.size(); i += 13) {
      const double t = double(i) * k.dt_kernel;
      const double want = wp2 / sqr(sqr(w0)) *
                          (Gd - std::exp(-0.5 * Gd * t) * (Gd * std::cos(w1 * t) - A * std::sin(w1 * t)));
      worst = std::max(worst, std::abs(k.gamma[i] - want));
    }
    return {worst <= 1e-5, scalar("sup table-vs-closed-form", worst)};
  });

  check(rep, "dispersion-kk-closure", []() -> R {
    auto m = SusceptibilityModel::lorentz(1.0, 1.0, 0.1);
    std::vector<double> w, im;
    for (double x = 0.0; x <= 10.4; x += 0.002) {
      w.push_back(x);
      im.push_back(m.im_chi(x));
    }
    auto kk = kramers_kronig_re(w, im);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] < 0.1 || w[i] > 4.0 || (w[i] > 0.9 && w[i] < 1.1)) continue;
      worst = std::max(worst, std::abs(kk.re[i] - m.analytic_re(w[i])) /
                                  std::max(1e-3, std::abs(m.analytic_re(w[i]))));
    }
    return {worst <= 0.01, scalar("band rel err", worst)};
  });

  check(rep, "dispersion-kk-static-limit", []() -> R {
    auto m = SusceptibilityModel::lorentz(1.0, 1.0, 0.1);
    std::vector<double> w, im;
    for (double x = 0.0; x <= 10.4; x += 0.002) {
      w.push_back(x);
      im.push_back(m.im_chi(x));
    }
    auto kk = kramers_kronig_re(w, im);
    const double err = std::abs(kk.re[0] - m.analytic_re(0.0)) / std::abs(m.analytic_re(0.0));
    return {err <= 1e-3, scalar("static-limit rel err", err)};
  });

  check(rep, "bath-kernel-reconstruction", []() -> R {
    auto b = discretize_bath(SusceptibilityModel::ohmic_drude(0.5, 10.0), 400);
    return {b.reconstruction_error >= 0 && b.reconstruction_error <= 1e-3,
            scalar("rel sup err", b.reconstruction_error)};
  });

  check(rep, "fdt-noise-kernel-consistency", [&opt]() -> R {
    // stationary noise covariance K and friction kernel gamma from one
    // susceptibility must satisfy K(0) - K(tau) = integral_0^tau gamma
    auto m = SusceptibilityModel::ohmic_drude(0.5, 10.0);
    auto b = discretize_bath(m, 300, 80.0, {.validate = false});
    MemoryKernel k = kernel_from_model(m, 0.01, 5.0);
    if (opt.kernel_mutator) opt.kernel_mutator(k);
    const double K0 = mode_sum_K(b, 0.0);
    double worst = 0.0;
    double integral = 0.0;
    std::size_t i = 1;
    for (double tau = k.dt_kernel; tau <= 5.0 + 1e-12; tau += k.dt_kernel, ++i) {
      integral += 0.5 * k.dt_kernel * (k.gamma[i - 1] + k.gamma[i]);
      if (i % 50 == 0)
        worst = std::max(worst, std::abs(K0 - mode_sum_K(b, tau) - integral) / K0);
    }
    return {worst <= 5e-3, scalar("rel defect", worst)};
  });

  check(rep, "noise-covariance-montecarlo", []() -> R {
    CurvedSpace sp{0.5, 1.0};
    TangentPoint pt(0.3, -0.2);
    const double T = 1.0;
    auto b = discretize_bath(SusceptibilityModel::ohmic_drude(0.5, 10.0), 250, 80.0,
                             {.validate = false});
    const int M = 1500;
    const Mat2 g = metric(sp, pt);
    double worst_sigmas = 0.0;
    for (double tau : {0.0, 1.0}) {
      Eigen::Matrix2d mean = Eigen::Matrix2d::Zero(), m2 = Eigen::Matrix2d::Zero();
      for (int r = 0; r < M; ++r) {
        BathState st = sample_thermal(b, T, 4242, std::uint64_t(r));
        const Vec2 R0 = noise_R(sp, pt, b, st, 0.0);
        const Vec2 Rt = noise_R(sp, pt, b, st, tau);
        for (int a = 0; a < 2; ++a)
          for (int be = 0; be < 2; ++be) {
            const double prod = R0[a] * Rt[be];
            mean(a, be) += prod;
            m2(a, be) += prod * prod;
          }
      }
      mean /= double(M);
      const double K = mode_sum_K(b, tau);
      for (int a = 0; a < 2; ++a)
        for (int be = 0; be < 2; ++be) {
          const double var = m2(a, be) / double(M) - sqr(mean(a, be));
          const double se = std::sqrt(std::max(var, 1e-30) / double(M));
          worst_sigmas = std::max(worst_sigmas, std::abs(mean(a, be) - g(a, be) * T * K) / se);
        }
    }
    return {worst_sigmas <= 4.0, scalar("worst deviation [stderr units]", worst_sigmas)};
  });

  check(rep, "energy-conservation-conservative", []() -> R {
    CurvedSpace sp{0.5, 1.3};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 2000;
    cfg.stride = 100;
    Trajectory tr = run(sp, Potential::harmonic(1.0), cfg,
                        {TangentPoint(0.4, 0.1), Vec2(-0.1, 0.3)});
    double drift = 0.0;
    for (double e : tr.E_sys) drift = std::max(drift, std::abs(e - tr.E_sys.front()));
    drift /= std::abs(tr.E_sys.front());
    return {drift <= 1e-6, scalar("rel drift", drift)};  // bounded O(dt^2) wobble at dt = 1e-3
  });

  check(rep, "energy-conservation-microscopic", []() -> R {
    CurvedSpace sp{0.3, 1.0};
    auto b = discretize_bath(SusceptibilityModel::ohmic_drude(0.3, 5.0), 150, 40.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 2000;
    cfg.stride = 100;
    cfg.scheme = Scheme::RouteB;
    cfg.T = 0.3;
    ReservoirContext ctx;
    ctx.bath = &b;
    Trajectory tr = run(sp, Potential::harmonic(1.0), cfg,
                        {TangentPoint(0.4, 0.1), Vec2(-0.1, 0.3)}, ctx);
    double drift = 0.0;
    for (double e : tr.E_tot)
      drift = std::max(drift, std::abs(e - tr.E_tot.front()) /
                                  std::max(1.0, std::abs(tr.E_tot.front())));
    return {drift <= 1e-6, scalar("rel drift", drift)};
  });

  check(rep, "limit-dead-kernel", []() -> R {
    CurvedSpace sp{0.6, 1.0};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 500;
    auto dead = SusceptibilityModel::tabulated({1.0, 2.0}, {0.0, 0.0});
    MemoryKernel k = kernel_from_model(dead, 0.01, cfg.dt * double(cfg.steps) + 1.0,
                                       {.omega_max = 4.0});
    ReservoirContext ctx;
    ctx.kernel = &k;
    cfg.scheme = Scheme::RouteA;
    Trajectory a = run(sp, Potential::harmonic(1.0), cfg, {TangentPoint(0.5, 0.1), Vec2(-0.2, 0.3)}, ctx);
    cfg.scheme = Scheme::Conservative;
    Trajectory c = run(sp, Potential::harmonic(1.0), cfg, {TangentPoint(0.5, 0.1), Vec2(-0.2, 0.3)});
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, (a.x[i] - c.x[i]).cwiseAbs().maxCoeff());
    return {worst <= 1e-12, scalar("max |x_A - x_cons|", worst)};
  });

  check(rep, "limit-flat-chart", []() -> R {
    CurvedSpace sp{0.0, 1.0};
    const double dt = 1e-3, kspring = sqr(1.5);
    Potential pot = Potential::harmonic(1.5);  // steppers keep a reference
    ConservativeStepper st(sp, pot, {TangentPoint(0.8, -0.2), Vec2(0.1, 0.4)}, dt);
    Vec2 x(0.8, -0.2), p(0.1, 0.4);
    for (int n = 0; n < 500; ++n) {
      st.step();
      Vec2 ph = p - 0.5 * dt * kspring * x;
      x = x + dt * ph;
      p = ph - 0.5 * dt * kspring * x;
    }
    const double worst = std::max((st.state().point.x - x).cwiseAbs().maxCoeff(),
                                  (st.state().v - p).cwiseAbs().maxCoeff());
    return {worst <= 1e-13, scalar("max |curved(0) - leapfrog|", worst)};
  });

  check(rep, "spectrum-flat-ladder", []() -> R {
    auto eig = eigensolve(build_higgs_hamiltonian(FockBasis2D(16), 0.0, Potential::harmonic(1.0)));
    const double want[6] = {1, 2, 2, 3, 3, 3};
    double worst = 0.0;
    for (int i = 0; i < 6; ++i) worst = std::max(worst, std::abs(eig.energies[i] - want[i]));
    return {worst <= 1e-10, scalar("max |E - (n+1)|", worst)};
  });

  check(rep, "spectrum-curved-degeneracy", []() -> R {
    auto eig = eigensolve(build_higgs_hamiltonian(FockBasis2D(24), 0.05, Potential::harmonic(1.0)));
    double worst = 0.0;
    int idx = 0;
    for (int g = 0; g < 4; ++g) {
      double lo = 1e300, hi = -1e300;
      while (idx < int(eig.multiplet.size()) && eig.multiplet[std::size_t(idx)] == g) {
        lo = std::min(lo, eig.energies[idx]);
        hi = std::max(hi, eig.energies[idx]);
        ++idx;
      }
      worst = std::max(worst, hi - lo);
    }
    return {worst <= 1e-6, scalar("max multiplet spread", worst)};
  });

  check(rep, "rates-parity-selection", []() -> R {
    FockBasis2D b(12);
    const double lam = 0.05;
    auto eig = eigensolve(build_higgs_hamiltonian(b, lam, Potential::harmonic(1.0)));
    auto terms = vielbein_operator_terms(b, lam);
    auto parity = [&b, &eig](int i) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < eig.vectors.rows(); ++r)
        s += (b.total(int(r)) % 2 ? -1.0 : 1.0) * sqr(eig.vectors(r, i));
      return s > 0 ? 1 : -1;
    };
    double allowed = 0.0, forbidden = 0.0;
    for (int m = 0; m < 6; ++m)
      for (int n = 0; n < 28; ++n) {
        auto me = matrix_elements(eig, terms, m, n);
        const bool same = parity(m) == parity(n);
        const double in = std::max(std::abs(me.V[0]), std::abs(me.V[1]));
        const double out = std::abs(me.V[2]);
        allowed = std::max({allowed, same ? out : in});
        forbidden = std::max({forbidden, same ? in : out});
      }
    return {forbidden <= 1e-10 * allowed,
            scalar("forbidden/allowed", forbidden / std::max(allowed, 1e-300))};
  });

  check(rep, "rates-occupation-scaling", []() -> R {
    FockBasis2D b(12);
    const double lam = 0.05;
    auto eig = eigensolve(build_higgs_hamiltonian(b, lam, Potential::harmonic(1.0)));
    auto terms = vielbein_operator_terms(b, lam);
    RateRequest rq;
    rq.initial = 1;
    rq.lambda = lam;
    rq.reservoir = SusceptibilityModel::ohmic_drude(0.5, 10.0);
    rq.line_shape = LineShape::gaussian(0.05);
    rq.occupation = OccupationSpec::fixed(1.0);
    auto t1 = golden_rule_rates(rq, eig, terms);
    rq.occupation = OccupationSpec::fixed(2.0);
    auto t2 = golden_rule_rates(rq, eig, terms);
    rq.occupation = OccupationSpec::fixed(0.0);
    auto t0 = golden_rule_rates(rq, eig, terms);
    double worst = 0.0;
    bool spontaneous = false;
    for (std::size_t i = 0; i < t1.rows.size(); ++i)
      if (t1.rows[i].Gamma_abs > 0)
        worst = std::max(worst, std::abs(t2.rows[i].Gamma_abs / t1.rows[i].Gamma_abs - 2.0));
    for (const auto& r : t0.rows) {
      if (r.Gamma_abs != 0.0) worst = 1e300;
      spontaneous = spontaneous || r.Gamma_emit > 0;
    }
    return {worst <= 1e-12 && spontaneous, scalar("max |ratio - 2|", worst)};
  });

  check(rep, "rates-bandwidth-closure", []() -> R {
    FockBasis2D b(10);
    auto eig = eigensolve(build_higgs_hamiltonian(b, 0.0, Potential::harmonic(1.0)));
    auto terms = vielbein_operator_terms(b, 0.0);
    RateRequest rq;
    rq.initial = 0;
    rq.lambda = 0.0;
    rq.reservoir = SusceptibilityModel::ohmic_drude(1.0, 5.0);
    rq.occupation = OccupationSpec::fixed(2.0);
    rq.line_shape = LineShape::gaussian(0.05);
    const double t = 200.0;
    std::vector<double> w;
    for (double x = 1e-3; x <= 6.0; x += 1e-3) w.push_back(x);
    auto dens = time_dependent_probability(rq, eig, terms, t, w);
    double integral = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i)
      integral += 0.5 * (dens[i] + dens[i - 1]) * (w[i] - w[i - 1]);
    const double want = integrated_rate(golden_rule_rates(rq, eig, terms)) * t;
    const double err = std::abs(integral - want) / want;
    return {err <= 0.02, scalar("closure rel err", err)};
  });

  return rep;
}

}  // namespace gnomon
