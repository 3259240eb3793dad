#pragma once

// Time integration of the particle-on-a-sphere with a dissipative environment.
// Three schemes share one Hamiltonian core (with shifted momentum P = p - R):
//   conservative : generalized leapfrog (Lobatto IIIA-IIIB pair) on (x, p)
//   route A      : same core + trapezoidal memory-friction and noise impulses
//   route B      : same core + explicitly integrated bath modes (exact mode
//                  rotations Strang-split around the particle update)
// With the coupling identically zero the three reduce to the same arithmetic,
// so the degenerate limits agree to round-off rather than to truncation error.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gnomon/bath.hpp"
#include "gnomon/common.hpp"
#include "gnomon/geometry.hpp"
#include "gnomon/kernel.hpp"
#include "gnomon/noise.hpp"
#include "gnomon/potential.hpp"

namespace gnomon {

inline constexpr double kDefaultChartBound = 1e3;

enum class Scheme { Conservative, RouteA, RouteB };

struct SimConfig {
  double dt = 1e-3;
  std::int64_t steps = 1000;
  std::uint64_t seed = 12345;
  Scheme scheme = Scheme::Conservative;
  double t_kernel = -1.0;       // route A memory horizon; defaults to steps*dt
  std::int64_t stride = 1;      // output every this many steps
  double T = 0.0;               // reservoir temperature
  double memory_window = -1.0;  // route A convolution truncation; off when < 0
  double lambda_factor_max = kDefaultChartBound;
  double instability_factor = 10.0;
  std::uint64_t replica = 0;
  Units units{};
};

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec2> x, v;
  std::vector<double> E_sys;
  std::vector<double> E_tot;  // populated for route B only
  std::vector<double> L;
  SimConfig config;
  int bath_modes = 0;
  double bath_omega_max = 0.0;
  double bath_reconstruction_error = -1.0;
  std::size_t size() const { return t.size(); }
};

namespace detail {

inline void check_chart(const CurvedSpace& sp, const Vec2& x, double bound,
                        std::int64_t step) {
  if (!(1.0 + sp.lambda * x.squaredNorm() <= bound * bound)) {
    std::ostringstream m;
    m << "chart overflow at step " << step << ": Lambda factor exceeds " << bound;
    throw ChartOverflowError(m.str());
  }
}

// dH/dp = g^{-1} P / m for an already shifted momentum
inline Vec2 hp_shifted(const CurvedSpace& sp, const Vec2& x, const Vec2& P) {
  const double L2 = 1.0 + sp.lambda * x.squaredNorm();
  return L2 * (P + sp.lambda * x.dot(P) * x) / sp.mass;
}

// position gradient of P.g^{-1}(x).P/(2m) + V(r) holding the shift fixed
inline Vec2 hx_shifted(const CurvedSpace& sp, const Potential& pot, const Vec2& x,
                       const Vec2& P) {
  const double r2 = x.squaredNorm();
  const double L2 = 1.0 + sp.lambda * r2;
  const double xP = x.dot(P);
  Vec2 out = (sp.lambda / sp.mass) *
             ((P.squaredNorm() + sp.lambda * xP * xP) * x + L2 * xP * P);
  out += pot.dVdr_over_r(std::sqrt(r2), sp.mass) * x;
  return out;
}

template <typename F>
inline Vec2 fixed_point(Vec2 z, F&& f, std::int64_t step, const char* what) {
  for (int it = 0; it < 100; ++it) {
    Vec2 zn = f(z);
    if ((zn - z).cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + zn.cwiseAbs().maxCoeff()))
      return zn;
    z = zn;
  }
  std::ostringstream m;
  m << "implicit " << what << " update failed to converge at step " << step;
  throw InstabilityError(m.str());
}

// Hamiltonian derivatives with the bath contraction Y3 = sum_k c_k X_k frozen;
// Y3 = 0 exactly reproduces the uncoupled arithmetic bit for bit
struct StepWork {
  const CurvedSpace& sp;
  const Potential& pot;
  Eigen::Vector3d Y3;

  Vec2 shift(const Vec2& x) const {
    TangentPoint tp{x};
    return vielbein(sp, tp).transpose() * Y3;
  }
  Vec2 hp(const Vec2& x, const Vec2& p) const {
    return hp_shifted(sp, x, Vec2(p - shift(x)));
  }
  Vec2 hx(const Vec2& x, const Vec2& p) const {
    TangentPoint tp{x};
    Vec2 P = p - shift(x);
    Vec2 out = hx_shifted(sp, pot, x, P);
    Vec2 v = hp_shifted(sp, x, P);
    for (int a = 0; a < 2; ++a)
      out[a] -= (vielbein_derivative(sp, tp, a).transpose() * Y3).dot(v);
    return out;
  }
};

struct CoreStep {
  Vec2 x1, phalf, p1;
};

// Lobatto IIIA-IIIB generalized leapfrog, second order, time reversible
inline CoreStep leapfrog_step(const StepWork& w, const Vec2& x0, const Vec2& p0,
                              double dt, std::int64_t step) {
  Vec2 ph = fixed_point(
      p0, [&](const Vec2& z) { return Vec2(p0 - 0.5 * dt * w.hx(x0, z)); }, step,
      "momentum");
  Vec2 hp0 = w.hp(x0, ph);
  Vec2 x1 = fixed_point(
      Vec2(x0 + dt * hp0),
      [&](const Vec2& z) { return Vec2(x0 + 0.5 * dt * (hp0 + w.hp(z, ph))); }, step,
      "position");
  Vec2 p1 = ph - 0.5 * dt * w.hx(x1, ph);
  return {x1, ph, p1};
}

}  // namespace detail

// acceleration of the undamped equation of motion (memory and noise absent)
inline Vec2 conservative_rhs(const CurvedSpace& sp, const Potential& pot,
                             const TangentState& s) {
  detail::check_chart(sp, s.point.x, kDefaultChartBound, -1);
  const double L2 = 1.0 + sp.lambda * s.point.r2();
  return geodesic_acceleration(sp, s) -
         (L2 * L2 / sp.mass) *
             pot.dVdr_over_r(std::sqrt(s.point.r2()), sp.mass) * s.point.x;
}

inline double energy_system(const CurvedSpace& sp, const Potential& pot,
                            const TangentState& s) {
  return 0.5 * sp.mass * s.v.dot(metric(sp, s.point) * s.v) +
         pot.V(std::sqrt(s.point.r2()), sp.mass);
}

inline double energy_total_microscopic(const CurvedSpace& sp, const Potential& pot,
                                       const BathDiscretization& b,
                                       const TangentState& s, const BathState& bs) {
  const double ebath =
      0.5 * (bs.P.array().square().sum() +
             (bs.X.array().colwise() * b.omega.array()).square().sum());
  return energy_system(sp, pot, s) + ebath;
}

class ConservativeStepper {
 public:
  ConservativeStepper(const CurvedSpace& sp, const Potential& pot,
                      const TangentState& s0, double dt,
                      double chart_bound = kDefaultChartBound)
      : sp_(sp), pot_(pot), dt_(dt), bound_(chart_bound), x_(s0.point.x) {
    p_ = sp.mass * (metric(sp, s0.point) * s0.v);
  }

  void step() {
    detail::check_chart(sp_, x_, bound_, n_);
    detail::StepWork w{sp_, pot_, Eigen::Vector3d::Zero()};
    auto r = detail::leapfrog_step(w, x_, p_, dt_, n_);
    x_ = r.x1;
    p_ = r.p1;
    ++n_;
  }

  TangentState state() const {
    TangentPoint tp{x_};
    return {tp, Vec2(inverse_metric(sp_, tp) * p_ / sp_.mass)};
  }
  double time() const { return double(n_) * dt_; }

 private:
  const CurvedSpace& sp_;
  const Potential& pot_;
  double dt_, bound_;
  Vec2 x_, p_;
  std::int64_t n_ = 0;
};

// Langevin route: the integro-differential equation with trapezoidal memory.
// Friction and noise accelerations enter as canonical impulses (dt/2) m g a at
// both step endpoints; the closing endpoint is implicit in the new velocity
// and solved by fixed point (the gamma_dot(0) self-term is tiny).
class RouteAStepper {
 public:
  RouteAStepper(const CurvedSpace& sp, const Potential& pot,
                const MemoryKernel& kernel, const BathDiscretization* bath,
                const BathState* bs0, const TangentState& s0, const SimConfig& cfg)
      : sp_(sp),
        pot_(pot),
        dt_(cfg.dt),
        bound_(cfg.lambda_factor_max),
        window_(cfg.memory_window),
        steps_(cfg.steps),
        x_(s0.point.x) {
    p_ = sp.mass * (metric(sp, s0.point) * s0.v);
    std::int64_t gmax = steps_;
    if (window_ >= 0.0)
      gmax = std::min<std::int64_t>(steps_, std::int64_t(window_ / dt_) + 1);
    gd_.assign(std::size_t(steps_) + 1, 0.0);
    for (std::int64_t i = 0; i <= gmax; ++i)
      gd_[std::size_t(i)] = kernel.gamma_dot_at(double(i) * dt_);
    hv1_.reserve(std::size_t(steps_) + 1);
    hv2_.reserve(std::size_t(steps_) + 1);
    Vec2 v0 = s0.v;
    hv1_.push_back(v0[0]);
    hv2_.push_back(v0[1]);
    if (bath && bs0) synth_.emplace(*bath, *bs0, cfg.dt);
  }

  void step() {
    if (n_ >= steps_)
      throw std::runtime_error(
          "route A history exhausted: stepped past the configured horizon");
    detail::check_chart(sp_, x_, bound_, n_);
    TangentPoint tp0{x_};
    const Mat2 g0 = metric(sp_, tp0);

    // opening non-conservative impulse at t_n (velocity there is known)
    Vec2 I0 = memory_at(n_, hv1_[std::size_t(n_)], hv2_[std::size_t(n_)]);
    Vec2 imp = -(g0 * I0);
    if (synth_) imp -= vielbein(sp_, tp0).transpose() * synth_->ydot();
    Vec2 p = p_ + 0.5 * dt_ * imp;

    detail::StepWork w{sp_, pot_, Eigen::Vector3d::Zero()};
    auto r = detail::leapfrog_step(w, x_, p, dt_, n_);

    // closing impulse at t_{n+1}: memory needs the yet-unknown new velocity
    TangentPoint tp1{r.x1};
    const Mat2 g1 = metric(sp_, tp1);
    const Mat2 gi1 = inverse_metric(sp_, tp1);
    if (synth_) synth_->advance();
    Vec2 noise1 = Vec2::Zero();
    if (synth_) noise1 = -(vielbein(sp_, tp1).transpose() * synth_->ydot());
    const Vec2 S = memory_known(n_ + 1);
    const double half_gd0 = 0.5 * dt_ * gd_[0];
    Vec2 p1 = r.p1;
    for (int it = 0; it < 100; ++it) {
      Vec2 vhat = gi1 * p1 / sp_.mass;
      Vec2 I1 = S + half_gd0 * vhat;
      Vec2 cand = r.p1 + 0.5 * dt_ * (-(g1 * I1) + noise1);
      bool done = (cand - p1).cwiseAbs().maxCoeff() <=
                  1e-15 * (1.0 + cand.cwiseAbs().maxCoeff());
      p1 = cand;
      if (done) break;
      if (it == 99)
        throw InstabilityError("implicit memory endpoint failed to converge");
    }
    x_ = r.x1;
    p_ = p1;
    ++n_;
    Vec2 v1 = gi1 * p1 / sp_.mass;
    hv1_.push_back(v1[0]);
    hv2_.push_back(v1[1]);
  }

  TangentState state() const {
    TangentPoint tp{x_};
    return {tp, Vec2(inverse_metric(sp_, tp) * p_ / sp_.mass)};
  }
  double time() const { return double(n_) * dt_; }

 private:
  // trapezoid of gamma_dot(t_n - t') v(t') over stored history, optionally
  // truncated to the most recent memory window
  Vec2 memory_at(std::int64_t n, double vlast1, double vlast2) const {
    if (n == 0) return Vec2::Zero();
    std::int64_t jmin = 0;
    if (window_ >= 0.0)
      jmin = std::max<std::int64_t>(0, n - std::int64_t(window_ / dt_));
    if (jmin >= n) return Vec2(0.5 * dt_ * gd_[0] * vlast1, 0.5 * dt_ * gd_[0] * vlast2);
    double s1 = 0.5 * (gd_[std::size_t(n - jmin)] * hv1_[std::size_t(jmin)] +
                       gd_[0] * vlast1);
    double s2 = 0.5 * (gd_[std::size_t(n - jmin)] * hv2_[std::size_t(jmin)] +
                       gd_[0] * vlast2);
    const double* g = gd_.data();
    const double* a1 = hv1_.data();
    const double* a2 = hv2_.data();
    for (std::int64_t j = jmin + 1; j < n; ++j) {
      s1 += g[n - j] * a1[j];
      s2 += g[n - j] * a2[j];
    }
    return dt_ * Vec2(s1, s2);
  }

  // same sum up to t_{n+1} but without the (implicit) newest velocity term
  Vec2 memory_known(std::int64_t np1) const {
    std::int64_t jmin = 0;
    if (window_ >= 0.0)
      jmin = std::max<std::int64_t>(0, np1 - std::int64_t(window_ / dt_));
    if (jmin >= np1) return Vec2::Zero();
    double s1 = 0.5 * gd_[std::size_t(np1 - jmin)] * hv1_[std::size_t(jmin)];
    double s2 = 0.5 * gd_[std::size_t(np1 - jmin)] * hv2_[std::size_t(jmin)];
    for (std::int64_t j = jmin + 1; j < np1; ++j) {
      s1 += gd_[std::size_t(np1 - j)] * hv1_[std::size_t(j)];
      s2 += gd_[std::size_t(np1 - j)] * hv2_[std::size_t(j)];
    }
    return dt_ * Vec2(s1, s2);
  }

  const CurvedSpace& sp_;
  const Potential& pot_;
  double dt_, bound_, window_;
  std::int64_t steps_, n_ = 0;
  Vec2 x_, p_;
  std::vector<double> gd_, hv1_, hv2_;
  std::optional<NoiseSynth> synth_;
};

// Microscopic route: exact half rotations of every bath oscillator around the
// particle leapfrog; bath momenta receive the reaction impulses of the
// particle drift at both endpoints.
class RouteBStepper {
 public:
  RouteBStepper(const CurvedSpace& sp, const Potential& pot,
                const BathDiscretization& bath, const TangentState& s0,
                const BathState& bs0, double dt,
                double chart_bound = kDefaultChartBound)
      : sp_(sp),
        pot_(pot),
        b_(bath),
        dt_(dt),
        bound_(chart_bound),
        x_(s0.point.x),
        X_(bs0.X),
        P_(bs0.P) {
    ch_ = (b_.omega.array() * (0.5 * dt)).cos();
    sh_ = (b_.omega.array() * (0.5 * dt)).sin();
    TangentPoint tp{x_};
    p_ = sp.mass * (metric(sp, tp) * s0.v) +
         vielbein(sp, tp).transpose() * (X_.transpose() * b_.c);
  }

  void step() {
    detail::check_chart(sp_, x_, bound_, n_);
    rotate_half();
    detail::StepWork w{sp_, pot_, X_.transpose() * b_.c};
    auto r = detail::leapfrog_step(w, x_, p_, dt_, n_);
    bath_kick(w, x_, r.phalf);
    bath_kick(w, r.x1, r.phalf);
    x_ = r.x1;
    p_ = r.p1;
    rotate_half();
    ++n_;
  }

  TangentState state() const {
    TangentPoint tp{x_};
    Vec2 P = p_ - vielbein(sp_, tp).transpose() * (X_.transpose() * b_.c);
    return {tp, Vec2(inverse_metric(sp_, tp) * P / sp_.mass)};
  }
  BathState bath_state() const { return {X_, P_}; }
  double time() const { return double(n_) * dt_; }

  double energy_total() const {
    return energy_total_microscopic(sp_, pot_, b_, state(), {X_, P_});
  }

 private:
  void rotate_half() {
    for (int j = 0; j < 3; ++j) {
      Eigen::ArrayXd xj = X_.col(j).array();
      Eigen::ArrayXd pj = P_.col(j).array();
      X_.col(j) = (xj * ch_ + pj / b_.omega.array() * sh_).matrix();
      P_.col(j) = (pj * ch_ - b_.omega.array() * xj * sh_).matrix();
    }
  }

  void bath_kick(const detail::StepWork& w, const Vec2& x, const Vec2& ph) {
    TangentPoint tp{x};
    Eigen::Vector3d s = vielbein(sp_, tp) * w.hp(x, ph);
    P_.noalias() += (0.5 * dt_) * b_.c * s.transpose();
  }

  const CurvedSpace& sp_;
  const Potential& pot_;
  const BathDiscretization& b_;
  double dt_, bound_;
  Vec2 x_, p_;
  Eigen::MatrixXd X_, P_;
  Eigen::ArrayXd ch_, sh_;
  std::int64_t n_ = 0;
};

// single-step contract operations built on the steppers
inline std::pair<TangentState, BathState> step_microscopic(
    const CurvedSpace& sp, const Potential& pot, const BathDiscretization& b,
    const TangentState& s, const BathState& bs, double dt) {
  RouteBStepper st(sp, pot, b, s, bs, dt);
  st.step();
  return {st.state(), st.bath_state()};
}

inline TangentState step_langevin(RouteAStepper& stepper) {
  stepper.step();
  return stepper.state();
}

struct ReservoirContext {
  const BathDiscretization* bath = nullptr;  // route B; also route A noise at T > 0
  const MemoryKernel* kernel = nullptr;      // route A friction
};

inline Trajectory run(const CurvedSpace& sp, const Potential& pot,
                      const SimConfig& cfg, const TangentState& s0,
                      const ReservoirContext& ctx = {}) {
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("run: dt must be > 0");
  if (cfg.steps < 1) throw std::invalid_argument("run: steps must be >= 1");
  if (cfg.stride < 1) throw std::invalid_argument("run: stride must be >= 1");

  Trajectory tr;
  tr.config = cfg;
  if (ctx.bath && (cfg.scheme == Scheme::RouteB ||
                   (cfg.scheme == Scheme::RouteA && cfg.T > 0.0))) {
    tr.bath_modes = ctx.bath->count();
    tr.bath_omega_max = ctx.bath->omega_max;
    tr.bath_reconstruction_error = ctx.bath->reconstruction_error;
  }

  double e_ref = 0.0;
  bool have_ref = false;
  auto guard = [&](double e, std::int64_t stepi) {
    if (!have_ref) {
      e_ref = e;
      have_ref = true;
      return;
    }
    if (!(std::abs(e - e_ref) <=
          cfg.instability_factor * std::max(std::abs(e_ref), 1.0))) {
      std::ostringstream m;
      m << "integration unstable at step " << stepi << ": energy moved from "
        << e_ref << " to " << e;
      throw InstabilityError(m.str());
    }
  };
  auto record = [&](double t, const TangentState& s, const double* etot,
                    std::int64_t stepi) {
    tr.t.push_back(t);
    tr.x.push_back(s.point.x);
    tr.v.push_back(s.v);
    tr.E_sys.push_back(energy_system(sp, pot, s));
    if (etot) tr.E_tot.push_back(*etot);
    tr.L.push_back(angular_momentum(sp, s));
    guard(etot ? *etot : tr.E_sys.back(), stepi);
  };
  auto due = [&](std::int64_t n) {
    return n % cfg.stride == 0 || n == cfg.steps;
  };

  switch (cfg.scheme) {
    case Scheme::Conservative: {
      ConservativeStepper st(sp, pot, s0, cfg.dt, cfg.lambda_factor_max);
      record(0.0, st.state(), nullptr, 0);
      for (std::int64_t n = 1; n <= cfg.steps; ++n) {
        st.step();
        if (due(n)) record(st.time(), st.state(), nullptr, n);
      }
      break;
    }
    case Scheme::RouteA: {
      if (!ctx.kernel)
        throw std::invalid_argument("run: route A requires a memory kernel");
      std::optional<BathState> bs;
      if (cfg.T > 0.0) {
        if (!ctx.bath)
          throw std::invalid_argument(
              "run: route A at T > 0 requires a discretized bath for the noise");
        bs = sample_thermal(*ctx.bath, cfg.T, cfg.seed, cfg.replica, cfg.units);
      }
      RouteAStepper st(sp, pot, *ctx.kernel, bs ? ctx.bath : nullptr,
                       bs ? &*bs : nullptr, s0, cfg);
      record(0.0, st.state(), nullptr, 0);
      for (std::int64_t n = 1; n <= cfg.steps; ++n) {
        st.step();
        if (due(n)) record(st.time(), st.state(), nullptr, n);
      }
      break;
    }
    case Scheme::RouteB: {
      if (!ctx.bath)
        throw std::invalid_argument("run: route B requires a discretized bath");
      BathState bs = sample_thermal(*ctx.bath, cfg.T, cfg.seed, cfg.replica, cfg.units);
      RouteBStepper st(sp, pot, *ctx.bath, s0, bs, cfg.dt, cfg.lambda_factor_max);
      double e = st.energy_total();
      record(0.0, st.state(), &e, 0);
      for (std::int64_t n = 1; n <= cfg.steps; ++n) {
        st.step();
        if (due(n)) {
          e = st.energy_total();
          record(st.time(), st.state(), &e, n);
        }
      }
      break;
    }
  }
  return tr;
}

struct EnsembleMean {
  std::vector<double> t;
  std::vector<Vec2> mean_x, mean_v;
  int replicas = 0;
};

// replica r always lands in slot r and the reduction runs in slot order, so
// the result is byte-identical for every thread count
inline EnsembleMean run_ensemble(const CurvedSpace& sp, const Potential& pot,
                                 const SimConfig& cfg, const TangentState& s0,
                                 const ReservoirContext& ctx, int replicas,
                                 int threads = 0) {
  if (replicas < 1) throw std::invalid_argument("run_ensemble: replicas must be >= 1");
  if (threads <= 0) threads = int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, replicas);

  auto xs = std::vector<std::vector<Vec2>>(std::size_t(replicas));
  auto vs = std::vector<std::vector<Vec2>>(std::size_t(replicas));
  std::vector<double> t_axis;
  std::atomic<std::int64_t> next{0};
  auto errs = std::vector<std::exception_ptr>(std::size_t(threads));

  auto worker = [&](int wi) {
    try {
      for (;;) {
        std::int64_t r = next.fetch_add(1);
        if (r >= replicas) return;
        SimConfig c = cfg;
        c.replica = std::uint64_t(r);
        Trajectory tr = run(sp, pot, c, s0, ctx);
        xs[std::size_t(r)] = std::move(tr.x);
        vs[std::size_t(r)] = std::move(tr.v);
        if (r == 0) t_axis = std::move(tr.t);
      }
    } catch (...) {
      errs[std::size_t(wi)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);

  EnsembleMean m;
  m.t = std::move(t_axis);
  m.replicas = replicas;
  m.mean_x.assign(m.t.size(), Vec2::Zero());
  m.mean_v.assign(m.t.size(), Vec2::Zero());
  for (int r = 0; r < replicas; ++r)
    for (std::size_t i = 0; i < m.t.size(); ++i) {
      m.mean_x[i] += xs[std::size_t(r)][i];
      m.mean_v[i] += vs[std::size_t(r)][i];
    }
  for (std::size_t i = 0; i < m.t.size(); ++i) {
    m.mean_x[i] /= double(replicas);
    m.mean_v[i] /= double(replicas);
  }
  return m;
}

}  // namespace gnomon
