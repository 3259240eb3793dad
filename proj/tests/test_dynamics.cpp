#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gnomon/dynamics.hpp"

using namespace gnomon;

namespace {

MemoryKernel dead_kernel(double t_max) {
  auto dead = SusceptibilityModel::tabulated({1.0, 2.0}, {0.0, 0.0});
  KernelOptions ko;
  ko.omega_max = 4.0;
  return kernel_from_model(dead, 0.01, t_max, ko);
}

}  // namespace

TEST_CASE("conservative_rhs hand values") {
  Potential freep = Potential::free();
  CHECK(conservative_rhs({0.0, 1.0}, freep, {TangentPoint(0.3, 0.4), Vec2(1.0, 2.0)})
            .isZero(0.0));
  Vec2 a = conservative_rhs({1.0, 1.0}, freep, {TangentPoint(1.0, 0.0), Vec2(1.0, 0.0)});
  CHECK_THAT(a[0], Catch::Matchers::WithinRel(1.0, 1e-14));
  CHECK_THAT(a[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
  Vec2 b = conservative_rhs({0.0, 1.0}, Potential::harmonic(1.0),
                            {TangentPoint(1.0, 0.0), Vec2(0.0, 0.0)});
  CHECK_THAT(b[0], Catch::Matchers::WithinRel(-1.0, 1e-14));
  CHECK_THAT(b[1], Catch::Matchers::WithinAbs(0.0, 1e-15));
}

TEST_CASE("energy_system hand values") {
  CHECK_THAT(energy_system({0.0, 1.0}, Potential::free(), {TangentPoint(0, 0), Vec2(1, 0)}),
             Catch::Matchers::WithinRel(0.5, 1e-15));
  CHECK_THAT(energy_system({1.0, 1.0}, Potential::free(), {TangentPoint(1, 0), Vec2(1, 0)}),
             Catch::Matchers::WithinRel(0.125, 1e-14));
}

TEST_CASE("conservative run holds energy and angular momentum") {
  CurvedSpace sp{0.5, 1.3};
  Potential pot = Potential::harmonic(1.0);
  TangentState s0{TangentPoint(0.6, 0.2), Vec2(-0.1, 0.4)};
  SimConfig cfg;
  cfg.dt = 2e-4;
  cfg.steps = 100000;
  cfg.stride = 200;
  Trajectory tr = run(sp, pot, cfg, s0);
  const double E0 = tr.E_sys.front(), L0 = tr.L.front();
  double dE = 0.0, dL = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    dE = std::max(dE, std::abs(tr.E_sys[i] - E0));
    dL = std::max(dL, std::abs(tr.L[i] - L0));
  }
  CHECK(dE / std::abs(E0) < 1e-8);
  CHECK(dL / std::abs(L0) < 1e-8);
  CHECK(tr.E_tot.empty());
  CHECK(tr.t.size() == 501);
}

TEST_CASE("flat limit: harmonic orbit matches the analytic solution") {
  CurvedSpace sp{0.0, 1.0};
  Potential pot = Potential::harmonic(2.0);
  TangentState s0{TangentPoint(0.7, -0.3), Vec2(0.2, 0.5)};
  SimConfig cfg;
  cfg.dt = 1e-4;
  cfg.steps = 10000;
  cfg.stride = 500;
  Trajectory tr = run(sp, pot, cfg, s0);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    double t = tr.t[i];
    Vec2 xe = s0.point.x * std::cos(2.0 * t) + s0.v / 2.0 * std::sin(2.0 * t);
    CHECK((tr.x[i] - xe).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("free motion projects to a straight line at any curvature") {
  Potential pot = Potential::free();
  // on-axis start: transverse coordinate stays numerically zero
  {
    CurvedSpace sp{1.0, 1.0};
    SimConfig cfg;
    cfg.dt = 2e-4;
    cfg.steps = 5000;
    cfg.stride = 100;
    Trajectory tr = run(sp, pot, cfg, {TangentPoint(0, 0), Vec2(1, 0)});
    for (std::size_t i = 0; i < tr.size(); ++i) {
      CHECK(std::abs(tr.x[i][1]) < 1e-12);
      double speed = std::abs(tr.v[i][0]);
      double expect = 1.0 + tr.x[i][0] * tr.x[i][0];  // (1 + lambda x1^2)|v0|
      CHECK_THAT(speed, Catch::Matchers::WithinRel(expect, 1e-6));
    }
    // x1(t) = tan(t) for unit curvature and unit initial speed
    CHECK_THAT(tr.x.back()[0], Catch::Matchers::WithinRel(std::tan(1.0), 1e-5));
  }
  // generic start: deviation from the initial line stays tiny
  {
    CurvedSpace sp{0.7, 1.0};
    SimConfig cfg;
    cfg.dt = 2e-4;
    cfg.steps = 4000;
    Trajectory tr = run(sp, pot, cfg, {TangentPoint(0.3, 0.1), Vec2(0.2, 0.5)});
    Vec2 dir = Vec2(0.2, 0.5).normalized();
    double path = 0.0, worst = 0.0;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      path += (tr.x[i] - tr.x[i - 1]).norm();
      Vec2 d = tr.x[i] - tr.x.front();
      worst = std::max(worst, std::abs(d[0] * dir[1] - d[1] * dir[0]));
    }
    CHECK(worst < 1e-6 * path);
  }
}

TEST_CASE("curvature switched off reproduces plain leapfrog bit for bit") {
  CurvedSpace sp{0.0, 1.0};
  Potential pot = Potential::harmonic(1.5);
  const double dt = 1e-3;
  ConservativeStepper st(sp, pot, {TangentPoint(0.8, -0.2), Vec2(0.1, 0.4)}, dt);
  Vec2 x(0.8, -0.2), p(0.1, 0.4);  // flat metric: p = m v
  const double k = 1.5 * 1.5;      // m w0^2
  for (int n = 0; n < 1000; ++n) {
    st.step();
    Vec2 ph = p - 0.5 * dt * k * x;
    x = x + dt * ph;
    p = ph - 0.5 * dt * k * x;
  }
  TangentState s = st.state();
  CHECK((s.point.x - x).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((s.v - p).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("dead kernel and silent bath reduce route A to the conservative flow") {
  CurvedSpace sp{0.6, 1.0};
  Potential pot = Potential::harmonic(1.0);
  TangentState s0{TangentPoint(0.5, 0.1), Vec2(-0.2, 0.3)};
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.steps = 2000;
  MemoryKernel k = dead_kernel(cfg.dt * double(cfg.steps) + 1.0);
  ReservoirContext ctx;
  ctx.kernel = &k;
  cfg.scheme = Scheme::RouteA;
  Trajectory a = run(sp, pot, cfg, s0, ctx);
  cfg.scheme = Scheme::Conservative;
  Trajectory c = run(sp, pot, cfg, s0);
  REQUIRE(a.size() == c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.x[i] - c.x[i]).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((a.v[i] - c.v[i]).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("zero coupling reduces the microscopic step to the conservative one") {
  CurvedSpace sp{0.8, 1.2};
  Potential pot = Potential::harmonic(1.1);
  auto m = SusceptibilityModel::ohmic_drude(0.5, 10.0);
  BathDiscretization b = discretize_bath(m, 16, 20.0, {.validate = false});
  b.c.setZero();
  BathState bs;
  bs.X = Eigen::MatrixXd::Random(16, 3);
  bs.P = Eigen::MatrixXd::Random(16, 3);

  TangentState s{TangentPoint(0.4, -0.3), Vec2(0.2, 0.1)};
  ConservativeStepper ref(sp, pot, s, 1e-3);
  BathState cur = bs;
  TangentState sb = s;
  for (int n = 0; n < 50; ++n) {
    auto [s2, bs2] = step_microscopic(sp, pot, b, sb, cur, 1e-3);
    sb = s2;
    cur = bs2;
    ref.step();
  }
  TangentState sc = ref.state();
  CHECK((sb.point.x - sc.point.x).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((sb.v - sc.v).cwiseAbs().maxCoeff() <= 1e-12);
  // decoupled modes still rotate freely at constant energy
  double e0 = 0.5 * (bs.P.array().square().sum() +
                     (bs.X.array().colwise() * b.omega.array()).square().sum());
  double e1 = 0.5 * (cur.P.array().square().sum() +
                     (cur.X.array().colwise() * b.omega.array()).square().sum());
  CHECK_THAT(e1, Catch::Matchers::WithinRel(e0, 1e-12));
}

TEST_CASE("everything at rest stays at rest") {
  CurvedSpace sp{1.0, 1.0};
  Potential pot = Potential::free();
  BathDiscretization b;
  b.omega = Eigen::VectorXd::Constant(1, 2.0);
  b.c = Eigen::VectorXd::Constant(1, 0.4);
  b.w = Eigen::VectorXd::Constant(1, 1.0);
  b.omega_max = 4.0;
  BathState bs;
  bs.X = Eigen::MatrixXd::Zero(1, 3);
  bs.P = Eigen::MatrixXd::Zero(1, 3);
  TangentState s{TangentPoint(0, 0), Vec2(0, 0)};
  auto [s1, bs1] = step_microscopic(sp, pot, b, s, bs, 1e-2);
  CHECK(s1.point.x.isZero(0.0));
  CHECK(s1.v.isZero(0.0));
  CHECK(bs1.X.isZero(0.0));
  CHECK(bs1.P.isZero(0.0));
}

TEST_CASE("microscopic energy is conserved and dissipation drains the system") {
  CurvedSpace sp{0.3, 1.0};
  Potential pot = Potential::harmonic(1.0);
  auto m = SusceptibilityModel::ohmic_drude(0.3, 5.0);
  BathDiscretization b = discretize_bath(m, 200, 40.0);
  SimConfig cfg;
  cfg.scheme = Scheme::RouteB;
  cfg.dt = 1e-3;
  cfg.steps = 10000;
  cfg.stride = 10;
  cfg.T = 0.0;
  ReservoirContext ctx;
  ctx.bath = &b;
  Trajectory tr = run(sp, pot, cfg, {TangentPoint(0.5, 0.0), Vec2(0.0, 0.3)}, ctx);

  REQUIRE(!tr.E_tot.empty());
  // bound covers the second-order oscillation of the splitting, not just drift
  double drift = 0.0;
  for (double e : tr.E_tot) drift = std::max(drift, std::abs(e - tr.E_tot.front()));
  CHECK(drift / std::abs(tr.E_tot.front()) < 5e-7);

  // window-average E_sys over roughly one kernel correlation time
  const int win = 100;  // 1.0 time units of records
  std::vector<double> coarse;
  for (std::size_t i = 0; i + win <= tr.E_sys.size(); i += win) {
    double s = 0.0;
    for (int j = 0; j < win; ++j) s += tr.E_sys[i + j];
    coarse.push_back(s / win);
  }
  for (std::size_t i = 1; i < coarse.size(); ++i)
    CHECK(coarse[i] <= coarse[i - 1] * (1.0 + 1e-6) + 1e-12);
  CHECK(coarse.back() < 0.5 * coarse.front());  // it really dissipates
}

TEST_CASE("langevin route tracks the damped oscillator envelope") {
  CurvedSpace sp{0.0, 1.0};
  Potential pot = Potential::harmonic(1.0);
  const double eta = 0.2, wc = 20.0;
  auto m = SusceptibilityModel::ohmic_drude(eta, wc);
  SimConfig cfg;
  cfg.scheme = Scheme::RouteA;
  cfg.dt = 2e-3;
  cfg.steps = 7500;  // t = 15
  cfg.stride = 25;
  MemoryKernel k = kernel_from_model(m, 0.005, 15.0 + 0.1);
  ReservoirContext ctx;
  ctx.kernel = &k;
  Trajectory tr = run(sp, pot, cfg, {TangentPoint(1.0, 0.0), Vec2(0.0, 0.0)}, ctx);
  const double wd = std::sqrt(1.0 - eta * eta / 4.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    double t = tr.t[i];
    if (t < 1.0) continue;  // skip the memory-buildup transient
    double env = std::sqrt(sqr(tr.x[i][0]) +
                           sqr((tr.v[i][0] + 0.5 * eta * tr.x[i][0]) / wd));
    worst = std::max(worst, std::abs(env - std::exp(-0.5 * eta * t)));
  }
  CHECK(worst < 0.03);
}

TEST_CASE("determinism: same seed, same trajectory; replicas differ") {
  CurvedSpace sp{0.2, 1.0};
  Potential pot = Potential::harmonic(1.0);
  auto m = SusceptibilityModel::ohmic_drude(0.2, 10.0);
  BathDiscretization b = discretize_bath(m, 120, 40.0, {.validate = false});
  MemoryKernel k = kernel_from_model(m, 0.01, 3.0, {.omega_max = 40.0});
  SimConfig cfg;
  cfg.scheme = Scheme::RouteA;
  cfg.dt = 1e-2;
  cfg.steps = 200;
  cfg.T = 0.5;
  cfg.seed = 31337;
  ReservoirContext ctx;
  ctx.bath = &b;
  ctx.kernel = &k;
  TangentState s0{TangentPoint(0.1, 0.0), Vec2(0.0, 0.0)};
  Trajectory t1 = run(sp, pot, cfg, s0, ctx);
  Trajectory t2 = run(sp, pot, cfg, s0, ctx);
  REQUIRE(t1.size() == t2.size());
  for (std::size_t i = 0; i < t1.size(); ++i)
    CHECK((t1.x[i] - t2.x[i]).cwiseAbs().maxCoeff() == 0.0);
  cfg.replica = 1;
  Trajectory t3 = run(sp, pot, cfg, s0, ctx);
  double diff = 0.0;
  for (std::size_t i = 0; i < t1.size(); ++i)
    diff = std::max(diff, (t1.x[i] - t3.x[i]).cwiseAbs().maxCoeff());
  CHECK(diff > 0.0);

  SimConfig one = cfg;
  one.steps = 1;
  Trajectory t4 = run(sp, pot, one, s0, ctx);
  CHECK(t4.t.front() == 0.0);
  CHECK(t4.t.size() == 2);
}

TEST_CASE("ensemble mean is independent of the thread count") {
  CurvedSpace sp{0.1, 1.0};
  Potential pot = Potential::harmonic(1.0);
  auto m = SusceptibilityModel::ohmic_drude(0.2, 10.0);
  BathDiscretization b = discretize_bath(m, 120, 40.0, {.validate = false});
  SimConfig cfg;
  cfg.scheme = Scheme::RouteB;
  cfg.dt = 5e-3;
  cfg.steps = 100;
  cfg.stride = 10;
  cfg.T = 0.3;
  ReservoirContext ctx;
  ctx.bath = &b;
  TangentState s0{TangentPoint(0.2, 0.1), Vec2(0.0, 0.0)};
  EnsembleMean m1 = run_ensemble(sp, pot, cfg, s0, ctx, 16, 1);
  EnsembleMean m4 = run_ensemble(sp, pot, cfg, s0, ctx, 16, 4);
  REQUIRE(m1.t.size() == m4.t.size());
  for (std::size_t i = 0; i < m1.t.size(); ++i)
    CHECK((m1.mean_x[i] - m4.mean_x[i]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("failure modes raise the dedicated errors") {
  Potential freep = Potential::free();
  // runaway projection: free motion reaches the chart boundary in finite time
  {
    CurvedSpace sp{1.0, 1.0};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 2000;
    cfg.lambda_factor_max = 50.0;
    CHECK_THROWS_AS(run(sp, freep, cfg, {TangentPoint(0, 0), Vec2(1, 0)}),
                    ChartOverflowError);
  }
  // plunge into the attractive singularity
  {
    CurvedSpace sp{0.0, 1.0};
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.steps = 2000;
    CHECK_THROWS_AS(
        run(sp, Potential::coulomb_like(1.0), cfg, {TangentPoint(0.05, 0.0), Vec2(-0.5, 0.0)}),
        InstabilityError);
  }
  // wildly unstable step size trips the energy guard
  {
    CurvedSpace sp{0.0, 1.0};
    SimConfig cfg;
    cfg.dt = 2.5;
    cfg.steps = 500;
    cfg.stride = 10;
    CHECK_THROWS_AS(
        run(sp, Potential::harmonic(1.0), cfg, {TangentPoint(1.0, 0.0), Vec2(0.0, 0.0)}),
        InstabilityError);
  }
  // stepping past the configured horizon exhausts the history buffer
  {
    CurvedSpace sp{0.0, 1.0};
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.steps = 10;
    MemoryKernel k = dead_kernel(1.0);
    RouteAStepper st(sp, freep, k, nullptr, nullptr, {TangentPoint(0.1, 0), Vec2(0, 0)}, cfg);
    for (int i = 0; i < 10; ++i) step_langevin(st);
    CHECK_THROWS_AS(st.step(), std::runtime_error);
  }
  // missing reservoir pieces are configuration errors
  {
    CurvedSpace sp{0.0, 1.0};
    SimConfig cfg;
    cfg.scheme = Scheme::RouteB;
    CHECK_THROWS_AS(run(sp, freep, cfg, {TangentPoint(0, 0), Vec2(0, 0)}),
                    std::invalid_argument);
    cfg.scheme = Scheme::RouteA;
    CHECK_THROWS_AS(run(sp, freep, cfg, {TangentPoint(0, 0), Vec2(0, 0)}),
                    std::invalid_argument);
  }
}
