// Batch front door: strict JSON config in, manifest + fixed-format CSV out.
// Exit codes: 0 ok, 1 runtime failure, 2 config failure, 3 validation failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "gnomon/bath.hpp"
#include "gnomon/config.hpp"
#include "gnomon/csv.hpp"
#include "gnomon/dynamics.hpp"
#include "gnomon/higgs.hpp"
#include "gnomon/kernel.hpp"
#include "gnomon/kramers_kronig.hpp"
#include "gnomon/noise.hpp"
#include "gnomon/rates.hpp"
#include "gnomon/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gnomon;

namespace {

struct Flags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicas;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

RunConfig load_config(const Flags& fl, const char* command) {
  RunConfig c = parse_config(fl.config_path);
  if (c.mode != command)
    throw ConfigError("mode", "config mode '" + c.mode + "' does not match command '" +
                                  command + "'");
  if (fl.seed) c.sim.seed = *fl.seed;
  if (fl.replicas) {
    if (*fl.replicas < 1) throw ConfigError("sim.replicas", "must be >= 1");
    c.replicas = *fl.replicas;
  }
  if (!fl.out_dir.empty()) c.out_dir = fl.out_dir;
  fs::create_directories(c.out_dir);
  return c;
}

json manifest_base(const RunConfig& c, const char* command, const Timer& timer) {
  json m;
  m["schema"] = "gnomon-manifest-1";
  m["command"] = command;
  m["master_seed"] = c.sim.seed;
  m["replicas"] = c.replicas;
  m["output_dir"] = c.out_dir;
  m["config"] = c.raw;
  m["wall_time_seconds"] = timer.seconds();
  return m;
}

void write_manifest(OutputTracker& tracker, const fs::path& dir, const json& m) {
  auto f = tracker.create(dir / "manifest.json");
  f << m.dump(2) << "\n";
}

// ---------------------------------------------------------------- kernel ----

int cmd_kernel(const RunConfig& c, OutputTracker& tracker) {
  Timer timer;
  const double t_max = c.sim.dt * double(c.sim.steps);
  KernelOptions ko;
  if (c.bath_omega_max > 0) ko.omega_max = c.bath_omega_max;
  MemoryKernel k = kernel_from_model(c.susceptibility, c.sim.dt, t_max, ko);

  const double W = ko.omega_max > 0 ? ko.omega_max : c.susceptibility.default_omega_max();
  const int nw = 2000;
  std::vector<double> w(nw + 1), im(nw + 1);
  for (int i = 0; i <= nw; ++i) {
    w[std::size_t(i)] = W * double(i) / double(nw);
    im[std::size_t(i)] = c.susceptibility.im_chi(w[std::size_t(i)]);
  }
  KKResult kk = kramers_kronig_re(w, im);

  json m = manifest_base(c, "kernel", timer);
  m["files"] = {"kernel.csv", "kk.csv"};
  m["derived"] = {{"t_max", t_max}, {"dt", c.sim.dt}, {"omega_max", k.omega_max}};
  m["achieved"] = {{"kernel_quadrature_error", k.achieved_error},
                   {"kk_tail_estimate", kk.tail_estimate}};
  write_manifest(tracker, c.out_dir, m);

  auto fk = tracker.create(fs::path(c.out_dir) / "kernel.csv");
  fk << "t,gamma,gamma_dot\n";
  for (std::size_t i = 0; i < k.gamma.size(); ++i)
    fk << fmt_e(double(i) * k.dt_kernel) << ',' << fmt_e(k.gamma[i]) << ','
       << fmt_e(k.gamma_dot[i]) << '\n';

  auto fq = tracker.create(fs::path(c.out_dir) / "kk.csv");
  fq << "omega,im,re_kk,re_ref\n";
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double ref = c.susceptibility.has_analytic_re()
                           ? c.susceptibility.analytic_re(w[i])
                           : std::nan("");
    fq << fmt_e(w[i]) << ',' << fmt_e(im[i]) << ',' << fmt_e(kk.re[i]) << ',' << fmt_e(ref)
       << '\n';
  }
  tracker.keep();
  return 0;
}

// -------------------------------------------------------------- simulate ----

int cmd_simulate(const RunConfig& c, OutputTracker& tracker) {
  Timer timer;
  const TangentState s0{TangentPoint(c.x0), c.v0};

  MemoryKernel kernel;
  BathDiscretization bath;
  ReservoirContext ctx;
  const bool need_kernel = c.sim.scheme == Scheme::RouteA;
  const bool need_bath =
      c.sim.scheme == Scheme::RouteB || (c.sim.scheme == Scheme::RouteA && c.sim.T > 0);
  if (need_kernel) {
    const double horizon =
        std::max(c.sim.t_kernel, c.sim.dt * double(c.sim.steps)) + 2.0 * c.sim.dt;
    KernelOptions ko;
    if (c.bath_omega_max > 0) ko.omega_max = c.bath_omega_max;
    kernel = kernel_from_model(c.susceptibility, c.sim.dt, horizon, ko);
    ctx.kernel = &kernel;
  }
  if (need_bath) {
    bath = discretize_bath(c.susceptibility, c.bath_N, c.bath_omega_max);
    ctx.bath = &bath;
  }

  if (c.replicas == 1) {
    Trajectory tr = run(c.space, c.potential, c.sim, s0, ctx);
    json m = manifest_base(c, "simulate", timer);
    m["files"] = {"trajectory.csv"};
    m["derived"] = {{"bath_modes", tr.bath_modes}, {"bath_omega_max", tr.bath_omega_max}};
    m["achieved"] = {{"bath_reconstruction_error", tr.bath_reconstruction_error},
                     {"kernel_quadrature_error", need_kernel ? kernel.achieved_error : -1.0}};
    write_manifest(tracker, c.out_dir, m);

    auto f = tracker.create(fs::path(c.out_dir) / "trajectory.csv");
    f << "t,x1,x2,v1,v2,E_sys,E_tot,L\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const double etot = tr.E_tot.empty() ? std::nan("") : tr.E_tot[i];
      f << fmt_e(tr.t[i]) << ',' << fmt_e(tr.x[i][0]) << ',' << fmt_e(tr.x[i][1]) << ','
        << fmt_e(tr.v[i][0]) << ',' << fmt_e(tr.v[i][1]) << ',' << fmt_e(tr.E_sys[i]) << ','
        << fmt_e(etot) << ',' << fmt_e(tr.L[i]) << '\n';
    }
  } else {
    EnsembleMean em = run_ensemble(c.space, c.potential, c.sim, s0, ctx, c.replicas);
    json m = manifest_base(c, "simulate", timer);
    m["files"] = {"trajectory_mean.csv"};
    m["derived"] = {{"bath_modes", need_bath ? bath.count() : 0},
                    {"bath_omega_max", need_bath ? bath.omega_max : 0.0}};
    m["achieved"] = {{"bath_reconstruction_error", need_bath ? bath.reconstruction_error : -1.0},
                     {"kernel_quadrature_error", need_kernel ? kernel.achieved_error : -1.0}};
    write_manifest(tracker, c.out_dir, m);

    auto f = tracker.create(fs::path(c.out_dir) / "trajectory_mean.csv");
    f << "t,x1,x2,v1,v2\n";
    for (std::size_t i = 0; i < em.t.size(); ++i)
      f << fmt_e(em.t[i]) << ',' << fmt_e(em.mean_x[i][0]) << ',' << fmt_e(em.mean_x[i][1])
        << ',' << fmt_e(em.mean_v[i][0]) << ',' << fmt_e(em.mean_v[i][1]) << '\n';
  }
  tracker.keep();
  return 0;
}

// ----------------------------------------------------------------- rates ----

int cmd_rates(const RunConfig& c, OutputTracker& tracker) {
  Timer timer;
  if (c.potential.kind != Potential::Kind::Harmonic)
    throw ConfigError("potential.type", "rates mode requires a harmonic potential");
  const double w0 = c.potential.omega0;

  FockBasis2D basis(c.n_max);
  auto H = build_higgs_hamiltonian(basis, c.spectra_lambda, c.potential);
  auto eig = eigensolve(H, 1e-2 * w0);
  auto terms = vielbein_operator_terms(basis, c.spectra_lambda, w0);

  RateRequest rq;
  rq.initial = c.initial_state;
  rq.lambda = c.spectra_lambda;
  rq.reservoir = c.susceptibility;
  rq.occupation = c.occupation;
  rq.line_shape = c.line_shape;
  rq.floor = c.rate_floor;
  RateTable table = golden_rule_rates(rq, eig, terms);

  const Eigen::MatrixXd Hr = H.M.real();
  double residual = 0.0;
  for (int i = 0; i < std::min<int>(10, int(eig.energies.size())); ++i)
    residual = std::max(residual,
                        (Hr * eig.vectors.col(i) - eig.energies[i] * eig.vectors.col(i)).norm());

  json m = manifest_base(c, "rates", timer);
  m["files"] = {"eigenvalues.csv", "rates.csv"};
  m["derived"] = {{"dimension", basis.dimension()},
                  {"multiplet_gap", 1e-2 * w0},
                  {"line_shape_at_resonance", table.delta0}};
  m["achieved"] = {{"max_eigen_residual", residual}};
  write_manifest(tracker, c.out_dir, m);

  auto fe = tracker.create(fs::path(c.out_dir) / "eigenvalues.csv");
  fe << "index,energy,multiplet\n";
  for (Eigen::Index i = 0; i < eig.energies.size(); ++i)
    fe << i << ',' << fmt_e(eig.energies[i]) << ',' << eig.multiplet[std::size_t(i)] << '\n';

  auto fr = tracker.create(fs::path(c.out_dir) / "rates.csv");
  fr << "m,n,j,omega_nm,V2,Vp2,Gamma_abs,Gamma_emit\n";
  for (const auto& r : table.rows)
    fr << r.m << ',' << r.n << ',' << r.j + 1 << ',' << fmt_e(r.omega_nm) << ',' << fmt_e(r.V2)
       << ',' << fmt_e(r.Vp2) << ',' << fmt_e(r.Gamma_abs) << ',' << fmt_e(r.Gamma_emit) << '\n';
  tracker.keep();
  return 0;
}

// ----------------------------------------------------------- noise-stats ----

int cmd_noise_stats(const RunConfig& c, OutputTracker& tracker) {
  Timer timer;
  BathDiscretization bath = discretize_bath(c.susceptibility, c.bath_N, c.bath_omega_max);
  const TangentPoint pt(c.x0);
  const Mat2 g = metric(c.space, pt);
  const double T = c.sim.T;
  const int M = c.replicas;

  struct Row {
    double tau, emp, ana, se;
    int a, b;
  };
  std::vector<Row> rows;
  for (double tau : c.lags) {
    Eigen::Matrix2d mean = Eigen::Matrix2d::Zero(), m2 = Eigen::Matrix2d::Zero();
    for (int r = 0; r < M; ++r) {
      BathState st = sample_thermal(bath, T, c.sim.seed, std::uint64_t(r));
      const Vec2 R0 = noise_R(c.space, pt, bath, st, 0.0);
      const Vec2 Rt = noise_R(c.space, pt, bath, st, tau);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double prod = R0[a] * Rt[b];
          mean(a, b) += prod;
          m2(a, b) += prod * prod;
        }
    }
    mean /= double(M);
    const double K = mode_sum_K(bath, tau);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const double var = m2(a, b) / double(M) - sqr(mean(a, b));
        rows.push_back({tau, mean(a, b), g(a, b) * T * K,
                        std::sqrt(std::max(var, 0.0) / double(M)), a + 1, b + 1});
      }
  }

  json m = manifest_base(c, "noise-stats", timer);
  m["files"] = {"noise_stats.csv"};
  m["derived"] = {{"bath_modes", bath.count()},
                  {"bath_omega_max", bath.omega_max},
                  {"temperature", T}};
  m["achieved"] = {{"bath_reconstruction_error", bath.reconstruction_error}};
  write_manifest(tracker, c.out_dir, m);

  auto f = tracker.create(fs::path(c.out_dir) / "noise_stats.csv");
  f << "tau,alpha,beta,empirical,analytic,stderr\n";
  for (const auto& r : rows)
    f << fmt_e(r.tau) << ',' << r.a << ',' << r.b << ',' << fmt_e(r.emp) << ',' << fmt_e(r.ana)
      << ',' << fmt_e(r.se) << '\n';
  tracker.keep();
  return 0;
}

// -------------------------------------------------------------- validate ----

int cmd_validate() {
  ValidationReport rep = run_validation();
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
  std::cout << (rep.all_pass() ? "all checks passed" : "validation FAILED") << "\n";
  return rep.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipative dynamics on a gnomonic sphere: simulation and rate toolkit"};
  app.require_subcommand(1);

  Flags fl;
  const char* names[] = {"simulate", "rates", "kernel", "noise-stats"};
  for (const char* name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", fl.config_path, "JSON run configuration")->required();
    sub->add_option("--out", fl.out_dir, "output directory (overrides config)");
    sub->add_option("--seed", fl.seed, "master seed (overrides config)");
    sub->add_option("--replicas", fl.replicas, "replica count (overrides config)");
  }
  CLI::App* val = app.add_subcommand("validate", "run the built-in invariant suite");
  val->add_option("--config", fl.config_path, "optional config (mode must be validate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  OutputTracker tracker;
  try {
    if (app.got_subcommand("validate")) {
      if (!fl.config_path.empty()) {
        RunConfig c = parse_config(fl.config_path);
        if (c.mode != "validate")
          throw ConfigError("mode", "config mode '" + c.mode + "' does not match command 'validate'");
      }
      return cmd_validate();
    }
    if (app.got_subcommand("simulate")) return cmd_simulate(load_config(fl, "simulate"), tracker);
    if (app.got_subcommand("rates")) return cmd_rates(load_config(fl, "rates"), tracker);
    if (app.got_subcommand("kernel")) return cmd_kernel(load_config(fl, "kernel"), tracker);
    if (app.got_subcommand("noise-stats"))
      return cmd_noise_stats(load_config(fl, "noise-stats"), tracker);
  } catch (const ConfigError& e) {
    tracker.discard();
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    tracker.discard();
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
