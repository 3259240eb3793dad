#pragma once

// Strict JSON run configuration.  Unknown keys are rejected with their dotted
// path: a silently ignored typo in a physics parameter is the worst failure
// mode a batch tool can have.

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "gnomon/common.hpp"
#include "gnomon/dynamics.hpp"
#include "gnomon/geometry.hpp"
#include "gnomon/potential.hpp"
#include "gnomon/rates.hpp"
#include "gnomon/susceptibility.hpp"

namespace gnomon {

struct RunConfig {
  std::string mode;
  CurvedSpace space{0.0, 1.0};
  Potential potential = Potential::harmonic(1.0);
  SusceptibilityModel susceptibility = SusceptibilityModel::ohmic_drude(0.5, 10.0);
  int bath_N = 400;
  double bath_omega_max = -1.0;  // <= 0: derived from the spectral scale
  SimConfig sim{};
  Vec2 x0{0.0, 0.0};
  Vec2 v0{0.0, 0.0};
  int replicas = 1;
  // spectra
  int n_max = 30;
  double spectra_lambda = 0.0;
  int initial_state = 0;
  OccupationSpec occupation = OccupationSpec::bose_einstein(0.0);
  LineShape line_shape = LineShape::gaussian(0.05);
  double rate_floor = 1e-15;
  // noise statistics
  std::vector<double> lags{0.0, 0.5, 1.0, 2.0};
  std::string out_dir = ".";
  nlohmann::json raw;  // parsed input, echoed into the manifest
};

namespace cfgdetail {

using nlohmann::json;

inline std::string join(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline void check_keys(const json& o, const std::string& base,
                       std::initializer_list<const char*> allowed) {
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(join(base, it.key()), "unknown key");
  }
}

inline const json& member(const json& o, const std::string& base, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) throw ConfigError(join(base, key), "required key missing");
  return *it;
}

inline double get_num(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

inline double opt_num(const json& o, const std::string& base, const char* key, double dflt) {
  auto it = o.find(key);
  return it == o.end() ? dflt : get_num(*it, join(base, key));
}

inline std::int64_t get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<std::int64_t>();
}

inline std::int64_t opt_int(const json& o, const std::string& base, const char* key,
                            std::int64_t dflt) {
  auto it = o.find(key);
  return it == o.end() ? dflt : get_int(*it, join(base, key));
}

inline std::string get_str(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

inline void require(bool ok, const std::string& path, const char* msg) {
  if (!ok) throw ConfigError(path, msg);
}

inline Vec2 get_vec2(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected an array of two numbers");
  return Vec2(get_num(v[0], path + "[0]"), get_num(v[1], path + "[1]"));
}

inline void parse_space(const json& o, RunConfig& c) {
  check_keys(o, "space", {"lambda", "mass"});
  c.space.lambda = opt_num(o, "space", "lambda", 0.0);
  c.space.mass = opt_num(o, "space", "mass", 1.0);
  require(c.space.lambda >= 0, "space.lambda", "must be >= 0");
  require(c.space.mass > 0, "space.mass", "must be > 0");
}

inline void parse_potential(const json& o, RunConfig& c) {
  const std::string type = get_str(member(o, "potential", "type"), "potential.type");
  if (type == "free") {
    check_keys(o, "potential", {"type"});
    c.potential = Potential::free();
  } else if (type == "harmonic") {
    check_keys(o, "potential", {"type", "omega0"});
    const double w0 = get_num(member(o, "potential", "omega0"), "potential.omega0");
    require(w0 > 0, "potential.omega0", "must be > 0");
    c.potential = Potential::harmonic(w0);
  } else if (type == "coulomb_like") {
    check_keys(o, "potential", {"type", "alpha"});
    const double a = get_num(member(o, "potential", "alpha"), "potential.alpha");
    require(a > 0, "potential.alpha", "must be > 0");
    c.potential = Potential::coulomb_like(a);
  } else {
    throw ConfigError("potential.type", "expected free | harmonic | coulomb_like");
  }
}

inline void parse_susceptibility(const json& o, RunConfig& c) {
  const std::string type = get_str(member(o, "susceptibility", "type"), "susceptibility.type");
  try {
    if (type == "lorentz") {
      check_keys(o, "susceptibility", {"type", "omega_p", "omega0", "gamma_d"});
      const double wp = get_num(member(o, "susceptibility", "omega_p"), "susceptibility.omega_p");
      require(wp > 0, "susceptibility.omega_p", "must be > 0");
      c.susceptibility = SusceptibilityModel::lorentz(
          sqr(wp),
          get_num(member(o, "susceptibility", "omega0"), "susceptibility.omega0"),
          get_num(member(o, "susceptibility", "gamma_d"), "susceptibility.gamma_d"));
    } else if (type == "ohmic_drude") {
      check_keys(o, "susceptibility", {"type", "eta", "omega_c"});
      c.susceptibility = SusceptibilityModel::ohmic_drude(
          get_num(member(o, "susceptibility", "eta"), "susceptibility.eta"),
          get_num(member(o, "susceptibility", "omega_c"), "susceptibility.omega_c"));
    } else if (type == "tabulated") {
      check_keys(o, "susceptibility", {"type", "file"});
      c.susceptibility = SusceptibilityModel::tabulated_from_file(
          get_str(member(o, "susceptibility", "file"), "susceptibility.file"));
    } else {
      throw ConfigError("susceptibility.type", "expected lorentz | ohmic_drude | tabulated");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("susceptibility", e.what());
  }
}

inline void parse_bath(const json& o, RunConfig& c) {
  check_keys(o, "bath", {"N", "omega_max"});
  c.bath_N = int(opt_int(o, "bath", "N", 400));
  require(c.bath_N >= 1, "bath.N", "must be >= 1");
  if (o.contains("omega_max")) {
    c.bath_omega_max = get_num(o["omega_max"], "bath.omega_max");
    require(c.bath_omega_max > 0, "bath.omega_max", "must be > 0");
  }
}

inline void parse_sim(const json& o, RunConfig& c) {
  check_keys(o, "sim",
             {"dt", "steps", "seed", "scheme", "T", "stride", "t_kernel", "memory_window",
              "lambda_factor_max", "x0", "v0", "replicas"});
  c.sim.dt = opt_num(o, "sim", "dt", c.sim.dt);
  require(c.sim.dt > 0, "sim.dt", "must be > 0");
  c.sim.steps = opt_int(o, "sim", "steps", c.sim.steps);
  require(c.sim.steps >= 1, "sim.steps", "must be >= 1");
  if (o.contains("seed")) {
    const json& s = o["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() &&
                                   s.get<std::int64_t>() < 0))
      throw ConfigError("sim.seed", "expected a non-negative integer");
    c.sim.seed = s.get<std::uint64_t>();
  }
  if (o.contains("scheme")) {
    const std::string s = get_str(o["scheme"], "sim.scheme");
    if (s == "conservative")
      c.sim.scheme = Scheme::Conservative;
    else if (s == "route_a")
      c.sim.scheme = Scheme::RouteA;
    else if (s == "route_b")
      c.sim.scheme = Scheme::RouteB;
    else
      throw ConfigError("sim.scheme", "expected conservative | route_a | route_b");
  }
  c.sim.T = opt_num(o, "sim", "T", 0.0);
  require(c.sim.T >= 0, "sim.T", "must be >= 0");
  c.sim.stride = opt_int(o, "sim", "stride", 1);
  require(c.sim.stride >= 1, "sim.stride", "must be >= 1");
  c.sim.t_kernel = opt_num(o, "sim", "t_kernel", -1.0);
  c.sim.memory_window = opt_num(o, "sim", "memory_window", -1.0);
  c.sim.lambda_factor_max = opt_num(o, "sim", "lambda_factor_max", kDefaultChartBound);
  require(c.sim.lambda_factor_max > 1, "sim.lambda_factor_max", "must be > 1");
  if (o.contains("x0")) c.x0 = get_vec2(o["x0"], "sim.x0");
  if (o.contains("v0")) c.v0 = get_vec2(o["v0"], "sim.v0");
  c.replicas = int(opt_int(o, "sim", "replicas", 1));
  require(c.replicas >= 1, "sim.replicas", "must be >= 1");
}

inline void parse_spectra(const json& o, RunConfig& c) {
  check_keys(o, "spectra", {"n_max", "lambda", "initial", "occupation", "line_shape", "floor"});
  c.n_max = int(opt_int(o, "spectra", "n_max", 30));
  require(c.n_max >= 1, "spectra.n_max", "must be >= 1");
  c.spectra_lambda = opt_num(o, "spectra", "lambda", c.space.lambda);
  require(c.spectra_lambda >= 0, "spectra.lambda", "must be >= 0");
  c.initial_state = int(opt_int(o, "spectra", "initial", 0));
  const int D = (c.n_max + 1) * (c.n_max + 2) / 2;
  require(c.initial_state >= 0 && c.initial_state < D, "spectra.initial",
          "must lie inside the truncated basis");
  if (o.contains("occupation")) {
    const json& oc = o["occupation"];
    const std::string type = get_str(member(oc, "spectra.occupation", "type"),
                                     "spectra.occupation.type");
    if (type == "bose_einstein") {
      check_keys(oc, "spectra.occupation", {"type", "T"});
      const double T = opt_num(oc, "spectra.occupation", "T", 0.0);
      require(T >= 0, "spectra.occupation.T", "must be >= 0");
      c.occupation = OccupationSpec::bose_einstein(T);
    } else if (type == "fixed") {
      check_keys(oc, "spectra.occupation", {"type", "M"});
      const double M = get_num(member(oc, "spectra.occupation", "M"), "spectra.occupation.M");
      require(M >= 0, "spectra.occupation.M", "must be >= 0");
      c.occupation = OccupationSpec::fixed(M);
    } else {
      throw ConfigError("spectra.occupation.type", "expected bose_einstein | fixed");
    }
  }
  // width defaults to 5% of the confining frequency
  double sigma = 0.05 * (c.potential.kind == Potential::Kind::Harmonic ? c.potential.omega0 : 1.0);
  std::string shape = "gaussian";
  if (o.contains("line_shape")) {
    const json& ls = o["line_shape"];
    check_keys(ls, "spectra.line_shape", {"type", "sigma"});
    shape = get_str(member(ls, "spectra.line_shape", "type"), "spectra.line_shape.type");
    sigma = opt_num(ls, "spectra.line_shape", "sigma", sigma);
    require(sigma > 0, "spectra.line_shape.sigma", "must be > 0");
  }
  if (shape == "gaussian")
    c.line_shape = LineShape::gaussian(sigma);
  else if (shape == "lorentzian")
    c.line_shape = LineShape::lorentzian(sigma);
  else
    throw ConfigError("spectra.line_shape.type", "expected gaussian | lorentzian");
  c.rate_floor = opt_num(o, "spectra", "floor", 1e-15);
  require(c.rate_floor >= 0, "spectra.floor", "must be >= 0");
}

inline void parse_noise_stats(const json& o, RunConfig& c) {
  check_keys(o, "noise_stats", {"lags"});
  if (o.contains("lags")) {
    const json& l = o["lags"];
    if (!l.is_array() || l.empty()) throw ConfigError("noise_stats.lags", "expected a non-empty array");
    c.lags.clear();
    for (std::size_t i = 0; i < l.size(); ++i) {
      const double tau = get_num(l[i], "noise_stats.lags[" + std::to_string(i) + "]");
      require(tau >= 0, "noise_stats.lags", "lags must be >= 0");
      c.lags.push_back(tau);
    }
  }
}

}  // namespace cfgdetail

inline RunConfig parse_config_json(const nlohmann::json& j) {
  using namespace cfgdetail;
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  check_keys(j, "",
             {"mode", "space", "potential", "susceptibility", "bath", "sim", "spectra",
              "noise_stats", "output"});
  RunConfig c;
  c.raw = j;
  c.mode = get_str(member(j, "", "mode"), "mode");
  if (c.mode != "simulate" && c.mode != "rates" && c.mode != "kernel" &&
      c.mode != "noise-stats" && c.mode != "validate")
    throw ConfigError("mode", "expected simulate | rates | kernel | noise-stats | validate");
  if (j.contains("space")) parse_space(j["space"], c);
  if (j.contains("potential")) parse_potential(j["potential"], c);
  if (j.contains("susceptibility")) parse_susceptibility(j["susceptibility"], c);
  if (j.contains("bath")) parse_bath(j["bath"], c);
  c.spectra_lambda = c.space.lambda;
  if (j.contains("sim")) parse_sim(j["sim"], c);
  if (j.contains("spectra")) parse_spectra(j["spectra"], c);
  if (j.contains("noise_stats")) parse_noise_stats(j["noise_stats"], c);
  if (j.contains("output")) {
    check_keys(j["output"], "output", {"dir"});
    if (j["output"].contains("dir")) c.out_dir = get_str(j["output"]["dir"], "output.dir");
  }
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("JSON parse failure: ") + e.what());
  }
  return parse_config_json(j);
}

}  // namespace gnomon
