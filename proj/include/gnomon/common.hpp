#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace gnomon {

inline constexpr double pi = 3.14159265358979323846;

// hbar/kB kept configurable so classical and quantum pieces share one unit system
struct Units {
  double hbar = 1.0;
  double kB = 1.0;
};

// trajectory left the open upper-hemisphere chart (Lambda exceeded the bound)
struct ChartOverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// integrator blew up (energy jump) or a guarded singularity was entered
struct InstabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// config validation failure; `path` is the dotted key path, e.g. "sim.dt"
struct ConfigError : std::runtime_error {
  std::string path;
  ConfigError(std::string p, const std::string& msg)
      : std::runtime_error(p + ": " + msg), path(std::move(p)) {}
};

inline double sqr(double x) { return x * x; }

}  // namespace gnomon
