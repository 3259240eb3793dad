#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnomon/config.hpp"
#include "gnomon/validation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::temp_directory_path() / ("gnomon_cli_" + std::to_string(::getpid()) +
                                                    "_" + std::to_string(++counter) + ".log");
  const std::string cmd =
      std::string(GNOMON_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  fs::remove(log);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("gnomon_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  const fs::path p = dir / name;
  std::ofstream f(p);
  f << content;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::vector<std::string>* header = nullptr) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::string line;
  REQUIRE(std::getline(in, line));
  if (header) {
    header->clear();
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header->push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("config strictness: unknown keys, ranges, mode mismatches") {
  const fs::path d = fresh_dir("cfg");

  auto bad1 = write_file(d, "bad1.json", R"({"mode":"kernel","foo":1})");
  auto r = run_cli("kernel --config " + bad1.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("foo") != std::string::npos);
  CHECK(r.output.find("unknown key") != std::string::npos);

  auto bad2 = write_file(d, "bad2.json",
                         R"({"mode":"simulate","sim":{"dt":-0.1}})");
  r = run_cli("simulate --config " + bad2.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("sim.dt") != std::string::npos);

  auto bad3 = write_file(d, "bad3.json", R"({"mode":"simulate","sim":{"tsteps":10}})");
  r = run_cli("simulate --config " + bad3.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("sim.tsteps") != std::string::npos);

  auto bad4 = write_file(d, "bad4.json", R"({"mode":"warp"})");
  CHECK(run_cli("simulate --config " + bad4.string()).code == 2);

  auto goodk = write_file(d, "k.json", R"({"mode":"kernel"})");
  r = run_cli("simulate --config " + goodk.string());
  CHECK(r.code == 2);
  CHECK(r.output.find("does not match") != std::string::npos);

  CHECK(run_cli("simulate").code == 2);                       // missing --config
  CHECK(run_cli("simulate --config /no/such/file").code == 2);
  auto badjson = write_file(d, "bad5.json", "{mode:");
  CHECK(run_cli("kernel --config " + badjson.string()).code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("kernel command writes manifest plus tables from a minimal config") {
  const fs::path d = fresh_dir("kernel");
  auto cfg = write_file(d, "cfg.json",
                        R"({"mode":"kernel",
                            "susceptibility":{"type":"ohmic_drude","eta":0.5,"omega_c":10},
                            "sim":{"dt":0.01,"steps":500}})");
  auto r = run_cli("kernel --config " + cfg.string() + " --out " + (d / "out").string());
  INFO(r.output);
  REQUIRE(r.code == 0);

  const json m = json::parse(slurp(d / "out" / "manifest.json"));
  CHECK(m["command"] == "kernel");
  CHECK(m["schema"] == "gnomon-manifest-1");
  CHECK(m.contains("achieved"));
  for (const auto& f : m["files"]) REQUIRE(fs::exists(d / "out" / f.get<std::string>()));

  std::vector<std::string> header;
  auto rows = read_csv(d / "out" / "kernel.csv", &header);
  REQUIRE(header == std::vector<std::string>{"t", "gamma", "gamma_dot"});
  REQUIRE(rows.size() == 501);
  CHECK(rows[0][0] == 0.0);
  CHECK(rows[0][1] == 0.0);
  // friction plateau of this spectrum: gamma(inf) = eta
  CHECK(std::abs(rows.back()[1] - 0.5) < 1e-3);

  auto kkrows = read_csv(d / "out" / "kk.csv", &header);
  REQUIRE(header == std::vector<std::string>{"omega", "im", "re_kk", "re_ref"});
  REQUIRE(kkrows.size() == 2001);
  for (const auto& row : kkrows) REQUIRE(std::isfinite(row[2]));
}

TEST_CASE("identical config and seed give byte-identical outputs") {
  const fs::path d = fresh_dir("repro");
  const std::string cfg_text =
      R"({"mode":"simulate",
          "space":{"lambda":0.1},
          "potential":{"type":"harmonic","omega0":1.0},
          "susceptibility":{"type":"ohmic_drude","eta":0.2,"omega_c":5},
          "bath":{"N":80,"omega_max":20},
          "sim":{"dt":0.005,"steps":400,"seed":31415,"scheme":"route_b","T":0.5,
                 "x0":[0.3,0.1],"v0":[0.0,0.2]}})";
  auto cfg = write_file(d, "cfg.json", cfg_text);

  for (const char* sub : {"a", "b"}) {
    auto r = run_cli("simulate --config " + cfg.string() + " --out " + (d / sub).string());
    INFO(r.output);
    REQUIRE(r.code == 0);
  }
  REQUIRE(slurp(d / "a" / "trajectory.csv") == slurp(d / "b" / "trajectory.csv"));

  // ensemble mean across replicas is reproducible as well
  for (const char* sub : {"ma", "mb"}) {
    auto r = run_cli("simulate --config " + cfg.string() + " --replicas 3 --out " +
                     (d / sub).string());
    REQUIRE(r.code == 0);
  }
  REQUIRE(slurp(d / "ma" / "trajectory_mean.csv") == slurp(d / "mb" / "trajectory_mean.csv"));
  // a different seed changes the realization
  auto r = run_cli("simulate --config " + cfg.string() + " --seed 999 --out " +
                   (d / "s").string());
  REQUIRE(r.code == 0);
  CHECK(slurp(d / "s" / "trajectory.csv") != slurp(d / "a" / "trajectory.csv"));
}

TEST_CASE("simulate with a dead reservoir reproduces the conservative run") {
  const fs::path d = fresh_dir("dead");
  write_file(d, "dead.tab", "0 0\n50 0\n");
  const std::string common =
      R"("space":{"lambda":0.6},
         "potential":{"type":"harmonic","omega0":1.0},
         "sim":{"dt":0.001,"steps":1500,"stride":10,"x0":[0.5,0.1],"v0":[-0.2,0.3],)";
  auto cfg_a = write_file(d, "a.json",
                          std::string(R"({"mode":"simulate",)") + common +
                              R"("scheme":"route_a"},
            "susceptibility":{"type":"tabulated","file":")" + (d / "dead.tab").string() + R"("}})");
  auto cfg_c = write_file(d, "c.json",
                          std::string(R"({"mode":"simulate",)") + common +
                              R"("scheme":"conservative"}})");

  REQUIRE(run_cli("simulate --config " + cfg_a.string() + " --out " + (d / "a").string()).code == 0);
  REQUIRE(run_cli("simulate --config " + cfg_c.string() + " --out " + (d / "c").string()).code == 0);

  auto ra = read_csv(d / "a" / "trajectory.csv");
  auto rc = read_csv(d / "c" / "trajectory.csv");
  REQUIRE(ra.size() == rc.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i)
    for (std::size_t j = 0; j < ra[i].size(); ++j) {
      if (j == 6) continue;  // E_tot column is nan for both schemes
      worst = std::max(worst, std::abs(ra[i][j] - rc[i][j]));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("rates command writes spectra files; empty table for a dead spectrum") {
  const fs::path d = fresh_dir("rates");
  auto cfg = write_file(d, "cfg.json",
                        R"({"mode":"rates",
                            "space":{"lambda":0.05},
                            "potential":{"type":"harmonic","omega0":1.0},
                            "susceptibility":{"type":"ohmic_drude","eta":0.5,"omega_c":10},
                            "spectra":{"n_max":8,"initial":3,
                                       "occupation":{"type":"fixed","M":1.0}}})");
  auto r = run_cli("rates --config " + cfg.string() + " --out " + (d / "out").string());
  INFO(r.output);
  REQUIRE(r.code == 0);

  std::vector<std::string> header;
  auto eigrows = read_csv(d / "out" / "eigenvalues.csv", &header);
  REQUIRE(header == std::vector<std::string>{"index", "energy", "multiplet"});
  REQUIRE(eigrows.size() == 45);  // (8+1)(8+2)/2 states
  CHECK(std::abs(eigrows[0][1] - 1.0) < 0.05);

  auto raterows = read_csv(d / "out" / "rates.csv", &header);
  REQUIRE(header ==
          std::vector<std::string>{"m", "n", "j", "omega_nm", "V2", "Vp2", "Gamma_abs",
                                   "Gamma_emit"});
  REQUIRE(!raterows.empty());
  for (const auto& row : raterows) {
    CHECK(row[0] == 3.0);
    CHECK(row[2] >= 1.0);
    CHECK(row[2] <= 3.0);
    CHECK(std::max(row[6], row[7]) >= 1e-15);
  }
  const json m = json::parse(slurp(d / "out" / "manifest.json"));
  CHECK(m["achieved"]["max_eigen_residual"].get<double>() < 1e-10);

  // reservoir with no spectral weight: header-only table
  write_file(d, "dead.tab", "0 0\n50 0\n");
  auto cfg0 = write_file(d, "cfg0.json",
                         R"({"mode":"rates",
                             "potential":{"type":"harmonic","omega0":1.0},
                             "susceptibility":{"type":"tabulated","file":")" +
                             (d / "dead.tab").string() + R"("},
                             "spectra":{"n_max":6}})");
  REQUIRE(run_cli("rates --config " + cfg0.string() + " --out " + (d / "out0").string()).code == 0);
  CHECK(slurp(d / "out0" / "rates.csv") == "m,n,j,omega_nm,V2,Vp2,Gamma_abs,Gamma_emit\n");
}

TEST_CASE("noise-stats empirical covariance sits on the analytic value") {
  const fs::path d = fresh_dir("noise");
  auto cfg = write_file(d, "cfg.json",
                        R"({"mode":"noise-stats",
                            "space":{"lambda":0.5},
                            "susceptibility":{"type":"ohmic_drude","eta":0.5,"omega_c":10},
                            "bath":{"N":200,"omega_max":60},
                            "sim":{"seed":777,"T":1.0,"x0":[0.3,-0.2],"replicas":10000}})");
  auto r = run_cli("noise-stats --config " + cfg.string() + " --out " + (d / "out").string());
  INFO(r.output);
  REQUIRE(r.code == 0);

  std::vector<std::string> header;
  auto rows = read_csv(d / "out" / "noise_stats.csv", &header);
  REQUIRE(header ==
          std::vector<std::string>{"tau", "alpha", "beta", "empirical", "analytic", "stderr"});
  REQUIRE(rows.size() == 16);  // four default lags x four components
  double worst = 0.0;
  for (const auto& row : rows) {
    REQUIRE(row[5] > 0.0);
    worst = std::max(worst, std::abs(row[3] - row[4]) / row[5]);
  }
  INFO("worst deviation in stderr units: " << worst);
  CHECK(worst <= 3.0);
}

TEST_CASE("runtime failures exit 1 and leave no partial outputs") {
  const fs::path d = fresh_dir("fail");
  auto cfg = write_file(d, "cfg.json",
                        R"({"mode":"simulate",
                            "space":{"lambda":1.0},
                            "potential":{"type":"free"},
                            "sim":{"dt":0.001,"steps":4000,"x0":[0.0,0.0],"v0":[3.0,0.0],
                                   "scheme":"conservative","lambda_factor_max":50}})");
  auto r = run_cli("simulate --config " + cfg.string() + " --out " + (d / "out").string());
  CHECK(r.code == 1);
  CHECK(!r.output.empty());
  if (fs::exists(d / "out"))
    CHECK(fs::is_empty(d / "out"));
}

TEST_CASE("validate subcommand reports the named checks and passes") {
  auto r = run_cli("validate");
  INFO(r.output);
  REQUIRE(r.code == 0);
  int pass_lines = 0;
  std::stringstream ss(r.output);
  std::string line;
  while (std::getline(ss, line))
    if (line.rfind("PASS", 0) == 0) ++pass_lines;
  CHECK(pass_lines >= 12);
  CHECK(r.output.find("fdt-noise-kernel-consistency") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("corrupting the friction kernel trips the consistency gate") {
  gnomon::ValidationOptions opt;
  opt.kernel_mutator = [](gnomon::MemoryKernel& k) {
    for (auto& g : k.gamma) g = -g;
    for (auto& g : k.gamma_dot) g = -g;
  };
  auto rep = gnomon::run_validation(opt);
  bool fdt_failed = false;
  bool geometry_ok = false;
  for (const auto& c : rep.checks) {
    if (c.name == "fdt-noise-kernel-consistency") fdt_failed = !c.pass;
    if (c.name == "geometry-metric-inverse") geometry_ok = c.pass;
  }
  CHECK(fdt_failed);
  CHECK(geometry_ok);
  CHECK(!rep.all_pass());
}
