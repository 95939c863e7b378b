#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ppsync/commands.hpp"
#include "ppsync/error.hpp"
#include "ppsync/export.hpp"
#include "ppsync/scenario_io.hpp"

using namespace ppsync;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ppsync");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ppsync_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string source(const std::string& rel) { return std::string(PPSYNC_SOURCE_DIR) + "/" + rel; }

}  // namespace

TEST_CASE("scenario file round trip") {
  for (const auto& name : builtin_names()) {
    const auto cfg = load_scenario(name);
    const auto back = scenario_from_json(scenario_to_json(cfg));
    CHECK(scenario_to_json(back) == scenario_to_json(cfg));
  }
  const auto dir = scratch("dump");
  REQUIRE(cli({"dump-scenario", "--scenario", "example2", "--out", dir.string()}).code == 0);
  const auto loaded = load_scenario((dir / "example2.json").string());
  CHECK(scenario_to_json(loaded) == scenario_to_json(example2_config()));
  CHECK(nlohmann::json::parse(slurp(dir / "example2.json"))["schema_version"] == kSchemaVersion);
}

TEST_CASE("overrides") {
  const auto base = example1_config();
  const auto cfg = apply_overrides(base, {{"gains.c", "120"},
                                          {"transform.variant", "sign_switched"},
                                          {"sim.dt", "5e-5"},
                                          {"graph.pinning.0", "0.5"}});
  CHECK(lookup(cfg, "gains.c") == "120.0");
  CHECK(cfg.gains.c == 120.0);
  CHECK(cfg.transform.variant == TransformVariant::SignSwitched);
  CHECK(cfg.sim.dt == 5e-5);
  CHECK(cfg.pinning(0) == 0.5);
  CHECK(lookup(apply_overrides(base, {{"performance.rho_inf", "0.1"}}), "performance.rho_inf") == "0.1");

  const auto reseeded = apply_overrides(base, {{"seed", "5"}});
  CHECK(std::get<Example1Plant>(reseeded.plant).amplitudes == example1_amplitudes(5));

  try {
    apply_overrides(base, {{"gains.zeta", "1"}});
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("gains.zeta") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_overrides(base, {{"gains.c", "high"}}), Error);
  CHECK_THROWS_AS(apply_overrides(base, {{"transform.variant", "tanh"}}), Error);
  CHECK_THROWS_AS(parse_override("gains.c"), Error);
}

TEST_CASE("missing scenario is a config error and writes nothing") {
  const auto dir = scratch("missing");
  const auto r = cli({"run", "--scenario", "missing.toml", "--out", dir.string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("missing.toml") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("unknown override key names the key") {
  const auto r = cli({"check", "--scenario", "example1", "--set", "gains.q=3"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("gains.q") != std::string::npos);
}

TEST_CASE("check") {
  auto r = cli({"check", "--scenario", "example1"});
  REQUIRE(r.code == 0);
  auto rep = nlohmann::json::parse(r.out);
  CHECK(rep["gain_conditions"]["k_condition"] == false);

  r = cli({"check", "--scenario", source("scenarios/two_node_tuned.json")});
  REQUIRE(r.code == 0);
  rep = nlohmann::json::parse(r.out);
  CHECK(rep["gain_conditions"]["k_condition"] == true);
  CHECK(rep["gain_conditions"]["c_condition"] == true);

  r = cli({"check", "--scenario", "example1", "--set", "graph.pinning.2=0"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("NoPinning") != std::string::npos);
}

TEST_CASE("run writes a trajectory table and a report") {
  const auto dir = scratch("run");
  const auto r = cli({"run", "--scenario", "example2", "--horizon", "0.05", "--out", dir.string(), "--emit",
                      "trajectories,report,plot-script"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "example2.csv");
  std::istringstream lines(csv);
  std::string line;
  for (int k = 0; k < kCsvHeaderLines; ++k) {
    std::getline(lines, line);
    CHECK(line.rfind("# ", 0) == 0);
  }
  std::getline(lines, line);
  CHECK(line.rfind("t,x_1_1,x_1_2,", 0) == 0);
  CHECK(line.size() > 2);
  CHECK(line.substr(line.size() - 2) == ",V");
  std::getline(lines, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 1 + 5 * 15);
  const auto first = line.find(',');
  CHECK(std::stod(line.substr(first + 1, line.find(',', first + 1) - first - 1)) == 1.6399);

  const auto rep = nlohmann::json::parse(slurp(dir / "example2_report.json"));
  CHECK(rep["status"] == "completed");
  CHECK(rep["violation_count"] == 0);
  CHECK(rep.contains("gain_conditions"));
  CHECK(rep["chatter"]["total_variation"].size() == 15);
  CHECK(rep["steady_state"]["bound"][0] == doctest::Approx(0.35));
  CHECK(rep["diagnostic_only"].contains("lyapunov_initial"));
  CHECK(fs::exists(dir / "example2_plot.txt"));
}

TEST_CASE("full-precision numbers") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("outputs are reproducible byte for byte") {
  const auto a = scratch("repro_a"), b = scratch("repro_b");
  for (const auto& d : {a, b})
    REQUIRE(cli({"run", "--scenario", "example2", "--horizon", "0.02", "--out", d.string()}).code == 0);
  CHECK(slurp(a / "example2.csv") == slurp(b / "example2.csv"));
  CHECK(slurp(a / "example2_report.json") == slurp(b / "example2_report.json"));
}

TEST_CASE("divergence exits with code 3 and still reports") {
  const auto dir = scratch("diverge");
  const auto r = cli({"run", "--scenario", "example1", "--set", "gains.c=0.001", "--set", "initial.x.4=4",
                      "--out", dir.string()});
  CHECK(r.code == kExitDiverged);
  const auto rep = nlohmann::json::parse(slurp(dir / "example1_report.json"));
  CHECK(rep["status"] == "diverged");
}

TEST_CASE("compare with identical variants gives identical metrics") {
  const auto dir = scratch("compare");
  const auto r = cli({"compare", "--scenario", "example2", "--horizon", "0.05", "--variants",
                      "erf_smoothed,erf_smoothed", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const auto rep = nlohmann::json::parse(slurp(dir / "example2_compare.json"));
  CHECK(rep["left"]["total_variation"] == rep["right"]["total_variation"]);
  CHECK(rep["left"]["steady_state_max_abs_error"] == rep["right"]["steady_state_max_abs_error"]);
  CHECK(rep["right_smaller_on_every_channel"] == false);
}

TEST_CASE("phase plane writes one file per initial condition") {
  for (int n : {0, 2}) {
    const auto dir = scratch("phase" + std::to_string(n));
    const auto r = cli({"phase-plane", "--scenario", "example2", "--horizon", "0.05", "--perturbations",
                        std::to_string(n), "--out", dir.string()});
    REQUIRE(r.code == 0);
    int files = 0;
    for (const auto& entry : fs::directory_iterator(dir)) files += entry.path().extension() == ".csv";
    CHECK(files == n + 1);
  }
}

TEST_CASE("I/O failure exits with code 4") {
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  const auto r = cli({"run", "--scenario", "example2", "--horizon", "0.01", "--out", (blocker / "sub").string()});
  CHECK(r.code == kExitIo);
}

TEST_CASE("executable exit codes") {
  const char* exe = std::getenv("PPSYNC_CLI");
  if (exe == nullptr) return;
  const std::string bin = std::string("\"") + exe + "\"";
  CHECK(std::system((bin + " check --scenario example1 > /dev/null").c_str()) == 0);
  const int bad = std::system((bin + " check --scenario nowhere.json 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == kExitConfig);
}
