#include "ppsync/commands.hpp"

#include <exception>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppsync/error.hpp"
#include "ppsync/export.hpp"
#include "ppsync/scenario_io.hpp"
#include "ppsync/sim.hpp"

namespace ppsync {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::string scenario = "example1";
  std::vector<std::string> sets;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::optional<double> horizon;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_out) {
  cmd->add_option("--scenario", o.scenario, "builtin name (example1, example2) or scenario file");
  cmd->add_option("--set", o.sets, "override a scenario key, key=value (repeatable)");
  auto* out = cmd->add_option("--out", o.out_dir, "output directory");
  if (needs_out) out->default_val("out");
  cmd->add_option("--seed", o.seed, "scenario seed");
  cmd->add_option("--dt", o.dt, "integration step");
  cmd->add_option("--horizon", o.horizon, "simulated time span");
}

ScenarioConfig resolve(const CommonOptions& o) {
  ScenarioConfig cfg = load_scenario(o.scenario);
  std::vector<Override> overrides;
  if (o.seed) overrides.push_back({"seed", std::to_string(*o.seed)});
  if (o.dt) overrides.push_back({"sim.dt", format_number(*o.dt)});
  if (o.horizon) overrides.push_back({"sim.horizon", format_number(*o.horizon)});
  for (const auto& s : o.sets) overrides.push_back(parse_override(s));
  return apply_overrides(cfg, overrides);
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

struct Outcome {
  std::optional<SimRun> run;
  std::optional<double> diverged_at;
  std::exception_ptr error;
};

Outcome simulate(const ScenarioConfig& cfg) {
  Outcome o;
  try {
    const Scenario sc = build_scenario(cfg);
    o.run = run(sc);
  } catch (const DivergedError& e) {
    o.run = e.partial();
    o.diverged_at = e.time();
  } catch (...) {
    o.error = std::current_exception();
  }
  return o;
}

json side_summary(const Outcome& o) {
  json s;
  s["status"] = o.diverged_at ? "diverged" : "completed";
  if (o.diverged_at) s["diverged_at"] = *o.diverged_at;
  const SimRun& r = *o.run;
  s["violation_count"] = r.violations.size();
  if (r.t.size() >= 2) {
    const auto chat = chattering(r);
    s["total_variation"] = chat.total_variation;
    s["max_step_jump"] = chat.max_step_jump;
  }
  if (!r.t.empty()) {
    const auto ss = steady_state_report(r, 0.2);
    s["steady_state_max_abs_error"] = ss.max_abs_error;
    s["steady_state_bound"] = ss.bound;
  }
  return s;
}

int cmd_run(const CommonOptions& o, const std::vector<std::string>& emit, std::ostream& out) {
  const ScenarioConfig cfg = resolve(o);
  build_scenario(cfg);
  const fs::path dir = prepare_dir(o.out_dir);
  Outcome res = simulate(cfg);
  if (res.error) std::rethrow_exception(res.error);
  const SimRun& r = *res.run;

  const auto wants = [&](std::string_view what) {
    return std::find(emit.begin(), emit.end(), what) != emit.end();
  };
  const std::string csv_name = cfg.name + ".csv";
  if (wants("trajectories")) write_trajectory_csv(dir / csv_name, r, cfg);
  if (wants("report")) write_text(dir / (cfg.name + "_report.json"), run_report(r, cfg, res.diverged_at).dump(2) + "\n");
  if (wants("phase_plane")) write_phase_csv(dir / (cfg.name + "_phase.csv"), r, cfg);
  if (wants("plot-script")) write_text(dir / (cfg.name + "_plot.txt"), plot_recipe(r, csv_name));

  out << cfg.name << " [" << to_string(cfg.transform.variant) << "]: ";
  if (res.diverged_at) {
    out << "diverged at t = " << format_number(*res.diverged_at) << '\n';
    return kExitDiverged;
  }
  out << r.t.size() << " logged points, " << r.violations.size() << " violations\n";
  return kExitOk;
}

int cmd_compare(const CommonOptions& o, const std::vector<std::string>& variants, std::ostream& out) {
  if (variants.size() != 2) throw Error(ErrorCode::ConfigError, "--variants takes exactly two names");
  const ScenarioConfig base = resolve(o);
  std::vector<ScenarioConfig> cfgs;
  for (const auto& v : variants) {
    ScenarioConfig c = base;
    try {
      c.transform.variant = parse_variant(v);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("--variants: ") + e.what());
    }
    build_scenario(c);
    cfgs.push_back(std::move(c));
  }
  const fs::path dir = prepare_dir(o.out_dir);

  std::vector<Outcome> results(2);
#pragma omp parallel for schedule(static, 1)
  for (int i = 0; i < 2; ++i) results[i] = simulate(cfgs[i]);
  for (const auto& r : results)
    if (r.error) std::rethrow_exception(r.error);

  json rep;
  rep["scenario"] = base.name;
  rep["seed"] = base.seed;
  rep["left"] = json{{"variant", variants[0]}};
  rep["right"] = json{{"variant", variants[1]}};
  rep["left"].update(side_summary(results[0]));
  rep["right"].update(side_summary(results[1]));
  const bool both = !results[0].diverged_at && !results[1].diverged_at;
  if (both && results[0].run->t.size() >= 2) {
    const auto a = chattering(*results[0].run).total_variation;
    const auto b = chattering(*results[1].run).total_variation;
    std::vector<double> ratio(a.size());
    bool right_smaller = true;
    for (std::size_t c = 0; c < a.size(); ++c) {
      ratio[c] = b[c] > 0.0 ? a[c] / b[c] : 0.0;
      right_smaller = right_smaller && b[c] < a[c];
    }
    rep["tv_ratio_left_over_right"] = ratio;
    rep["right_smaller_on_every_channel"] = right_smaller;
  }
  write_text(dir / (base.name + "_compare.json"), rep.dump(2) + "\n");
  out << rep.dump(2) << '\n';
  return both ? kExitOk : kExitDiverged;
}

int cmd_check(const CommonOptions& o, std::ostream& out) {
  const ScenarioConfig cfg = resolve(o);
  const Scenario sc = build_scenario(cfg);
  const GraphMatrices gm = build_matrices(sc.digraph);
  const GainReport g = check_gain_conditions(gm, cfg.gains, cfg.bounds, sc.digraph.adjacency());
  json rep;
  rep["scenario"] = cfg.name;
  rep["gain_conditions"] = gain_report_json(g);
  rep["q"] = std::vector<double>(gm.q.data(), gm.q.data() + gm.q.size());
  rep["sigma_min_LB"] = gm.sigma_min;
  rep["strongly_connected"] = is_strongly_connected(sc.digraph);
  out << rep.dump(2) << '\n';
  if (!o.out_dir.empty()) {
    const fs::path dir = prepare_dir(o.out_dir);
    write_text(dir / (cfg.name + "_check.json"), rep.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_phase_plane(const CommonOptions& o, int perturbations, double scale, std::ostream& out) {
  if (perturbations < 0) throw Error(ErrorCode::ConfigError, "--perturbations must be non-negative");
  if (!(scale >= 0.0)) throw Error(ErrorCode::ConfigError, "--perturb-scale must be non-negative");
  const ScenarioConfig base = resolve(o);
  build_scenario(base);

  std::vector<ScenarioConfig> cfgs(perturbations + 1, base);
  std::mt19937_64 gen(base.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 1; k <= perturbations; ++k)
    for (Eigen::Index j = 0; j < base.x_init.size(); ++j) cfgs[k].x_init(j) += scale * unit(gen);

  const fs::path dir = prepare_dir(o.out_dir);
  std::vector<Outcome> results(cfgs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < int(cfgs.size()); ++k) results[k] = simulate(cfgs[k]);

  bool diverged = false;
  json summary = json::array();
  for (std::size_t k = 0; k < results.size(); ++k) {
    if (results[k].error) std::rethrow_exception(results[k].error);
    const SimRun& r = *results[k].run;
    char name[32];
    std::snprintf(name, sizeof name, "phase_%03zu.csv", k);
    write_phase_csv(dir / name, r, cfgs[k]);
    json s{{"file", name}, {"status", results[k].diverged_at ? "diverged" : "completed"}};
    if (results[k].diverged_at) diverged = true;
    if (!r.t.empty()) {
      const auto ss = steady_state_report(r, 0.2);
      s["tail_max_abs_error"] = ss.max_abs_error;
      s["tail_max_abs_tracking"] = ss.max_abs_tracking;
    }
    summary.push_back(std::move(s));
  }
  out << summary.dump(2) << '\n';
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_dump(const CommonOptions& o, std::ostream& out) {
  const ScenarioConfig cfg = resolve(o);
  if (o.out_dir.empty()) {
    out << scenario_to_json(cfg).dump(2) << '\n';
  } else {
    const fs::path dir = prepare_dir(o.out_dir);
    save_scenario(cfg, dir / (cfg.name + ".json"));
  }
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError: return kExitIo;
    case ErrorCode::Diverged:
    case ErrorCode::NonFiniteState: return kExitDiverged;
    default: return kExitConfig;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed adaptive synchronization under prescribed performance"};
  app.require_subcommand(1);

  CommonOptions run_o, cmp_o, chk_o, pp_o, dump_o;
  std::vector<std::string> emit{"trajectories", "report"};
  std::vector<std::string> variants{"sign_switched", "erf_smoothed"};
  int perturbations = 4;
  double perturb_scale = 0.5;

  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and export trajectories and a report");
  add_common(run_cmd, run_o, true);
  run_cmd->add_option("--emit", emit, "outputs: trajectories, report, phase_plane, plot-script")
      ->check(CLI::IsMember({"trajectories", "report", "phase_plane", "plot-script"}))
      ->delimiter(',');

  auto* cmp_cmd = app.add_subcommand("compare", "paired runs under two transform variants");
  add_common(cmp_cmd, cmp_o, true);
  cmp_cmd->add_option("--variants", variants, "two variant names")->delimiter(',');

  auto* chk_cmd = app.add_subcommand("check", "gain-condition report");
  add_common(chk_cmd, chk_o, false);

  auto* pp_cmd = app.add_subcommand("phase-plane", "trajectories from perturbed initial conditions");
  add_common(pp_cmd, pp_o, true);
  pp_cmd->add_option("--perturbations", perturbations, "number of perturbed initial conditions");
  pp_cmd->add_option("--perturb-scale", perturb_scale, "half-width of the uniform perturbation");

  auto* dump_cmd = app.add_subcommand("dump-scenario", "write the effective scenario file");
  add_common(dump_cmd, dump_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run_o, emit, out);
    if (*cmp_cmd) return cmd_compare(cmp_o, variants, out);
    if (*chk_cmd) return cmd_check(chk_o, out);
    if (*pp_cmd) return cmd_phase_plane(pp_o, perturbations, perturb_scale, out);
    if (*dump_cmd) return cmd_dump(dump_o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace ppsync
