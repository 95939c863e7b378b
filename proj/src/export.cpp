#include "ppsync/export.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ppsync/error.hpp"

namespace ppsync {

using json = nlohmann::ordered_json;

namespace {

std::string channel_name(const char* prefix, int agent, int channel) {
  return std::string(prefix) + "_" + std::to_string(agent + 1) + "_" + std::to_string(channel + 1);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json doubles(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, res.ptr};
}

void write_trajectory_csv(std::ostream& out, const SimRun& run, const ScenarioConfig& cfg) {
  const int n = run.agents;
  const int m = run.dim;
  const std::size_t width = std::size_t(n) * m;

  out << "# ppsync trajectory\n";
  out << "# scenario: " << run.scenario << '\n';
  out << "# agents: " << n << ", state_dim: " << m << '\n';
  out << "# variant: " << to_string(cfg.transform.variant) << ", delta_hi: "
      << format_number(cfg.transform.delta_hi) << ", delta_lo: " << format_number(cfg.transform.delta_lo)
      << ", xi: " << format_number(cfg.transform.xi) << '\n';
  out << "# gains: c=" << format_number(cfg.gains.c) << ", k=" << format_number(cfg.gains.k) << '\n';
  out << "# dt: " << format_number(run.dt) << ", log_dt: " << format_number(run.log_dt)
      << ", steps: " << run.steps << '\n';
  out << "# seed: " << cfg.seed << ", violations: " << run.violations.size() << '\n';
  out << "# V is diagnostic only (uses true plant parameters)\n";

  out << 't';
  for (const char* prefix : {"x", "u", "e", "eps", "rho"})
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) out << ',' << channel_name(prefix, i, k);
  out << ",V\n";

  const Series* blocks[] = {&run.states, &run.controls, &run.errors, &run.transformed, &run.rho};
  for (std::size_t r = 0; r < run.t.size(); ++r) {
    out << format_number(run.t[r]);
    for (const Series* s : blocks)
      for (std::size_t c = 0; c < width; ++c) out << ',' << format_number(s->at(r, c));
    out << ',' << format_number(r < run.lyapunov.size() ? run.lyapunov[r] : 0.0) << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const SimRun& run,
                          const ScenarioConfig& cfg) {
  auto out = open_out(path);
  write_trajectory_csv(out, run, cfg);
  finish(out, path);
}

void write_phase_csv(const std::filesystem::path& path, const SimRun& run, const ScenarioConfig& cfg) {
  auto out = open_out(path);
  const int n = run.agents;
  const int m = run.dim;
  out << "# ppsync phase plane\n";
  out << "# scenario: " << run.scenario << '\n';
  out << "# agents: " << n << ", state_dim: " << m << '\n';
  out << "# variant: " << to_string(cfg.transform.variant) << '\n';
  out << "# x_init:";
  for (Eigen::Index i = 0; i < cfg.x_init.size(); ++i) out << ' ' << format_number(cfg.x_init(i));
  out << '\n';
  out << "# dt: " << format_number(run.dt) << ", log_dt: " << format_number(run.log_dt) << '\n';
  out << "# seed: " << cfg.seed << '\n';
  out << "# columns: t, agent states, leader state\n";
  out << 't';
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) out << ',' << channel_name("x", i, k);
  for (int k = 0; k < m; ++k) out << ",x0_" << k + 1;
  out << '\n';
  for (std::size_t r = 0; r < run.t.size(); ++r) {
    out << format_number(run.t[r]);
    for (std::size_t c = 0; c < run.states.width(); ++c) out << ',' << format_number(run.states.at(r, c));
    for (std::size_t c = 0; c < run.leader.width(); ++c) out << ',' << format_number(run.leader.at(r, c));
    out << '\n';
  }
  finish(out, path);
}

json gain_report_json(const GainReport& g) {
  return json{{"lambda_min_Q", g.lambda_min_q},
              {"lambda_max_P", g.lambda_max_p},
              {"lambda_max_A", g.lambda_max_a},
              {"c", g.c},
              {"k", g.k},
              {"x_M", g.x_M},
              {"recommended_k", g.recommended_k},
              {"c_margin", g.margin},
              {"k_condition", g.k_condition},
              {"c_condition", g.c_condition}};
}

json run_report(const SimRun& run, const ScenarioConfig& cfg, std::optional<double> diverged_at) {
  json rep;
  rep["scenario"] = run.scenario;
  rep["seed"] = cfg.seed;
  rep["variant"] = std::string(to_string(cfg.transform.variant));
  rep["agents"] = run.agents;
  rep["state_dim"] = run.dim;
  rep["dt"] = run.dt;
  rep["horizon"] = cfg.sim.horizon;
  rep["steps"] = run.steps;
  rep["status"] = diverged_at ? "diverged" : "completed";
  if (diverged_at) rep["diverged_at"] = *diverged_at;
  rep["gain_conditions"] = gain_report_json(run.diagnostics);
  rep["sigma_min_LB"] = run.sigma_min_lb;

  json viol = json::array();
  for (const auto& v : run.violations)
    viol.push_back(json{{"t", v.t}, {"agent", v.agent + 1}, {"channel", v.channel + 1}});
  rep["violation_count"] = run.violations.size();
  rep["violations"] = std::move(viol);

  rep["envelope"] = json{{"min_e_over_rho", doubles(run.envelope.min_ratio)},
                         {"max_e_over_rho", doubles(run.envelope.max_ratio)}};

  if (run.t.size() >= 2) {
    const auto chat = chattering(run);
    rep["chatter"] = json{{"total_variation", doubles(chat.total_variation)},
                          {"max_step_jump", doubles(chat.max_step_jump)}};
  }
  if (!run.t.empty()) {
    const auto ss = steady_state_report(run, 0.2);
    rep["steady_state"] = json{{"tail_fraction", 0.2},
                               {"window_start", ss.window_start},
                               {"max_abs_error", doubles(ss.max_abs_error)},
                               {"bound", doubles(ss.bound)},
                               {"max_abs_tracking", doubles(ss.max_abs_tracking)}};
  }
  if (!run.lyapunov.empty()) {
    rep["diagnostic_only"] = json{{"note", "computed from true plant parameters"},
                                  {"lyapunov_initial", run.lyapunov.front()},
                                  {"lyapunov_final", run.lyapunov.back()}};
  }
  return rep;
}

std::string plot_recipe(const SimRun& run, const std::string& csv_name) {
  std::ostringstream out;
  const int n = run.agents;
  const int m = run.dim;
  out << "# plotting recipe for " << csv_name << '\n';
  out << "# skip " << kCsvHeaderLines << " comment lines; the next row holds column names\n";
  out << "file = " << csv_name << '\n';
  out << "x_axis = t\n";
  for (const char* prefix : {"x", "u", "e", "eps"}) {
    out << "panel " << prefix << " =";
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < m; ++k) out << ' ' << channel_name(prefix, i, k);
    out << '\n';
  }
  out << "envelope_upper = rho_*_* scaled by delta_hi\n";
  out << "envelope_lower = rho_*_* scaled by -delta_lo\n";
  out << "panel V = V\n";
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace ppsync
