#include "ppsync/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ppsync {

DivergedError::DivergedError(double time, SimRun partial)
    : Error(ErrorCode::Diverged, "state left the blow-up bound at t = " + std::to_string(time)),
      time_(time),
      partial_(std::move(partial)) {}

Integrator::Integrator(const ClosedLoop& loop, KernelKind kind)
    : loop_(&loop), kind_(kind), parallel_(loop.use_parallel()) {
  const std::size_t len = loop.state_size();
  k1_.resize(len);
  k2_.resize(len);
  k3_.resize(len);
  k4_.resize(len);
  tmp_.resize(len);
  scratch_.resize(loop.agents(), loop.dim());
}

void Integrator::eval(double t, std::span<const double> z, std::span<double> dz, StageLog& log) {
  if (kind_ == KernelKind::Fused) loop_->rhs(t, z, dz, log, parallel_);
  else loop_->rhs_reference(t, z, dz, log);
}

void Integrator::evaluate(double t, std::span<const double> z, StageLog& log) {
  eval(t, z, k1_, log);
}

void Integrator::step(double t, std::span<double> z, double dt, StageLog& start,
                      std::vector<std::uint8_t>& clamped_any) {
  const std::size_t len = z.size();
  const double half = 0.5 * dt;

  eval(t, z, k1_, start);
  clamped_any = start.clamped;
  auto merge = [&clamped_any](const StageLog& s) {
    for (std::size_t k = 0; k < clamped_any.size(); ++k) clamped_any[k] |= s.clamped[k];
  };

  for (std::size_t j = 0; j < len; ++j) tmp_[j] = z[j] + half * k1_[j];
  eval(t + half, tmp_, k2_, scratch_);
  merge(scratch_);
  for (std::size_t j = 0; j < len; ++j) tmp_[j] = z[j] + half * k2_[j];
  eval(t + half, tmp_, k3_, scratch_);
  merge(scratch_);
  for (std::size_t j = 0; j < len; ++j) tmp_[j] = z[j] + dt * k3_[j];
  eval(t + dt, tmp_, k4_, scratch_);
  merge(scratch_);

  for (std::size_t j = 0; j < len; ++j)
    z[j] += dt / 6.0 * (k1_[j] + 2.0 * k2_[j] + 2.0 * k3_[j] + k4_[j]);
}

namespace {

void append_violations(std::vector<ViolationEvent>& out, double t,
                       const std::vector<std::uint8_t>& clamped, int dim) {
  for (std::size_t k = 0; k < clamped.size(); ++k)
    if (clamped[k]) out.push_back({t, static_cast<int>(k) / dim, static_cast<int>(k) % dim});
}

}  // namespace

StepResult step(const ClosedLoop& loop, double t, std::span<const double> z, double dt,
                KernelKind kind) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "step needs dt > 0");
  Integrator integ(loop, kind);
  StepResult out;
  out.z_next.assign(z.begin(), z.end());
  out.log.resize(loop.agents(), loop.dim());
  std::vector<std::uint8_t> clamped;
  integ.step(t, out.z_next, dt, out.log, clamped);
  append_violations(out.violations, t, clamped, loop.dim());
  return out;
}

namespace {

class Recorder {
 public:
  Recorder(const Scenario& scenario, const ClosedLoop& loop, SimRun& run)
      : scenario_(scenario), loop_(loop), run_(run) {
    const std::size_t nm = loop.block();
    for (Series* s : {&run.states, &run.theta_hat, &run.sigma_hat, &run.controls, &run.errors,
                      &run.transformed, &run.rho})
      *s = Series(nm);
    run.leader = Series(loop.dim());
    run.envelope.min_ratio.assign(nm, std::numeric_limits<double>::infinity());
    run.envelope.max_ratio.assign(nm, -std::numeric_limits<double>::infinity());
    truth_theta_.resize(nm);
    truth_sigma_.resize(nm);
    adaptive_ = AdaptiveState(loop.agents(), loop.dim());
  }

  void audit(const StageLog& log) {
    auto& env = run_.envelope;
    for (std::size_t k = 0; k < log.e.size(); ++k) {
      const double ratio = log.e[k] / log.rho[k];
      env.min_ratio[k] = std::min(env.min_ratio[k], ratio);
      env.max_ratio[k] = std::max(env.max_ratio[k], ratio);
    }
  }

  void record(double t, std::span<const double> z, const StageLog& log) {
    const std::size_t nm = loop_.block();
    const int m = loop_.dim();
    run_.t.push_back(t);
    run_.states.push(z.subspan(0, nm));
    run_.theta_hat.push(z.subspan(nm, nm));
    run_.sigma_hat.push(z.subspan(2 * nm, nm));
    run_.controls.push(log.u);
    run_.errors.push(log.e);
    run_.transformed.push(log.eps);
    run_.rho.push(log.rho);
    run_.leader.push(log.leader);

    for (int i = 0; i < loop_.agents(); ++i) {
      const std::size_t base = std::size_t(i) * m;
      scenario_.agents[i].true_parameters(z.subspan(base, m), t,
                                          std::span(truth_theta_).subspan(base, m),
                                          std::span(truth_sigma_).subspan(base, m));
    }
    std::copy(z.begin() + nm, z.begin() + 2 * nm, adaptive_.theta_hat.begin());
    std::copy(z.begin() + 2 * nm, z.begin() + 3 * nm, adaptive_.sigma_hat.begin());
    run_.lyapunov.push_back(lyapunov_value(log.eps, adaptive_, truth_theta_, truth_sigma_,
                                           loop_.matrices(), scenario_.config.gains));
  }

 private:
  const Scenario& scenario_;
  const ClosedLoop& loop_;
  SimRun& run_;
  std::vector<double> truth_theta_, truth_sigma_;
  AdaptiveState adaptive_;
};

bool within_bound(std::span<const double> z, double bound) {
  for (double v : z)
    if (!(std::abs(v) <= bound)) return false;
  return true;
}

}  // namespace

SimRun run(const Scenario& scenario, KernelKind kind) {
  const auto& cfg = scenario.config;
  ClosedLoop loop(scenario);

  SimRun out;
  out.scenario = cfg.name;
  out.agents = loop.agents();
  out.dim = loop.dim();
  out.dt = cfg.sim.dt;
  out.log_dt = cfg.sim.dt * cfg.sim.log_stride;
  out.diagnostics = check_gain_conditions(loop.matrices(), cfg.gains, cfg.bounds,
                                          scenario.digraph.adjacency());
  out.sigma_min_lb = loop.matrices().sigma_min;
  for (const auto& pf : cfg.performance) out.steady_bound.push_back(cfg.transform.delta_hi * pf.rho_inf);

  std::vector<double> z = loop.initial_state();
  if (cfg.transform.variant == TransformVariant::InitialSign) loop.freeze_initial_signs(z);

  Recorder rec(scenario, loop, out);
  Integrator integ(loop, kind);
  StageLog log;
  log.resize(loop.agents(), loop.dim());
  std::vector<std::uint8_t> clamped;

  const auto total = static_cast<std::uint64_t>(std::llround(cfg.sim.horizon / cfg.sim.dt));
  const auto stride = static_cast<std::uint64_t>(cfg.sim.log_stride);
  std::vector<double> z_start(z.size());
  for (std::uint64_t k = 0; k < total; ++k) {
    const double t = static_cast<double>(k) * cfg.sim.dt;
    const bool logged = k % stride == 0;
    if (logged) z_start = z;
    try {
      integ.step(t, z, cfg.sim.dt, log, clamped);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::NonFiniteState) throw;
      throw DivergedError(t, std::move(out));
    }
    rec.audit(log);
    if (logged) rec.record(t, z_start, log);
    append_violations(out.violations, t, clamped, loop.dim());
    out.steps = k + 1;
    if (!within_bound(z, cfg.sim.blowup))
      throw DivergedError(static_cast<double>(k + 1) * cfg.sim.dt, std::move(out));
  }

  const double t_end = static_cast<double>(total) * cfg.sim.dt;
  integ.evaluate(t_end, z, log);
  rec.audit(log);
  if (total % stride == 0) rec.record(t_end, z, log);
  append_violations(out.violations, t_end, log.clamped, loop.dim());
  return out;
}

ChatterMetric chattering(const SimRun& run) {
  const std::size_t rows = run.controls.rows();
  if (rows < 2) throw Error(ErrorCode::TooShort, "chattering needs at least two logged points");
  const std::size_t width = run.controls.width();
  ChatterMetric out;
  out.total_variation.assign(width, 0.0);
  out.max_step_jump.assign(width, 0.0);
  for (std::size_t k = 1; k < rows; ++k) {
    for (std::size_t c = 0; c < width; ++c) {
      const double jump = std::abs(run.controls.at(k, c) - run.controls.at(k - 1, c));
      out.total_variation[c] += jump;
      out.max_step_jump[c] = std::max(out.max_step_jump[c], jump);
    }
  }
  return out;
}

SteadyStateReport steady_state_report(const SimRun& run, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "tail_fraction must lie in (0, 1]");
  if (run.t.empty()) throw Error(ErrorCode::TooShort, "steady-state report of an empty run");
  SteadyStateReport rep;
  const double t0 = run.t.front();
  const double t1 = run.t.back();
  rep.window_start = t1 - tail_fraction * (t1 - t0);
  const std::size_t width = run.errors.width();
  rep.max_abs_error.assign(width, 0.0);
  rep.max_abs_tracking.assign(width, 0.0);
  rep.bound = run.steady_bound;
  const int m = run.dim;
  for (std::size_t k = 0; k < run.t.size(); ++k) {
    if (run.t[k] < rep.window_start) continue;
    for (std::size_t c = 0; c < width; ++c) {
      rep.max_abs_error[c] = std::max(rep.max_abs_error[c], std::abs(run.errors.at(k, c)));
      const double track = run.states.at(k, c) - run.leader.at(k, c % m);
      rep.max_abs_tracking[c] = std::max(rep.max_abs_tracking[c], std::abs(track));
    }
  }
  return rep;
}

}  // namespace ppsync
