#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ppsync/controller.hpp"
#include "ppsync/dynamics.hpp"
#include "ppsync/error.hpp"
#include "ppsync/kernel.hpp"

namespace ppsync {

/// Row-major table with a fixed number of columns per logged time point.
class Series {
 public:
  Series() = default;
  explicit Series(std::size_t width) : width_(width) {}

  std::size_t width() const { return width_; }
  std::size_t rows() const { return width_ ? data_.size() / width_ : 0; }
  std::span<const double> row(std::size_t k) const { return {data_.data() + k * width_, width_}; }
  double at(std::size_t k, std::size_t col) const { return data_[k * width_ + col]; }
  void push(std::span<const double> values) { data_.insert(data_.end(), values.begin(), values.end()); }

  bool operator==(const Series&) const = default;

 private:
  std::size_t width_ = 0;
  std::vector<double> data_;
};

struct ViolationEvent {
  double t = 0.0;
  int agent = 0;    // 0-based
  int channel = 0;  // 0-based

  bool operator==(const ViolationEvent&) const = default;
};

/// Extremes of e / rho per channel over every integration step, logged or not.
struct EnvelopeAudit {
  std::vector<double> min_ratio;
  std::vector<double> max_ratio;

  bool operator==(const EnvelopeAudit&) const = default;
};

struct SimRun {
  std::string scenario;
  int agents = 0;
  int dim = 0;
  double dt = 0.0;      // integration step
  double log_dt = 0.0;  // spacing of the logged time grid
  std::uint64_t steps = 0;

  std::vector<double> t;
  Series states, theta_hat, sigma_hat, controls, errors, transformed, rho, leader;
  std::vector<double> lyapunov;  // diagnostic only: uses the true plant parameters
  std::vector<ViolationEvent> violations;
  EnvelopeAudit envelope;
  GainReport diagnostics;
  std::vector<double> steady_bound;  // delta_hi * rho_inf per channel
  double sigma_min_lb = 0.0;

  bool operator==(const SimRun&) const = default;
};

class DivergedError : public Error {
 public:
  DivergedError(double time, SimRun partial);
  double time() const { return time_; }
  const SimRun& partial() const { return partial_; }

 private:
  double time_;
  SimRun partial_;
};

enum class KernelKind { Fused, Reference };

/// Classical RK4 on the coupled state. The controller pipeline is
/// re-evaluated inside each stage.
class Integrator {
 public:
  Integrator(const ClosedLoop& loop, KernelKind kind = KernelKind::Fused);

  /// Advances z in place by dt. `start` receives the stage-1 pipeline values
  /// (those at time t); `clamped_any` marks channels clamped in any stage.
  void step(double t, std::span<double> z, double dt, StageLog& start,
            std::vector<std::uint8_t>& clamped_any);

  /// Pipeline values at (t, z) without advancing.
  void evaluate(double t, std::span<const double> z, StageLog& log);

 private:
  void eval(double t, std::span<const double> z, std::span<double> dz, StageLog& log);

  const ClosedLoop* loop_;
  KernelKind kind_;
  bool parallel_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
  StageLog scratch_;
};

struct StepResult {
  std::vector<double> z_next;
  StageLog log;
  std::vector<ViolationEvent> violations;
};

/// One RK4 step from (t, z).
StepResult step(const ClosedLoop& loop, double t, std::span<const double> z, double dt,
                KernelKind kind = KernelKind::Fused);

/// Integrates the scenario over [0, horizon]. Throws DivergedError carrying
/// the logged prefix when a state component leaves the blow-up bound.
SimRun run(const Scenario& scenario, KernelKind kind = KernelKind::Fused);

struct ChatterMetric {
  std::vector<double> total_variation;  // per control channel
  std::vector<double> max_step_jump;
};

/// Throws TooShort for fewer than two logged points.
ChatterMetric chattering(const SimRun& run);

struct SteadyStateReport {
  double window_start = 0.0;
  std::vector<double> max_abs_error;     // per channel, over the tail window
  std::vector<double> bound;             // delta_hi * rho_inf
  std::vector<double> max_abs_tracking;  // max |x - x0| over the window
};

SteadyStateReport steady_state_report(const SimRun& run, double tail_fraction);

}  // namespace ppsync
