#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ppsync/dynamics.hpp"
#include "ppsync/graph.hpp"

namespace ppsync {

/// Controller pipeline values at one right-hand-side evaluation, one entry
/// per agent channel (agent-major).
struct StageLog {
  std::vector<double> e, eps, r, rho, u;
  std::vector<double> leader;           // x0(t), one per channel
  std::vector<std::uint8_t> clamped;    // ratio hit the clamp threshold

  void resize(int agents, int dim);
};

/// Right-hand side of the coupled plant + estimate ODE.
///
/// The state z is laid out as [x | theta_hat | sigma_hat], each block
/// agents * dim long and agent-major. Every evaluation runs the controller
/// pipeline in order: local error, envelope, r factor, transformed error,
/// control, estimate rates.
class ClosedLoop {
 public:
  /// Agent counts at or above this run the fused kernel on OpenMP threads
  /// under ExecPolicy::Auto.
  static constexpr int kParallelThreshold = 64;

  explicit ClosedLoop(const Scenario& scenario);

  int agents() const { return agents_; }
  int dim() const { return dim_; }
  std::size_t block() const { return std::size_t(agents_) * dim_; }
  std::size_t state_size() const { return 3 * block(); }
  const GraphMatrices& matrices() const { return gm_; }
  const Scenario& scenario() const { return *scenario_; }

  /// Initial state vector built from the scenario.
  std::vector<double> initial_state() const;

  /// Freezes the delta roles of InitialSign from the errors at t = 0.
  void freeze_initial_signs(std::span<const double> z0);
  std::span<const double> initial_signs() const { return initial_sign_; }

  /// Fused per-agent kernel over the sparse neighbour lists; OpenMP-parallel
  /// over agents when `parallel` is set. Results do not depend on the thread count.
  void rhs(double t, std::span<const double> z, std::span<double> dz, StageLog& log,
           bool parallel) const;

  /// Serial reference: dense Kronecker error and the public controller API.
  void rhs_reference(double t, std::span<const double> z, std::span<double> dz,
                     StageLog& log) const;

  bool use_parallel() const;

 private:
  const Scenario* scenario_;
  int agents_;
  int dim_;
  GraphMatrices gm_;
  std::vector<int> row_start_;  // CSR over incoming edges
  std::vector<int> col_;
  std::vector<double> weight_;
  std::vector<double> initial_sign_;
};

}  // namespace ppsync
