#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ppsync/controller.hpp"
#include "ppsync/graph.hpp"
#include "ppsync/ppf.hpp"

namespace ppsync {

/// Plant-side truth for one agent:
///   x' = A_m x + B_m u + Theta(t) x + f(x, t) + w(t)
/// Only known() is handed to the controller.
class AgentModel {
 public:
  struct Terms {
    // Theta(t) written row-major into an m*m buffer; empty means zero.
    std::function<void(double t, std::span<double> theta)> theta;
    std::function<void(std::span<const double> x, double t, std::span<double> f)> nonlinearity;
    std::function<void(double t, std::span<double> w)> disturbance;
  };

  AgentModel(KnownModel known, Terms terms);

  const KnownModel& known() const { return known_; }
  int dim() const { return known_.dim(); }

  /// Throws NonFiniteState if x, u or t is not finite.
  void derivative(std::span<const double> x, std::span<const double> u, double t,
                  std::span<double> dx) const;
  Eigen::VectorXd derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u, double t) const;

  /// Splits the unknown part into theta ||x||_inf + sigma with theta = Theta x / ||x||_inf
  /// (zero at x = 0) and sigma = f + w.
  void true_parameters(std::span<const double> x, double t, std::span<double> theta,
                       std::span<double> sigma) const;

  /// Theta(t) x alone, used for the boundedness audit.
  Eigen::MatrixXd theta_matrix(double t) const;

 private:
  void unknown_terms(std::span<const double> x, double t, std::span<double> theta_x,
                     std::span<double> rest) const;

  KnownModel known_;
  Terms terms_;
};

class LeaderModel {
 public:
  using Trajectory = std::function<void(double t, std::span<double> x0)>;

  LeaderModel(int dim, Trajectory trajectory);

  int dim() const { return dim_; }
  void state(double t, std::span<double> x0) const { trajectory_(t, x0); }

 private:
  int dim_;
  Trajectory trajectory_;
};

Eigen::VectorXd leader_trajectory(const LeaderModel& leader, double t);

// Serializable plant descriptions.

/// x_i' = x_i^{p_i} + u_i + a_i cos(t), p = (3, 2, 4, 1, 5). Agent 4 has the
/// linear term x_4 and is given A_m = 1 as its known model; the other agents
/// have A_m = 0 with the power term unknown.
struct Example1Plant {
  std::vector<double> amplitudes;  // a_i; empty means draw from the scenario seed
};

/// x_j' = A x_j + u_j + Theta_j(t) x_j + f_j(x_j, t) + D_j(t) with the printed
/// heterogeneity matrices. Row i of a, b, c is channel i, column j is agent j.
struct Example2Plant {
  Eigen::Matrix3d a_matrix;
  Eigen::MatrixXd a, b, c;  // 3 x n
};

/// x_i' = A_i x_i + B_i u_i + bias_i + amplitude_i cos(t).
struct LinearPlant {
  std::vector<Eigen::MatrixXd> a_m;
  std::vector<Eigen::MatrixXd> b_m;
  std::vector<Eigen::VectorXd> bias;
  std::vector<Eigen::VectorXd> cos_amplitude;
};

using PlantConfig = std::variant<Example1Plant, Example2Plant, LinearPlant>;

struct ConstantLeader {
  Eigen::VectorXd value;
};

/// x0_k(t) = amplitude_k cos(frequency_k t)
struct CosineLeader {
  Eigen::VectorXd amplitude;
  Eigen::VectorXd frequency;
};

using LeaderConfig = std::variant<ConstantLeader, CosineLeader>;

enum class ExecPolicy { Auto, Serial, Parallel };

struct SimSettings {
  double dt = 1e-4;
  double horizon = 10.0;
  int log_stride = 1;     // log every k-th integration step
  double blowup = 1e6;    // per-component divergence bound
  ExecPolicy exec = ExecPolicy::Auto;
};

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 0;
  Eigen::MatrixXd adjacency;
  Eigen::VectorXd pinning;
  PlantConfig plant;
  LeaderConfig leader;
  std::vector<PerformanceFunction> performance;  // one per agent channel, agent-major
  TransformSpec transform;
  ControllerGains gains;
  ModelBounds bounds;
  Eigen::VectorXd x_init;                        // agent-major stacking
  std::vector<double> theta_hat_init;            // empty means zeros
  std::vector<double> sigma_hat_init;
  SimSettings sim;

  int agents() const { return static_cast<int>(adjacency.rows()); }
  int state_dim() const;
};

struct Scenario {
  ScenarioConfig config;
  Digraph digraph;
  std::vector<AgentModel> agents;
  LeaderModel leader;

  int size() const { return digraph.size(); }
  int dim() const { return leader.dim(); }
};

/// Validates the configuration and instantiates the plant. Throws
/// InvalidArgument / DimensionMismatch naming the offending field.
Scenario build_scenario(ScenarioConfig config);

inline constexpr std::uint64_t kExample1Seed = 2017;

/// Amplitudes in [0, 1) from a 64-bit Mersenne Twister, portable across
/// standard libraries.
std::vector<double> example1_amplitudes(std::uint64_t seed, int count = 5);

ScenarioConfig example1_config(std::uint64_t seed = kExample1Seed);
ScenarioConfig example2_config();

Scenario scenario_example1(std::uint64_t seed = kExample1Seed);
Scenario scenario_example2();

}  // namespace ppsync
