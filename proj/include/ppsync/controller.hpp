#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ppsync/graph.hpp"

namespace ppsync {

struct ControllerGains {
  double c = 100.0;            // transformed-error feedback
  double k = 0.8;              // sigma-modification leak
  std::vector<double> gamma;   // adaptation rate per agent

  void validate(int agents) const;
};

/// Bounds from the standing assumptions on leader and parameters. Only x_M
/// enters the gain check; the rest are carried for the report.
struct ModelBounds {
  double x_M = 2.0;
  double theta_M = 1.0;
  double sigma_M = 1.0;
  double d_theta = 1.0;
  double d_sigma = 1.0;
  double F_M = 1.0;

  void validate() const;
};

inline constexpr int kMaxStateDim = 16;

/// The part of an agent model the controller is allowed to see.
class KnownModel {
 public:
  /// Throws SingularInputMatrix when B_m is not invertible.
  KnownModel(Eigen::MatrixXd a_m, Eigen::MatrixXd b_m);

  int dim() const { return static_cast<int>(a_m_.rows()); }
  const Eigen::MatrixXd& a_m() const { return a_m_; }
  const Eigen::MatrixXd& b_m() const { return b_m_; }
  const Eigen::MatrixXd& b_inv() const { return b_inv_; }

 private:
  Eigen::MatrixXd a_m_;
  Eigen::MatrixXd b_m_;
  Eigen::MatrixXd b_inv_;
};

/// Per-agent estimates theta_hat_i, sigma_hat_i, each of the agent's state
/// dimension, stored agent-major.
struct AdaptiveState {
  int agents = 0;
  int dim = 1;
  std::vector<double> theta_hat;
  std::vector<double> sigma_hat;

  AdaptiveState() = default;
  AdaptiveState(int n, int m) : agents(n), dim(m), theta_hat(n * m, 0.0), sigma_hat(n * m, 0.0) {}

  std::span<const double> theta(int i) const { return {theta_hat.data() + i * dim, std::size_t(dim)}; }
  std::span<const double> sigma(int i) const { return {sigma_hat.data() + i * dim, std::size_t(dim)}; }
};

/// Regressor multiplying theta_hat: x itself for scalar agents, ||x||_inf otherwise.
double adaptation_regressor(std::span<const double> x);

/// u = B^{-1} (-c eps - A x_tilde - theta_hat ||x||_inf - sigma_hat), written into `u`.
void control_signal(const KnownModel& model, std::span<const double> eps,
                    std::span<const double> x_tilde, std::span<const double> x,
                    std::span<const double> theta_hat, std::span<const double> sigma_hat,
                    double c, std::span<double> u);

Eigen::VectorXd control_signal(const KnownModel& model, const Eigen::VectorXd& eps,
                               const Eigen::VectorXd& x_tilde, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& sigma_hat,
                               double c);

/// Estimate rates for one agent:
///   theta_hat' = gamma phi eps p r (d + b) - k gamma theta_hat
///   sigma_hat' = gamma     eps p r (d + b) - k gamma sigma_hat
/// with phi from adaptation_regressor() and r applied per channel.
void adaptive_derivatives(std::span<const double> eps, std::span<const double> x, double p,
                          std::span<const double> r, double d_plus_b,
                          std::span<const double> theta_hat, std::span<const double> sigma_hat,
                          double gamma, double k, std::span<double> theta_dot,
                          std::span<double> sigma_dot);

struct GainReport {
  double lambda_min_q = 0.0;
  double lambda_max_p = 0.0;
  double lambda_max_a = 0.0;  // largest singular value of the adjacency
  double c = 0.0;
  double k = 0.0;
  double x_M = 0.0;
  double recommended_k = 0.0;  // c lambda_min(Q) / 2
  double margin = 0.0;         // c lambda_min(Q) - (x_M + 1) lambda_max(P) lambda_max(A) / 2
  bool k_condition = false;
  bool c_condition = false;

  bool operator==(const GainReport&) const = default;
};

inline constexpr double kGainEqualityTolerance = 1e-6;

GainReport check_gain_conditions(const GraphMatrices& gm, const ControllerGains& gains,
                                 const ModelBounds& bounds, const Eigen::MatrixXd& adjacency);

/// V = 1/2 eps^T (P kron I) eps + 1/2 sum_i (|theta~_i|^2 + |sigma~_i|^2) / gamma_i.
/// True parameters come from the plant side; this is a diagnostic only.
double lyapunov_value(std::span<const double> eps, const AdaptiveState& adaptive,
                      std::span<const double> true_theta, std::span<const double> true_sigma,
                      const GraphMatrices& gm, const ControllerGains& gains);

}  // namespace ppsync
