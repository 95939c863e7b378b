#include "ppsync/controller.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ppsync/error.hpp"

namespace ppsync {

void ControllerGains::validate(int agents) const {
  if (!(c > 0.0 && k > 0.0)) throw Error(ErrorCode::InvalidArgument, "gains need c > 0 and k > 0");
  if (static_cast<int>(gamma.size()) != agents)
    throw Error(ErrorCode::DimensionMismatch,
                "gamma has " + std::to_string(gamma.size()) + " entries for " +
                    std::to_string(agents) + " agents");
  for (double g : gamma)
    if (!(g > 0.0)) throw Error(ErrorCode::InvalidArgument, "adaptation rates must be positive");
}

void ModelBounds::validate() const {
  if (!(x_M > 0 && theta_M > 0 && sigma_M > 0 && d_theta > 0 && d_sigma > 0 && F_M > 0))
    throw Error(ErrorCode::InvalidArgument, "model bounds must be positive");
}

KnownModel::KnownModel(Eigen::MatrixXd a_m, Eigen::MatrixXd b_m)
    : a_m_(std::move(a_m)), b_m_(std::move(b_m)) {
  const auto m = a_m_.rows();
  if (m == 0 || a_m_.cols() != m || b_m_.rows() != m || b_m_.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "A_m and B_m must be square and of equal size");
  if (m > kMaxStateDim)
    throw Error(ErrorCode::InvalidArgument, "agent state dimension above " + std::to_string(kMaxStateDim));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b_m_);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularInputMatrix, "B_m is not invertible");
  b_inv_ = lu.inverse();
}

double adaptation_regressor(std::span<const double> x) {
  if (x.size() == 1) return x[0];
  double norm = 0.0;
  for (double v : x) norm = std::max(norm, std::abs(v));
  return norm;
}

namespace {

double inf_norm(std::span<const double> x) {
  double norm = 0.0;
  for (double v : x) norm = std::max(norm, std::abs(v));
  return norm;
}

void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has length " +
                                                  std::to_string(got) + ", expected " +
                                                  std::to_string(want));
}

}  // namespace

void control_signal(const KnownModel& model, std::span<const double> eps,
                    std::span<const double> x_tilde, std::span<const double> x,
                    std::span<const double> theta_hat, std::span<const double> sigma_hat,
                    double c, std::span<double> u) {
  const std::size_t m = model.dim();
  require_dim(eps.size(), m, "eps");
  require_dim(x_tilde.size(), m, "x_tilde");
  require_dim(x.size(), m, "x");
  require_dim(theta_hat.size(), m, "theta_hat");
  require_dim(sigma_hat.size(), m, "sigma_hat");
  require_dim(u.size(), m, "u");

  const double xnorm = inf_norm(x);
  const auto& a = model.a_m();
  const auto& binv = model.b_inv();
  // v = -c eps - A x_tilde - theta_hat ||x|| - sigma_hat, then u = B^{-1} v.
  std::array<double, kMaxStateDim> vp{};
  for (std::size_t l = 0; l < m; ++l) {
    double ax = 0.0;
    for (std::size_t j = 0; j < m; ++j) ax += a(l, j) * x_tilde[j];
    vp[l] = -c * eps[l] - ax - theta_hat[l] * xnorm - sigma_hat[l];
  }
  for (std::size_t r = 0; r < m; ++r) {
    double acc = 0.0;
    for (std::size_t l = 0; l < m; ++l) acc += binv(r, l) * vp[l];
    u[r] = acc;
  }
}

Eigen::VectorXd control_signal(const KnownModel& model, const Eigen::VectorXd& eps,
                               const Eigen::VectorXd& x_tilde, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& theta_hat, const Eigen::VectorXd& sigma_hat,
                               double c) {
  Eigen::VectorXd u(model.dim());
  control_signal(model, {eps.data(), std::size_t(eps.size())},
                 {x_tilde.data(), std::size_t(x_tilde.size())}, {x.data(), std::size_t(x.size())},
                 {theta_hat.data(), std::size_t(theta_hat.size())},
                 {sigma_hat.data(), std::size_t(sigma_hat.size())}, c,
                 {u.data(), std::size_t(u.size())});
  return u;
}

void adaptive_derivatives(std::span<const double> eps, std::span<const double> x, double p,
                          std::span<const double> r, double d_plus_b,
                          std::span<const double> theta_hat, std::span<const double> sigma_hat,
                          double gamma, double k, std::span<double> theta_dot,
                          std::span<double> sigma_dot) {
  const std::size_t m = eps.size();
  require_dim(x.size(), m, "x");
  require_dim(r.size(), m, "r");
  require_dim(theta_hat.size(), m, "theta_hat");
  require_dim(sigma_hat.size(), m, "sigma_hat");
  require_dim(theta_dot.size(), m, "theta_dot");
  require_dim(sigma_dot.size(), m, "sigma_dot");

  const double phi = adaptation_regressor(x);
  for (std::size_t l = 0; l < m; ++l) {
    const double drive = gamma * eps[l] * p * r[l] * d_plus_b;
    theta_dot[l] = phi * drive - k * gamma * theta_hat[l];
    sigma_dot[l] = drive - k * gamma * sigma_hat[l];
  }
}

GainReport check_gain_conditions(const GraphMatrices& gm, const ControllerGains& gains,
                                 const ModelBounds& bounds, const Eigen::MatrixXd& adjacency) {
  GainReport rep;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gm.q_matrix, Eigen::EigenvaluesOnly);
  rep.lambda_min_q = eig.eigenvalues()(0);
  rep.lambda_max_p = gm.p().maxCoeff();
  rep.lambda_max_a = Eigen::JacobiSVD<Eigen::MatrixXd>(adjacency).singularValues()(0);
  rep.c = gains.c;
  rep.k = gains.k;
  rep.x_M = bounds.x_M;
  rep.recommended_k = gains.c * rep.lambda_min_q / 2.0;
  rep.k_condition = std::abs(gains.k - rep.recommended_k) <=
                    kGainEqualityTolerance * std::abs(rep.recommended_k);
  rep.margin = gains.c * rep.lambda_min_q -
               0.5 * (bounds.x_M + 1.0) * rep.lambda_max_p * rep.lambda_max_a;
  rep.c_condition = rep.margin > 0.0;
  return rep;
}

double lyapunov_value(std::span<const double> eps, const AdaptiveState& adaptive,
                      std::span<const double> true_theta, std::span<const double> true_sigma,
                      const GraphMatrices& gm, const ControllerGains& gains) {
  const int n = gm.size();
  const int m = adaptive.dim;
  const std::size_t len = std::size_t(n) * m;
  require_dim(std::size_t(adaptive.agents), std::size_t(n), "adaptive state agents");
  require_dim(eps.size(), len, "eps");
  require_dim(true_theta.size(), len, "true theta");
  require_dim(true_sigma.size(), len, "true sigma");
  require_dim(gains.gamma.size(), std::size_t(n), "gamma");

  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = gm.p_matrix(i, i);
    const double inv_gamma = 1.0 / gains.gamma[i];
    for (int l = 0; l < m; ++l) {
      const std::size_t idx = std::size_t(i) * m + l;
      const double th = true_theta[idx] - adaptive.theta_hat[idx];
      const double sg = true_sigma[idx] - adaptive.sigma_hat[idx];
      v += 0.5 * p * eps[idx] * eps[idx] + 0.5 * inv_gamma * (th * th + sg * sg);
    }
  }
  return v;
}

}  // namespace ppsync
