#include "ppsync/kernel.hpp"

#include <array>
#include <cmath>
#include <exception>

#include "ppsync/controller.hpp"
#include "ppsync/error.hpp"
#include "ppsync/ppf.hpp"

namespace ppsync {

void StageLog::resize(int agents, int dim) {
  const std::size_t len = std::size_t(agents) * dim;
  e.assign(len, 0.0);
  eps.assign(len, 0.0);
  r.assign(len, 0.0);
  rho.assign(len, 0.0);
  u.assign(len, 0.0);
  leader.assign(dim, 0.0);
  clamped.assign(len, 0);
}

ClosedLoop::ClosedLoop(const Scenario& scenario)
    : scenario_(&scenario),
      agents_(scenario.size()),
      dim_(scenario.dim()),
      gm_(build_matrices(scenario.digraph)),
      initial_sign_(block(), 1.0) {
  const auto& a = scenario.digraph.adjacency();
  row_start_.reserve(agents_ + 1);
  row_start_.push_back(0);
  for (int i = 0; i < agents_; ++i) {
    for (int j = 0; j < agents_; ++j) {
      if (a(i, j) != 0.0) {
        col_.push_back(j);
        weight_.push_back(a(i, j));
      }
    }
    row_start_.push_back(static_cast<int>(col_.size()));
  }
}

std::vector<double> ClosedLoop::initial_state() const {
  const auto& cfg = scenario_->config;
  std::vector<double> z(state_size(), 0.0);
  for (std::size_t k = 0; k < block(); ++k) {
    z[k] = cfg.x_init(k);
    z[block() + k] = cfg.theta_hat_init[k];
    z[2 * block() + k] = cfg.sigma_hat_init[k];
  }
  return z;
}

void ClosedLoop::freeze_initial_signs(std::span<const double> z0) {
  StageLog log;
  log.resize(agents_, dim_);
  std::vector<double> dz(state_size());
  rhs_reference(0.0, z0, dz, log);
  for (std::size_t k = 0; k < block(); ++k) initial_sign_[k] = log.e[k] < 0.0 ? -1.0 : 1.0;
}

bool ClosedLoop::use_parallel() const {
  switch (scenario_->config.sim.exec) {
    case ExecPolicy::Serial: return false;
    case ExecPolicy::Parallel: return true;
    case ExecPolicy::Auto: return agents_ >= kParallelThreshold;
  }
  return false;
}

void ClosedLoop::rhs(double t, std::span<const double> z, std::span<double> dz, StageLog& log,
                     bool parallel) const {
  const int n = agents_;
  const int m = dim_;
  const std::size_t nm = block();
  const auto& cfg = scenario_->config;
  const double* x = z.data();
  const double* theta = z.data() + nm;
  const double* sigma = z.data() + 2 * nm;

  scenario_->leader.state(t, log.leader);
  const double* x0 = log.leader.data();

  std::exception_ptr failure;
#pragma omp parallel for schedule(static) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      const std::size_t base = std::size_t(i) * m;
      const double bi = scenario_->digraph.pinning()(i);
      std::array<double, kMaxStateDim> x_tilde{};
      std::array<double, kMaxStateDim> r{};
      for (int l = 0; l < m; ++l) {
        const double xi = x[base + l];
        double e = bi * (xi - x0[l]);
        for (int q = row_start_[i]; q < row_start_[i + 1]; ++q)
          e += weight_[q] * (xi - x[std::size_t(col_[q]) * m + l]);
        const double rho_t = rho(cfg.performance[base + l], t);
        const TransformSample s = transform_clamped(cfg.transform, e, rho_t, initial_sign_[base + l]);
        log.e[base + l] = e;
        log.rho[base + l] = rho_t;
        log.eps[base + l] = s.eps;
        log.r[base + l] = s.r;
        log.clamped[base + l] = s.clamped ? 1 : 0;
        x_tilde[l] = xi - x0[l];
        r[l] = s.r;
      }
      const std::span<const double> xi{x + base, std::size_t(m)};
      const std::span<const double> eps{log.eps.data() + base, std::size_t(m)};
      const std::span<const double> th{theta + base, std::size_t(m)};
      const std::span<const double> sg{sigma + base, std::size_t(m)};
      const std::span<double> u{log.u.data() + base, std::size_t(m)};
      const auto& agent = scenario_->agents[i];
      control_signal(agent.known(), eps, {x_tilde.data(), std::size_t(m)}, xi, th, sg,
                     cfg.gains.c, u);
      agent.derivative(xi, u, t, dz.subspan(base, m));
      adaptive_derivatives(eps, xi, gm_.p_matrix(i, i), {r.data(), std::size_t(m)},
                           gm_.d_plus_b(i), th, sg, cfg.gains.gamma[i], cfg.gains.k,
                           dz.subspan(nm + base, m), dz.subspan(2 * nm + base, m));
    } catch (...) {
#pragma omp critical(ppsync_rhs_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void ClosedLoop::rhs_reference(double t, std::span<const double> z, std::span<double> dz,
                               StageLog& log) const {
  const int n = agents_;
  const int m = dim_;
  const std::size_t nm = block();
  const auto& cfg = scenario_->config;

  const Eigen::VectorXd x0 = leader_trajectory(scenario_->leader, t);
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(z.data(), nm);
  const Eigen::VectorXd e = global_error(gm_, x, x0);

  for (int k = 0; k < m; ++k) log.leader[k] = x0(k);
  for (int i = 0; i < n; ++i) {
    const auto& agent = scenario_->agents[i];
    const Eigen::Index base = Eigen::Index(i) * m;
    Eigen::VectorXd eps(m), r(m);
    for (int l = 0; l < m; ++l) {
      const Eigen::Index idx = base + l;
      const double rho_t = rho(cfg.performance[idx], t);
      log.e[idx] = e(idx);
      log.rho[idx] = rho_t;
      log.clamped[idx] = 0;
      const double ratio = e(idx) / rho_t;
      const bool inside = cfg.transform.variant == TransformVariant::InitialSign
                              ? initial_sign_[idx] * ratio < cfg.transform.delta_hi * (1 - kClampMargin) &&
                                    initial_sign_[idx] * ratio > -cfg.transform.delta_lo * (1 - kClampMargin)
                              : std::abs(ratio) < cfg.transform.delta_hi * (1 - kClampMargin);
      if (inside) {
        eps(l) = transform(cfg.transform, e(idx), rho_t, initial_sign_[idx]);
        r(l) = r_factor(cfg.transform, e(idx), rho_t, initial_sign_[idx]);
      } else {
        const TransformSample s = transform_clamped(cfg.transform, e(idx), rho_t, initial_sign_[idx]);
        eps(l) = s.eps;
        r(l) = s.r;
        log.clamped[idx] = 1;
      }
      log.eps[idx] = eps(l);
      log.r[idx] = r(l);
    }
    const Eigen::VectorXd xi = x.segment(base, m);
    const Eigen::VectorXd th = Eigen::Map<const Eigen::VectorXd>(z.data() + nm + base, m);
    const Eigen::VectorXd sg = Eigen::Map<const Eigen::VectorXd>(z.data() + 2 * nm + base, m);
    const Eigen::VectorXd u = control_signal(agent.known(), eps, xi - x0, xi, th, sg, cfg.gains.c);
    const Eigen::VectorXd dx = agent.derivative(xi, u, t);
    for (int l = 0; l < m; ++l) {
      log.u[base + l] = u(l);
      dz[base + l] = dx(l);
    }
    adaptive_derivatives({eps.data(), std::size_t(m)}, {xi.data(), std::size_t(m)},
                         gm_.p_matrix(i, i), {r.data(), std::size_t(m)}, gm_.d_plus_b(i),
                         {th.data(), std::size_t(m)}, {sg.data(), std::size_t(m)},
                         cfg.gains.gamma[i], cfg.gains.k, dz.subspan(nm + base, m),
                         dz.subspan(2 * nm + base, m));
  }
}

}  // namespace ppsync
