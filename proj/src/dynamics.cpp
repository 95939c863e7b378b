#include "ppsync/dynamics.hpp"

#include <array>
#include <cmath>
#include <random>
#include <string>

#include "ppsync/error.hpp"

namespace ppsync {

AgentModel::AgentModel(KnownModel known, Terms terms)
    : known_(std::move(known)), terms_(std::move(terms)) {}

void AgentModel::unknown_terms(std::span<const double> x, double t, std::span<double> theta_x,
                               std::span<double> rest) const {
  const std::size_t m = x.size();
  std::array<double, kMaxStateDim * kMaxStateDim> theta{};
  std::array<double, kMaxStateDim> buf{};
  for (std::size_t r = 0; r < m; ++r) {
    theta_x[r] = 0.0;
    rest[r] = 0.0;
  }
  if (terms_.theta) {
    terms_.theta(t, {theta.data(), m * m});
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t j = 0; j < m; ++j) theta_x[r] += theta[r * m + j] * x[j];
  }
  if (terms_.nonlinearity) {
    terms_.nonlinearity(x, t, {buf.data(), m});
    for (std::size_t r = 0; r < m; ++r) rest[r] += buf[r];
  }
  if (terms_.disturbance) {
    terms_.disturbance(t, {buf.data(), m});
    for (std::size_t r = 0; r < m; ++r) rest[r] += buf[r];
  }
}

void AgentModel::derivative(std::span<const double> x, std::span<const double> u, double t,
                            std::span<double> dx) const {
  const std::size_t m = dim();
  if (x.size() != m || u.size() != m || dx.size() != m)
    throw Error(ErrorCode::DimensionMismatch, "agent derivative arguments must match state dim");
  bool finite = std::isfinite(t);
  for (std::size_t r = 0; r < m; ++r) finite = finite && std::isfinite(x[r]) && std::isfinite(u[r]);
  if (!finite) throw Error(ErrorCode::NonFiniteState, "agent derivative at non-finite input");

  std::array<double, kMaxStateDim> theta_x{};
  std::array<double, kMaxStateDim> rest{};
  unknown_terms(x, t, {theta_x.data(), m}, {rest.data(), m});
  const auto& a = known_.a_m();
  const auto& b = known_.b_m();
  for (std::size_t r = 0; r < m; ++r) {
    double acc = theta_x[r] + rest[r];
    for (std::size_t j = 0; j < m; ++j) acc += a(r, j) * x[j] + b(r, j) * u[j];
    dx[r] = acc;
  }
}

Eigen::VectorXd AgentModel::derivative(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                       double t) const {
  Eigen::VectorXd dx(dim());
  derivative({x.data(), std::size_t(x.size())}, {u.data(), std::size_t(u.size())}, t,
             {dx.data(), std::size_t(dx.size())});
  return dx;
}

void AgentModel::true_parameters(std::span<const double> x, double t, std::span<double> theta,
                                 std::span<double> sigma) const {
  const std::size_t m = dim();
  std::array<double, kMaxStateDim> theta_x{};
  unknown_terms(x, t, {theta_x.data(), m}, sigma);
  double norm = 0.0;
  for (double v : x) norm = std::max(norm, std::abs(v));
  for (std::size_t r = 0; r < m; ++r) theta[r] = norm > 0.0 ? theta_x[r] / norm : 0.0;
}

Eigen::MatrixXd AgentModel::theta_matrix(double t) const {
  const int m = dim();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> th =
      Eigen::MatrixXd::Zero(m, m);
  if (terms_.theta) terms_.theta(t, {th.data(), std::size_t(m * m)});
  return th;
}

LeaderModel::LeaderModel(int dim, Trajectory trajectory)
    : dim_(dim), trajectory_(std::move(trajectory)) {
  if (dim_ < 1 || dim_ > kMaxStateDim)
    throw Error(ErrorCode::InvalidArgument, "leader dimension out of range");
}

Eigen::VectorXd leader_trajectory(const LeaderModel& leader, double t) {
  if (t < 0.0) throw Error(ErrorCode::NegativeTime, "leader evaluated at t < 0");
  Eigen::VectorXd x0(leader.dim());
  leader.state(t, {x0.data(), std::size_t(x0.size())});
  return x0;
}

int ScenarioConfig::state_dim() const {
  return std::visit(
      [](const auto& l) -> int {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, ConstantLeader>) return static_cast<int>(l.value.size());
        else return static_cast<int>(l.amplitude.size());
      },
      leader);
}

std::vector<double> example1_amplitudes(std::uint64_t seed, int count) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(count);
  for (auto& a : out) a = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return out;
}

namespace {

constexpr std::array<int, 5> kExample1Powers{3, 2, 4, 1, 5};

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); }

void need(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

std::vector<AgentModel> build_plant(const Example1Plant& p, int n, int m) {
  need(m == 1, "example1 plant is scalar");
  need(n == static_cast<int>(kExample1Powers.size()), "example1 plant has 5 agents");
  need(static_cast<int>(p.amplitudes.size()) == n, "plant.amplitudes needs 5 entries");
  std::vector<AgentModel> agents;
  for (int i = 0; i < n; ++i) {
    const int power = kExample1Powers[i];
    const double amp = p.amplitudes[i];
    Eigen::MatrixXd a_m = Eigen::MatrixXd::Constant(1, 1, power == 1 ? 1.0 : 0.0);
    AgentModel::Terms terms;
    if (power != 1)
      terms.nonlinearity = [power](std::span<const double> x, double, std::span<double> f) {
        f[0] = std::pow(x[0], power);
      };
    terms.disturbance = [amp](double t, std::span<double> w) { w[0] = amp * std::cos(t); };
    agents.emplace_back(KnownModel(std::move(a_m), Eigen::MatrixXd::Ones(1, 1)), std::move(terms));
  }
  return agents;
}

std::vector<AgentModel> build_plant(const Example2Plant& p, int n, int m) {
  need(m == 3, "example2 plant has 3 channels");
  need(p.a.rows() == 3 && p.a.cols() == n && p.b.rows() == 3 && p.b.cols() == n &&
           p.c.rows() == 3 && p.c.cols() == n,
       "example2 heterogeneity matrices must be 3 x agents");
  std::vector<AgentModel> agents;
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector3d a = p.a.col(j), b = p.b.col(j), c = p.c.col(j);
    AgentModel::Terms terms;
    terms.theta = [c](double t, std::span<double> th) {
      // Columns theta^1, theta^2, theta^3; stored row-major.
      const double col1[3] = {3.0 * c(0) * std::sin(0.5 * t), 0.9 * std::sin(0.2 * c(1) * t),
                              0.5 * std::sin(0.13 * c(2) * t)};
      const double col2[3] = {2.0 * c(0) * std::sin(0.4 * c(0) * t) * std::cos(0.3 * t),
                              2.5 * std::sin(0.3 * c(1) * t) + 0.3 * std::cos(t),
                              0.6 * c(2) * std::cos(0.15 * t)};
      const double col3[3] = {0.7 * std::sin(0.2 * c(0) * t), 1.0 * std::sin(0.1 * c(1) * t),
                              1.5 * std::cos(0.7 * c(2) * t) + 1.6 * c(2) * std::sin(0.3 * t)};
      for (int r = 0; r < 3; ++r) {
        th[r * 3 + 0] = col1[r];
        th[r * 3 + 1] = col2[r];
        th[r * 3 + 2] = col3[r];
      }
    };
    terms.nonlinearity = [a](std::span<const double> x, double t, std::span<double> f) {
      f[0] = a(0) * x[2] * x[0] + 0.2 * std::sin(x[0] * a(0));
      f[1] = -a(1) * x[0] * x[2] - 0.2 * a(1) * std::cos(a(1) * x[2] * t) * x[0];
      f[2] = a(2) * x[0] * x[1];
    };
    terms.disturbance = [b](double t, std::span<double> d) {
      d[0] = 1.0 + b(0) * std::sin(b(0) * t);
      d[1] = 1.2 * std::cos(b(1) * t);
      d[2] = std::sin(0.5 * b(2) * t) + std::cos(b(2) * t) - 1.0;
    };
    agents.emplace_back(KnownModel(p.a_matrix, Eigen::MatrixXd::Identity(3, 3)), std::move(terms));
  }
  return agents;
}

std::vector<AgentModel> build_plant(const LinearPlant& p, int n, int m) {
  need(static_cast<int>(p.a_m.size()) == n && static_cast<int>(p.b_m.size()) == n,
       "linear plant needs A_m and B_m per agent");
  need(p.bias.empty() || static_cast<int>(p.bias.size()) == n, "plant.bias needs one entry per agent");
  need(p.cos_amplitude.empty() || static_cast<int>(p.cos_amplitude.size()) == n,
       "plant.cos_amplitude needs one entry per agent");
  std::vector<AgentModel> agents;
  for (int i = 0; i < n; ++i) {
    need(p.a_m[i].rows() == m, "plant.a_m dimension does not match leader");
    AgentModel::Terms terms;
    Eigen::VectorXd bias = p.bias.empty() ? Eigen::VectorXd::Zero(m) : p.bias[i];
    Eigen::VectorXd amp = p.cos_amplitude.empty() ? Eigen::VectorXd::Zero(m) : p.cos_amplitude[i];
    need(bias.size() == m && amp.size() == m, "plant.bias / plant.cos_amplitude dimension");
    if (!bias.isZero() || !amp.isZero())
      terms.disturbance = [bias, amp](double t, std::span<double> w) {
        const double ct = std::cos(t);
        for (Eigen::Index r = 0; r < bias.size(); ++r) w[r] = bias(r) + amp(r) * ct;
      };
    agents.emplace_back(KnownModel(p.a_m[i], p.b_m[i]), std::move(terms));
  }
  return agents;
}

LeaderModel build_leader(const ConstantLeader& l) {
  const Eigen::VectorXd v = l.value;
  return LeaderModel(static_cast<int>(v.size()), [v](double, std::span<double> x0) {
    for (Eigen::Index k = 0; k < v.size(); ++k) x0[k] = v(k);
  });
}

LeaderModel build_leader(const CosineLeader& l) {
  if (l.amplitude.size() != l.frequency.size())
    bad("leader amplitude and frequency lengths differ");
  const Eigen::VectorXd amp = l.amplitude, freq = l.frequency;
  return LeaderModel(static_cast<int>(amp.size()), [amp, freq](double t, std::span<double> x0) {
    for (Eigen::Index k = 0; k < amp.size(); ++k) x0[k] = amp(k) * std::cos(freq(k) * t);
  });
}

}  // namespace

Scenario build_scenario(ScenarioConfig config) {
  Digraph digraph(config.adjacency, config.pinning);
  const int n = digraph.size();
  LeaderModel leader = std::visit([](const auto& l) { return build_leader(l); }, config.leader);
  const int m = leader.dim();

  if (auto* p = std::get_if<Example1Plant>(&config.plant); p && p->amplitudes.empty())
    p->amplitudes = example1_amplitudes(config.seed, n);
  std::vector<AgentModel> agents =
      std::visit([n, m](const auto& p) { return build_plant(p, n, m); }, config.plant);

  need(static_cast<int>(config.performance.size()) == n * m,
       "performance needs one entry per agent channel (" + std::to_string(n * m) + ")");
  for (const auto& pf : config.performance) pf.validate();
  config.transform.validate();
  config.gains.validate(n);
  config.bounds.validate();
  need(config.x_init.size() == n * m, "x_init needs " + std::to_string(n * m) + " entries");
  if (!config.x_init.allFinite()) bad("x_init must be finite");
  if (config.theta_hat_init.empty()) config.theta_hat_init.assign(n * m, 0.0);
  if (config.sigma_hat_init.empty()) config.sigma_hat_init.assign(n * m, 0.0);
  need(static_cast<int>(config.theta_hat_init.size()) == n * m &&
           static_cast<int>(config.sigma_hat_init.size()) == n * m,
       "estimate initial values need one entry per agent channel");
  const auto& s = config.sim;
  if (!(s.dt > 0.0) || !(s.horizon >= 0.0) || s.log_stride < 1 || !(s.blowup > 0.0))
    bad("sim needs dt > 0, horizon >= 0, log_stride >= 1 and blowup > 0");

  return Scenario{std::move(config), std::move(digraph), std::move(agents), std::move(leader)};
}

ScenarioConfig example1_config(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "example1";
  cfg.seed = seed;
  const Digraph g = example1_digraph();
  cfg.adjacency = g.adjacency();
  cfg.pinning = g.pinning();
  cfg.plant = Example1Plant{example1_amplitudes(seed, 5)};
  cfg.leader = ConstantLeader{Eigen::VectorXd::Constant(1, 2.0)};
  cfg.performance.assign(5, PerformanceFunction{7.0, 0.05, 7.0});
  cfg.transform = TransformSpec{7.0, 1.0, TransformVariant::ErfSmoothed, 20.0, false};
  cfg.gains = ControllerGains{100.0, 0.8, std::vector<double>(5, 150.0)};
  cfg.bounds.x_M = 2.0;
  cfg.x_init.resize(5);
  cfg.x_init << 0.8230, -0.9001, -2.5351, -1.4567, -0.7553;
  cfg.sim = SimSettings{1e-4, 10.0, 1, 1e6, ExecPolicy::Auto};
  return cfg;
}

ScenarioConfig example2_config() {
  ScenarioConfig cfg;
  cfg.name = "example2";
  cfg.seed = 0;
  const Digraph g = example1_digraph();
  cfg.adjacency = g.adjacency();
  cfg.pinning = g.pinning();

  Example2Plant p;
  p.a_matrix << -20, 22, 0,
                0, 15, 0,
                0, 0, -3;
  p.a.resize(3, 5);
  p.a << 1.5, 0.5, 0.7, 1.3, 0.7,
         0.5, 1.4, 0.1, 1.3, 2.4,
         2.8, 1.4, 0.6, 0.7, 0.6;
  p.b.resize(3, 5);
  p.b << 0.5, 1.5, 1.1, 1.6, 0.3,
         0.7, 1.2, 1.3, 0.5, 0.3,
         1.1, 1.4, 1.6, 0.6, 1.0;
  p.c.resize(3, 5);
  p.c << 1.5, 2.5, 0.5, 1.7, 0.7,
         0.5, 1.7, 1.1, 0.3, 0.4,
         0.8, 0.4, 2.2, 0.9, 1.4;
  cfg.plant = std::move(p);

  CosineLeader leader;
  leader.amplitude = Eigen::Vector3d(3.0, 2.0, 1.5);
  leader.frequency = Eigen::Vector3d(0.7, 0.8, 1.0);
  cfg.leader = leader;

  cfg.performance.assign(15, PerformanceFunction{7.0, 0.05, 7.0});
  cfg.transform = TransformSpec{7.0, 1.0, TransformVariant::ErfSmoothed, 50.0, false};
  cfg.gains = ControllerGains{100.0, 0.8, std::vector<double>(5, 150.0)};
  cfg.bounds.x_M = std::sqrt(3.0 * 3.0 + 2.0 * 2.0 + 1.5 * 1.5);
  cfg.x_init.resize(15);
  cfg.x_init << 1.6399, 1.6639, -2.1864, 0.1160, -2.7805, -2.2175, -0.1489, 2.2989, -1.3038,
      0.5571, -0.5959, 1.6760, -2.4743, 0.0488, 0.8288;
  cfg.sim = SimSettings{5e-5, 10.0, 10, 1e6, ExecPolicy::Auto};
  return cfg;
}

Scenario scenario_example1(std::uint64_t seed) { return build_scenario(example1_config(seed)); }
Scenario scenario_example2() { return build_scenario(example2_config()); }

}  // namespace ppsync
