#include <benchmark/benchmark.h>

#include "ppsync/kernel.hpp"

namespace {

ppsync::ScenarioConfig ring_config(int n, int m) {
  ppsync::ScenarioConfig cfg;
  cfg.name = "ring";
  cfg.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    cfg.adjacency(i, (i + 1) % n) = 1.0;
    cfg.adjacency((i + 1) % n, i) = 1.0;
  }
  cfg.pinning = Eigen::VectorXd::Zero(n);
  cfg.pinning(0) = 1.0;
  ppsync::LinearPlant plant;
  for (int i = 0; i < n; ++i) {
    plant.a_m.push_back(-Eigen::MatrixXd::Identity(m, m));
    plant.b_m.push_back(Eigen::MatrixXd::Identity(m, m));
    plant.bias.push_back(Eigen::VectorXd::Constant(m, 0.1));
    plant.cos_amplitude.push_back(Eigen::VectorXd::Constant(m, 0.2));
  }
  cfg.plant = plant;
  cfg.leader = ppsync::ConstantLeader{Eigen::VectorXd::Ones(m)};
  cfg.performance.assign(std::size_t(n) * m, ppsync::PerformanceFunction{});
  cfg.gains.gamma.assign(n, 10.0);
  cfg.x_init = Eigen::VectorXd::LinSpaced(n * m, -1.0, 1.0);
  return cfg;
}

void run_rhs(benchmark::State& state, bool parallel) {
  const int n = int(state.range(0));
  const ppsync::Scenario sc = ppsync::build_scenario(ring_config(n, 3));
  const ppsync::ClosedLoop loop(sc);
  const auto z = loop.initial_state();
  std::vector<double> dz(z.size());
  ppsync::StageLog log;
  log.resize(loop.agents(), loop.dim());
  for (auto _ : state) {
    loop.rhs(0.1, z, dz, log, parallel);
    benchmark::DoNotOptimize(dz.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_RhsSerial(benchmark::State& state) { run_rhs(state, false); }
void BM_RhsParallel(benchmark::State& state) { run_rhs(state, true); }

void BM_RhsReference(benchmark::State& state) {
  const int n = int(state.range(0));
  const ppsync::Scenario sc = ppsync::build_scenario(ring_config(n, 3));
  const ppsync::ClosedLoop loop(sc);
  const auto z = loop.initial_state();
  std::vector<double> dz(z.size());
  ppsync::StageLog log;
  log.resize(loop.agents(), loop.dim());
  for (auto _ : state) {
    loop.rhs_reference(0.1, z, dz, log);
    benchmark::DoNotOptimize(dz.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(BM_RhsSerial)->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK(BM_RhsParallel)->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK(BM_RhsReference)->RangeMultiplier(4)->Range(16, 256);

BENCHMARK_MAIN();
