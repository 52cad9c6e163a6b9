// Microbenchmarks for the hot paths: proximal steps, the empirical solver,
// bound arithmetic, the PSD certification sweep, and one full Monte Carlo
// trial. Build with -DEXPCONC_BUILD_BENCHMARKS=ON (default when
// google-benchmark is installed).

#include <benchmark/benchmark.h>

#include <Eigen/Core>
#include <vector>

#include "expconc/bounds.hpp"
#include "expconc/certify.hpp"
#include "expconc/constants.hpp"
#include "expconc/distribution.hpp"
#include "expconc/experiment.hpp"
#include "expconc/problem_spec.hpp"
#include "expconc/rng.hpp"
#include "expconc/solver.hpp"

namespace {

using namespace expconc;

ProblemSpec desk_spec(int d) {
  ProblemSpec spec;
  spec.loss = Loss::square();
  spec.reg = Regularizer::l1(0.05);
  spec.domain = Domain(1.0, d);
  spec.constants = derive_constants(spec.loss, spec.domain, 0.125, 2.0);
  return spec;
}

std::vector<Sample> make_dataset(int d, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> data;
  data.reserve(n);
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.x = rng.uniform_in_ball(d, 1.0);
    s.y = rng.uniform(-1.0, 1.0);
    data.push_back(std::move(s));
  }
  return data;
}

void BM_ProjectBall(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(7);
  const Eigen::VectorXd v = 3.0 * rng.uniform_in_ball(d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(project_ball(v, 1.0));
  }
}
BENCHMARK(BM_ProjectBall)->Arg(5)->Arg(50)->Arg(500);

void BM_CombinedProxL1(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const Regularizer reg = Regularizer::l1(0.1);
  const Domain domain(1.0, d);
  Rng rng(11);
  const Eigen::VectorXd v = 2.0 * rng.uniform_in_ball(d, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(combined_prox(reg, domain, v, 0.3));
  }
}
BENCHMARK(BM_CombinedProxL1)->Arg(5)->Arg(50)->Arg(500);

void BM_SolveErm(benchmark::State& state) {
  const long n = state.range(0);
  const ProblemSpec spec = desk_spec(5);
  const auto data = make_dataset(5, static_cast<int>(n), 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_erm(spec, data));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SolveErm)->Arg(128)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

void BM_Theorem1Bound(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(theorem1_bound(2.0, 4.0, 1.0, 5, 1.0 / 64.0, 4096, 0.1));
  }
}
BENCHMARK(BM_Theorem1Bound);

void BM_ExpconcavityCheck(benchmark::State& state) {
  const Domain domain(1.0, 2);
  SamplingPlan plan;
  plan.w_points = static_cast<int>(state.range(0));
  plan.z_points = 16;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expconcavity_check(Loss::square(), 0.125, domain, plan));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 16);
}
BENCHMARK(BM_ExpconcavityCheck)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_MonteCarloBlock(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.spec = desk_spec(5);
  cfg.n_grid = {static_cast<long>(state.range(0))};
  cfg.trials = 8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trials(cfg));
  }
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_MonteCarloBlock)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
