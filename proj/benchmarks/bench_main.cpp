#include <benchmark/benchmark.h>

#include "spde4/error_lab.hpp"
#include "spde4/fem.hpp"
#include "spde4/noise.hpp"
#include "spde4/oracle.hpp"

using namespace spde4;

static void BM_Assemble(benchmark::State& state) {
  const FemSpace space(2, 3, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble(space));
  state.counters["dofs"] = static_cast<double>(space.dofs());
}
BENCHMARK(BM_Assemble)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// First solve_step for a new k pays for the factorization.
static void BM_FactorizeStep(benchmark::State& state) {
  const FemDiscretization disc(2, 3, static_cast<int>(state.range(0)));
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(disc.space().dofs()));
  double k = 1e-4;
  for (auto _ : state) {
    k *= 1.0001;
    benchmark::DoNotOptimize(disc.solve_step(k, rhs));
  }
}
BENCHMARK(BM_FactorizeStep)->Arg(8)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_FullyDiscretePath(benchmark::State& state) {
  const FemDiscretization disc(2, 3, static_cast<int>(state.range(0)));
  const NoiseGrid grid{2, 0.001, 64, 32};
  const auto noise = sample(grid, SeedSpec{1, 0});
  const auto partition = TimePartition::uniform(0.001, 256);
  for (auto _ : state) benchmark::DoNotOptimize(fully_discrete_path(disc, noise, partition));
}
BENCHMARK(BM_FullyDiscretePath)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_ModelingErrorExact(benchmark::State& state) {
  const auto J = state.range(0);
  const NoiseGrid grid{2, 0.01, 64, J};
  for (auto _ : state) benchmark::DoNotOptimize(modeling_error_exact(grid, 0.01, SpectralCutoff{2, static_cast<int>(10 * J)}));
}
BENCHMARK(BM_ModelingErrorExact)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_TimeDiscreteErrorExact(benchmark::State& state) {
  const NoiseGrid grid{2, 0.01, 65536, 16};
  const auto partition = TimePartition::uniform(0.01, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(timedisc_error_exact_all(grid, partition, SpectralCutoff{2, 160}));
}
BENCHMARK(BM_TimeDiscreteErrorExact)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_UhatSecondMomentMc(benchmark::State& state) {
  const NoiseGrid grid{2, 0.1, 4, 4};
  McOptions options;
  options.replicates = static_cast<int>(state.range(0));
  options.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(uhat_second_moment_mc(grid, 0.1, SpectralCutoff{2, 32}, options));
}
BENCHMARK(BM_UhatSecondMomentMc)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
