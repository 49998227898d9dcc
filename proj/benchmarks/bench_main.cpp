#include <benchmark/benchmark.h>

#include "rsmfg/fixtures.hpp"
#include "rsmfg/sim.hpp"
#include "rsmfg/solver.hpp"

namespace {

using namespace rsmfg;

GameSpec wide_fixture(std::size_t horizon) {
  GameSpec spec = toy_b();
  spec.horizon_T = horizon;
  return spec;
}

void BM_build_augmented(benchmark::State& state) {
  const GameSpec spec = wide_fixture(static_cast<std::size_t>(state.range(0)));
  const MeasureFlow flow = constant_initial_flow(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_augmented(spec, flow));
  }
}
BENCHMARK(BM_build_augmented)->Arg(2)->Arg(4)->Arg(6);

void BM_expand_tree(benchmark::State& state) {
  const GameSpec spec = wide_fixture(static_cast<std::size_t>(state.range(0)));
  const AugmentedGame aug = build_augmented(spec, constant_initial_flow(spec));
  for (auto _ : state) {
    benchmark::DoNotOptimize(expand_tree(aug));
  }
}
BENCHMARK(BM_expand_tree)->Arg(2)->Arg(4)->Arg(6);

void BM_solve_pomdp(benchmark::State& state) {
  const GameSpec spec = wide_fixture(static_cast<std::size_t>(state.range(0)));
  const AugmentedGame aug = build_augmented(spec, constant_initial_flow(spec));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_pomdp(aug));
  }
}
BENCHMARK(BM_solve_pomdp)->Arg(2)->Arg(4)->Arg(6);

void BM_find_equilibrium(benchmark::State& state) {
  const GameSpec spec = wide_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(find_equilibrium(spec));
  }
}
BENCHMARK(BM_find_equilibrium)->Arg(2)->Arg(4);

void BM_simulate(benchmark::State& state) {
  const GameSpec spec = toy_b();
  const EquilibriumArtifact artifact = find_equilibrium(spec);
  const AugmentedGame aug = build_augmented(spec, artifact.flow);
  const CompiledPolicy pi_star =
      compile_policy(expand_tree(aug), artifact.policy, 2);
  const std::vector<const CompiledPolicy*> agents(
      static_cast<std::size_t>(state.range(0)), &pi_star);
  SimOptions options;
  options.episodes = 256;
  options.seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(spec, agents, options));
  }
  state.SetItemsProcessed(state.iterations() * 256 *
                          state.range(0) * (spec.horizon_T + 1));
}
BENCHMARK(BM_simulate)->Arg(16)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
