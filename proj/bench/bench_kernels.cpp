// Serial reference vs OpenMP path for the hot kernels.
#include <benchmark/benchmark.h>

#include "efe/dp.hpp"
#include "efe/envs.hpp"
#include "efe/pomdp.hpp"
#include "efe/sophisticated.hpp"
#include "efe/standard.hpp"

using namespace efe;

namespace {

FiniteMdp random_mdp(std::size_t s, std::size_t a, std::size_t t) {
  RandomSpec spec;
  spec.seed = 17;
  spec.n_states = s;
  spec.n_actions = a;
  spec.horizon = t;
  return gen_random_mdp(spec);
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_BackwardInduction(benchmark::State& state) {
  const FiniteMdp mdp = random_mdp(64, 8, 40);
  for (auto _ : state) benchmark::DoNotOptimize(backward_induction(mdp, kTieTolerance, exec_of(state)));
  label(state);
}

void BM_SophisticatedTable(benchmark::State& state) {
  const FiniteMdp mdp = random_mdp(64, 6, 30);
  const Preferences p = build_preferences(mdp.reward(), Beta{4.0});
  for (auto _ : state) benchmark::DoNotOptimize(sophisticated_table(mdp, p, 0, exec_of(state)));
  label(state);
}

void BM_BruteForce(benchmark::State& state) {
  const FiniteMdp mdp = random_mdp(4, 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_optimal_values(mdp, kBruteForceGuard, exec_of(state)));
  label(state);
}

void BM_StandardPlan(benchmark::State& state) {
  const FiniteMdp mdp = random_mdp(6, 4, 4);
  const Preferences p = build_preferences(mdp.reward(), Beta{2.0});
  StandardOptions o;
  o.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(standard_plan(mdp, p, 0, 0, o));
  label(state);
}

void BM_BeliefTree(benchmark::State& state) {
  const FinitePomdp maze = gen_tmaze(0.8, 3);
  const Preferences p = build_preferences(maze.mdp().reward(), ZeroTemperature{});
  const std::vector<std::size_t> obs{kSeeStart};
  const BeliefState b = exact_posterior(maze, {}, obs).current();
  for (auto _ : state) benchmark::DoNotOptimize(sophisticated_plan_pomdp(maze, p, b, 1e7, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(BM_BackwardInduction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SophisticatedTable)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BruteForce)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StandardPlan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BeliefTree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
