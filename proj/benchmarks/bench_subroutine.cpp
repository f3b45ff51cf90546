#include <benchmark/benchmark.h>

#include "caws/environment.hpp"
#include "caws/evaluation.hpp"
#include "caws/policies.hpp"

namespace {

using namespace caws;

// A CAWS policy after `warmup` steps on a generated instance, so every
// cell holds statistics.
struct WarmState {
  TaskInstance instance;
  std::unique_ptr<CawsPolicy> policy;
  std::uint64_t t = 1;

  WarmState(std::size_t workers, double budget, std::uint64_t warmup) {
    GeneratorParams g;
    g.workers = workers;
    g.budget = budget;
    g.seed = 7;
    instance = gen_synthetic(g);
    policy = std::make_unique<CawsPolicy>(make_view(instance), budget, 1.0, Granularity::automatic());
    Rng rng(11);
    const std::vector<double> means = true_means(instance);
    for (; t <= warmup; ++t) {
      const std::size_t w = policy->select(t, rng);
      policy->observe(w, sample_reward(means[w], {}, rng));
    }
  }
};

void BM_SubroutineGrouped(benchmark::State& state) {
  WarmState s(static_cast<std::size_t>(state.range(0)), 20000.0, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(s.policy->subroutine(s.t));
}
BENCHMARK(BM_SubroutineGrouped)->Arg(5000)->Arg(20000)->Unit(benchmark::kMicrosecond);

void BM_SubroutineReference(benchmark::State& state) {
  WarmState s(static_cast<std::size_t>(state.range(0)), 20000.0, 2000);
  for (auto _ : state) benchmark::DoNotOptimize(s.policy->subroutine_reference(s.t));
}
BENCHMARK(BM_SubroutineReference)->Arg(5000)->Arg(20000)->Unit(benchmark::kMicrosecond);

void BM_Episode(benchmark::State& state) {
  const auto kind = static_cast<PolicyKind>(state.range(0));
  GeneratorParams g;
  g.workers = 20000;
  g.budget = 4000.0;
  g.seed = 3;
  const TaskInstance inst = gen_synthetic(g);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto policy = make_policy({kind, 0.1, Granularity::automatic()}, inst);
    benchmark::DoNotOptimize(run_episode(inst, *policy, {}, ++seed));
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Episode)
    ->Arg(static_cast<int>(PolicyKind::caws))
    ->Arg(static_cast<int>(PolicyKind::bkube))
    ->Arg(static_cast<int>(PolicyKind::epsilon_first))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
