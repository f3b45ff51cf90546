#include "caws/properties.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "caws/environment.hpp"
#include "caws/evaluation.hpp"
#include "caws/knapsack.hpp"
#include "caws/partition.hpp"
#include "caws/policies.hpp"
#include "caws/rng.hpp"

namespace caws::properties {

namespace {

void fail(Report& r, const std::string& what) {
  if (r.failures++ == 0) r.first_failure = what;
}

// Summation-order slack; both sides are sums of at most 24 terms below 3.
constexpr double kSlack = 1e-9;

}  // namespace

Report knapsack_oracle(std::size_t cases, std::uint64_t seed) {
  Report report{"knapsack oracle", 0, 0, {}};
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t n = 1 + uniform_below(rng, 8);
    std::vector<double> values(n);
    std::vector<double> costs(n);
    std::vector<Capacity> caps(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = uniform01(rng);
      costs[i] = 1.0 + 2.0 * uniform01(rng);
      caps[i] = static_cast<Capacity>(uniform_below(rng, 4));
      total += costs[i] * caps[i];
    }
    const double budget = uniform01(rng) * (total + 1.0);

    const Allocation best = knapsack::brute_force_bkp(values, costs, caps, budget);
    const Allocation greedy = knapsack::density_greedy(values, costs, caps, budget);
    const knapsack::FractionalAllocation frac = knapsack::solve_fbkp(values, costs, caps, budget);
    const Allocation floor = knapsack::round_down(frac, values, costs);
    const double split_mean = frac.split_worker ? values[*frac.split_worker] : 0.0;

    ++report.cases;
    std::ostringstream where;
    where << "case " << k << " (N=" << n << ", B=" << budget << "): ";
    if (greedy.expected_value < 0.5 * best.expected_value - kSlack) {
      fail(report, where.str() + "greedy " + std::to_string(greedy.expected_value) +
                       " < half of optimum " + std::to_string(best.expected_value));
    } else if (floor.expected_value > best.expected_value + kSlack ||
               best.expected_value > frac.value + kSlack ||
               frac.value > floor.expected_value + split_mean + kSlack) {
      fail(report, where.str() + "sandwich violated");
    }
  }
  return report;
}

Report cube_gap(std::size_t cells_per_axis, std::size_t pairs, std::uint64_t seed) {
  Report report{"cube_gap d=" + std::to_string(cells_per_axis), 0, 0, {}};
  constexpr std::size_t m = 2;
  const MuMap map = MuMap::coordinate_mean();
  const HolderCertificate cert = map.certificate(m);
  const double delta = holder_delta(cert.L, cert.alpha, m, cells_per_axis);
  const PartitionGrid grid(cells_per_axis, m);
  const double width = 1.0 / static_cast<double>(cells_per_axis);
  Rng rng(seed);
  std::vector<double> a(m);
  std::vector<double> b(m);
  for (std::size_t k = 0; k < pairs; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      const double lo = static_cast<double>(uniform_below(rng, cells_per_axis)) * width;
      a[j] = std::min(1.0, lo + width * uniform01(rng));
      b[j] = std::min(1.0, lo + width * uniform01(rng));
    }
    if (grid.cube_index(a) != grid.cube_index(b)) continue;
    ++report.cases;
    const double gap = std::abs(map(a) - map(b));
    if (gap > delta + 1e-12) {
      fail(report, "pair " + std::to_string(k) + ": gap " + std::to_string(gap) + " > " +
                       std::to_string(delta));
    }
  }
  return report;
}

Report subroutine_equivalence(std::size_t cases, std::uint64_t seed) {
  Report report{"subroutine equivalence", 0, 0, {}};
  Rng rng(seed);
  const double cost_levels[] = {1.0, 1.25, 1.5, 2.0};
  for (std::size_t k = 0; k < cases; ++k) {
    const std::size_t n = 1 + uniform_below(rng, 60);
    const std::size_t cells = 1 + uniform_below(rng, 12);
    const bool discrete = uniform_below(rng, 2) == 0;
    std::vector<std::size_t> cell_of(n);
    std::vector<double> costs(n);
    std::vector<Capacity> caps(n);
    std::vector<CubeStats> stats(cells);
    std::vector<CostPool> pools(cells);
    for (CubeStats& s : stats) {
      s.pulls = uniform_below(rng, 4) == 0 ? 0 : 1 + uniform_below(rng, 20);
      // Coarse means make exact index ties between cells common.
      s.mean_reward = s.pulls == 0 ? 0.0 : static_cast<double>(uniform_below(rng, 5)) / 4.0;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cell_of[i] = uniform_below(rng, cells);
      costs[i] = discrete ? cost_levels[uniform_below(rng, 4)] : 1.0 + 0.5 * uniform01(rng);
      caps[i] = static_cast<Capacity>(uniform_below(rng, 5));
      if (caps[i] > 0) pools[cell_of[i]].insert(costs[i], i);
      total += costs[i] * caps[i];
    }
    const double budget = uniform01(rng) * (total + 2.0);
    const std::uint64_t t = 1 + uniform_below(rng, 5000);

    const auto reference = caws_subroutine_reference({cell_of, stats, costs, caps, budget, t});
    const auto grouped = caws_subroutine_grouped(pools, stats, caps, budget, t);
    ++report.cases;
    if (reference != grouped) fail(report, "case " + std::to_string(k) + ": weights differ");
  }
  return report;
}

Report episode_determinism(std::size_t cases, std::uint64_t seed) {
  Report report{"episode determinism", 0, 0, {}};
  const PolicyKind kinds[] = {PolicyKind::caws, PolicyKind::oracle, PolicyKind::epsilon_first,
                              PolicyKind::bkube, PolicyKind::random};
  for (std::size_t k = 0; k < cases; ++k) {
    GeneratorParams g;
    g.workers = 200;
    g.seed = mix_seed(seed, {kInstanceStream, k});
    g.budget = 150.0;
    const TaskInstance inst = gen_synthetic(g);
    for (PolicyKind kind : kinds) {
      const std::uint64_t s = mix_seed(seed, {kEpisodeStream, k});
      auto p1 = make_policy({kind, 0.1, Granularity::automatic()}, inst);
      auto p2 = make_policy({kind, 0.1, Granularity::automatic()}, inst);
      const RunResult a = run_episode(inst, *p1, {}, s);
      const RunResult b = run_episode(inst, *p2, {}, s);
      ++report.cases;
      const bool same = a.steps.size() == b.steps.size() &&
                        std::equal(a.steps.begin(), a.steps.end(), b.steps.begin(),
                                   [](const StepRecord& x, const StepRecord& y) {
                                     return x.t == y.t && x.worker == y.worker &&
                                            x.cell == y.cell && x.cost == y.cost &&
                                            x.reward == y.reward;
                                   });
      if (!same) {
        fail(report, "case " + std::to_string(k) + ": " + std::string(to_string(kind)) +
                         " diverged");
      }
    }
  }
  return report;
}

}  // namespace caws::properties
