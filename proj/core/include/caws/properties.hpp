#pragma once

// Randomized cross-module property checks shared by `caws selftest` and
// the acceptance suite.

#include <cstddef>
#include <cstdint>
#include <string>

namespace caws::properties {

struct Report {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::string first_failure;

  bool passed() const { return failures == 0 && cases > 0; }
};

/// Random small knapsacks (N <= 8, capacities <= 3, costs in [1,3]):
/// greedy >= optimum / 2 and
/// floor value <= optimum <= fractional value <= floor value + split mean.
Report knapsack_oracle(std::size_t cases, std::uint64_t seed);

/// Same-cube context pairs under the coordinate-mean map (M = 2) never
/// differ in mean by more than the Hölder cell bound.
Report cube_gap(std::size_t cells_per_axis, std::size_t pairs, std::uint64_t seed);

/// Grouped and per-worker subroutines return identical weight vectors on
/// random policy states, ties included.
Report subroutine_equivalence(std::size_t cases, std::uint64_t seed);

/// Every policy replays an identical step log from the same seed.
Report episode_determinism(std::size_t cases, std::uint64_t seed);

}  // namespace caws::properties
