#pragma once

// Offline bounded-knapsack machinery: density ordering, the fractional
// relaxation's closed form, rounding, the density-ordered greedy and an
// exhaustive oracle for small instances.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "caws/model.hpp"

namespace caws::knapsack {

/// Strict "a is denser than b" for value/cost densities, exact in
/// floating point. Products are compared through their FMA error terms,
/// so no quotient rounding enters the decision. Ties fall back to
/// ascending cost, then ascending id. Values must be non-negative and
/// costs positive.
bool denser(double value_a, double cost_a, std::size_t id_a,
            double value_b, double cost_b, std::size_t id_b);

struct DensityOrder {
  std::vector<std::size_t> permutation;
};

DensityOrder density_order(std::span<const double> values, std::span<const double> costs);

struct FractionalAllocation {
  std::vector<double> counts;
  std::optional<std::size_t> split_worker;
  double value = 0.0;
  double cost = 0.0;
};

/// Optimal solution of the fractional relaxation: full capacity in density
/// order up to the first worker that overflows the budget, which receives
/// the leftover fraction.
FractionalAllocation solve_fbkp(std::span<const double> values, std::span<const double> costs,
                                std::span<const Capacity> capacities, double budget);

/// Floors every count of a fractional solution.
Allocation round_down(const FractionalAllocation& fractional, std::span<const double> values,
                      std::span<const double> costs);

/// One greedy step: how many units of a worker with the given cost and
/// capacity fit into `residual`, and the residual left afterwards. The
/// residual is reduced with a single rounding (fma), and the count never
/// overshoots the residual.
struct Take {
  std::uint64_t count = 0;
  double residual = 0.0;
};
Take greedy_take(double residual, double cost, std::uint64_t capacity);

/// Density-ordered greedy (2-approximation). Workers are visited in
/// density order; each one that still fits receives
/// min(capacity, floor(residual / cost)), the rest receive 0.
Allocation density_greedy(std::span<const double> values, std::span<const double> costs,
                          std::span<const Capacity> capacities, double budget);

/// Same as density_greedy but also returns the (worker, count) entries with
/// positive count, in the order the greedy assigned them.
struct PlanEntry {
  std::size_t worker = 0;
  std::uint64_t count = 0;
  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};
std::vector<PlanEntry> density_greedy_plan(std::span<const double> values,
                                           std::span<const double> costs,
                                           std::span<const Capacity> capacities, double budget);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// Exact optimum by enumeration. Among equal-valued optima the
/// lexicographically smallest count vector wins. Throws caws::Error when
/// the product of (capacity + 1) exceeds kBruteForceLimit.
Allocation brute_force_bkp(std::span<const double> values, std::span<const double> costs,
                           std::span<const Capacity> capacities, double budget);

}  // namespace caws::knapsack
