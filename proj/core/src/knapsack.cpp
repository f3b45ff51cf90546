#include "caws/knapsack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace caws::knapsack {

namespace {

// Compares x1*y1 against x2*y2 exactly. Returns -1, 0 or 1.
int compare_products(double x1, double y1, double x2, double y2) {
  const double p1 = x1 * y1;
  const double p2 = x2 * y2;
  if (p1 != p2) return p1 < p2 ? -1 : 1;
  // Rounding is monotone, so equal rounded products leave only the error
  // terms to decide.
  const double e1 = std::fma(x1, y1, -p1);
  const double e2 = std::fma(x2, y2, -p2);
  if (e1 != e2) return e1 < e2 ? -1 : 1;
  return 0;
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(std::string(what) + ": length mismatch");
}

void check_costs(std::span<const double> costs, const char* what) {
  for (double c : costs) {
    if (!(c > 0.0)) throw Error(std::string(what) + ": non-positive cost");
  }
}

}  // namespace

bool denser(double value_a, double cost_a, std::size_t id_a,
            double value_b, double cost_b, std::size_t id_b) {
  // value_a / cost_a > value_b / cost_b  <=>  value_a * cost_b > value_b * cost_a
  const int cmp = compare_products(value_a, cost_b, value_b, cost_a);
  if (cmp != 0) return cmp > 0;
  if (cost_a != cost_b) return cost_a < cost_b;
  return id_a < id_b;
}

DensityOrder density_order(std::span<const double> values, std::span<const double> costs) {
  check_lengths(values.size(), costs.size(), "density_order");
  check_costs(costs, "density_order");
  DensityOrder order;
  order.permutation.resize(values.size());
  std::iota(order.permutation.begin(), order.permutation.end(), std::size_t{0});
  std::sort(order.permutation.begin(), order.permutation.end(), [&](std::size_t a, std::size_t b) {
    return denser(values[a], costs[a], a, values[b], costs[b], b);
  });
  return order;
}

FractionalAllocation solve_fbkp(std::span<const double> values, std::span<const double> costs,
                                std::span<const Capacity> capacities, double budget) {
  check_lengths(values.size(), costs.size(), "solve_fbkp");
  check_lengths(values.size(), capacities.size(), "solve_fbkp");
  if (!(budget >= 0.0)) throw Error("solve_fbkp: negative budget");

  const DensityOrder order = density_order(values, costs);
  FractionalAllocation out;
  out.counts.assign(values.size(), 0.0);
  double residual = budget;
  for (std::size_t i : order.permutation) {
    if (std::fma(costs[i], static_cast<double>(capacities[i]), -residual) <= 0.0) {
      out.counts[i] = capacities[i];
      residual = std::fma(-costs[i], static_cast<double>(capacities[i]), residual);
      continue;
    }
    out.counts[i] = residual / costs[i];
    out.split_worker = i;
    break;
  }
  out.value = allocation_value(out.counts, values);
  out.cost = allocation_value(out.counts, costs);
  return out;
}

Allocation round_down(const FractionalAllocation& fractional, std::span<const double> values,
                      std::span<const double> costs) {
  std::vector<double> counts(fractional.counts.size());
  std::transform(fractional.counts.begin(), fractional.counts.end(), counts.begin(),
                 [](double x) { return std::floor(x); });
  return make_allocation(std::move(counts), costs, values);
}

Take greedy_take(double residual, double cost, std::uint64_t capacity) {
  if (!(cost <= residual) || capacity == 0) return {0, residual};
  double units = std::floor(residual / cost);
  units = std::min(units, static_cast<double>(capacity));
  // The quotient may round up across an integer; step back if it did.
  while (units > 0.0 && std::fma(cost, units, -residual) > 0.0) units -= 1.0;
  return {static_cast<std::uint64_t>(units), std::fma(-cost, units, residual)};
}

std::vector<PlanEntry> density_greedy_plan(std::span<const double> values,
                                           std::span<const double> costs,
                                           std::span<const Capacity> capacities, double budget) {
  check_lengths(values.size(), costs.size(), "density_greedy");
  check_lengths(values.size(), capacities.size(), "density_greedy");
  if (!(budget >= 0.0)) throw Error("density_greedy: negative budget");

  const DensityOrder order = density_order(values, costs);
  std::vector<PlanEntry> plan;
  double residual = budget;
  for (std::size_t i : order.permutation) {
    const Take take = greedy_take(residual, costs[i], capacities[i]);
    if (take.count == 0) continue;
    plan.push_back({i, take.count});
    residual = take.residual;
  }
  return plan;
}

Allocation density_greedy(std::span<const double> values, std::span<const double> costs,
                          std::span<const Capacity> capacities, double budget) {
  std::vector<double> counts(values.size(), 0.0);
  for (const PlanEntry& e : density_greedy_plan(values, costs, capacities, budget)) {
    counts[e.worker] = static_cast<double>(e.count);
  }
  return make_allocation(std::move(counts), costs, values);
}

Allocation brute_force_bkp(std::span<const double> values, std::span<const double> costs,
                           std::span<const Capacity> capacities, double budget) {
  check_lengths(values.size(), costs.size(), "brute_force_bkp");
  check_lengths(values.size(), capacities.size(), "brute_force_bkp");
  std::uint64_t space = 1;
  for (Capacity c : capacities) {
    space *= static_cast<std::uint64_t>(c) + 1;
    if (space > kBruteForceLimit) throw Error("brute_force_bkp: instance too large for enumeration");
  }

  const std::size_t n = values.size();
  std::vector<std::uint64_t> x(n, 0);
  std::vector<std::uint64_t> best(n, 0);
  double best_value = 0.0;
  // Odometer over the box, last coordinate fastest, i.e. lexicographic
  // order; strict improvement keeps the lexicographically smallest optimum.
  for (;;) {
    double cost = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cost += costs[i] * static_cast<double>(x[i]);
      value += values[i] * static_cast<double>(x[i]);
    }
    if (cost <= budget && value > best_value) {
      best_value = value;
      best = x;
    }
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (x[k] < capacities[k]) {
        ++x[k];
        break;
      }
      x[k] = 0;
      if (k == 0) {
        k = n + 1;
        break;
      }
    }
    if (k == n + 1 || n == 0) break;
  }
  std::vector<double> counts(best.begin(), best.end());
  return make_allocation(std::move(counts), costs, values);
}

}  // namespace caws::knapsack
