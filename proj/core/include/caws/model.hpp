#pragma once

// Domain types shared across the library: workers, task instances,
// allocations and per-episode run logs.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace caws {

/// Raised for any violated input contract (bad instance, malformed file,
/// out-of-range parameter).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Capacity = std::uint32_t;

/// Row-major N x M matrix of contexts in [0,1]^M.
class ContextMatrix {
 public:
  ContextMatrix() = default;
  ContextMatrix(std::size_t rows, std::size_t dimension)
      : rows_(rows), dimension_(dimension), data_(rows * dimension, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t dimension() const { return dimension_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * dimension_, dimension_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * dimension_, dimension_};
  }

  std::span<const double> data() const { return data_; }

  friend bool operator==(const ContextMatrix&, const ContextMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dimension_ = 0;
  std::vector<double> data_;
};

struct WorkerSpec {
  std::size_t id = 0;
  std::vector<double> context;
  double cost = 1.0;
  Capacity capacity = 0;
  // Hidden sensing ability. Only the environment, the oracle and the
  // evaluator read it; learners receive a PolicyView instead.
  double true_mean = 0.0;

  friend bool operator==(const WorkerSpec&, const WorkerSpec&) = default;
};

struct TaskInstance {
  std::vector<WorkerSpec> workers;
  double budget = 1.0;
  std::size_t dimension = 1;
  double holder_L = 1.0;
  double holder_alpha = 1.0;

  std::size_t size() const { return workers.size(); }

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct CostProfile {
  double c_min = 0.0;
  double c_max = 0.0;
  Capacity tau_max = 0;
};

/// Checks every TaskInstance invariant and returns the instance unchanged.
/// Throws caws::Error naming the first violation.
TaskInstance validate_instance(TaskInstance instance);

CostProfile cost_profile(const TaskInstance& instance);

std::vector<double> true_means(const TaskInstance& instance);
std::vector<double> costs_of(const TaskInstance& instance);
std::vector<Capacity> capacities_of(const TaskInstance& instance);
ContextMatrix contexts_of(const TaskInstance& instance);

/// What a learning policy is allowed to see: everything but the means.
struct PolicyView {
  std::vector<double> costs;
  std::vector<Capacity> capacities;
  ContextMatrix contexts;

  std::size_t size() const { return costs.size(); }
  std::size_t dimension() const { return contexts.dimension(); }
};

PolicyView make_view(const TaskInstance& instance);

struct Allocation {
  std::vector<double> counts;
  double total_cost = 0.0;
  double expected_value = 0.0;
};

/// Sum of means[i] * counts[i].
double allocation_value(std::span<const double> counts, std::span<const double> means);

/// Builds an Allocation from counts, filling cost and value.
Allocation make_allocation(std::vector<double> counts, std::span<const double> costs,
                           std::span<const double> values);

struct StepRecord {
  std::uint64_t t = 0;
  std::size_t worker = 0;
  std::size_t cell = 0;
  double cost = 0.0;
  double reward = 0.0;
  // Mean reward of the selected worker at selection time.
  double expected = 0.0;
};

struct RunResult {
  std::vector<StepRecord> steps;
  double realized_revenue = 0.0;
  double expected_revenue = 0.0;
  std::vector<std::uint64_t> final_counts;
  double budget_spent = 0.0;
  double residual_budget = 0.0;
  std::uint64_t iterations = 0;
};

/// Recomputes every summary field of a RunResult from its step log.
RunResult summarize_steps(std::vector<StepRecord> steps, std::size_t workers, double budget);

}  // namespace caws
