#include "caws/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace caws {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(what); }

}  // namespace

TaskInstance validate_instance(TaskInstance instance) {
  if (instance.workers.empty()) fail("instance has no workers");
  if (!(instance.budget > 0.0) || !std::isfinite(instance.budget)) fail("budget must be positive");
  if (instance.dimension == 0) fail("dimension must be positive");
  if (!(instance.holder_L > 0.0)) fail("holder_L must be positive");
  if (!(instance.holder_alpha > 0.0)) fail("holder_alpha must be positive");

  std::vector<bool> seen(instance.workers.size(), false);
  for (const WorkerSpec& w : instance.workers) {
    const std::string tag = "worker " + std::to_string(w.id) + ": ";
    if (w.id >= instance.workers.size()) fail(tag + "id not contiguous from 0");
    if (seen[w.id]) fail(tag + "duplicate id");
    seen[w.id] = true;
    if (w.context.size() != instance.dimension) fail(tag + "context dimension mismatch");
    for (double x : w.context) {
      if (!(x >= 0.0 && x <= 1.0)) fail(tag + "context out of range");
    }
    if (!(w.cost > 0.0) || !std::isfinite(w.cost)) fail(tag + "cost must be positive");
    if (!(w.true_mean >= 0.0 && w.true_mean <= 1.0)) fail(tag + "true_mean out of range");
  }
  // Ids are 0..N-1 and unique; store workers in id order.
  std::sort(instance.workers.begin(), instance.workers.end(),
            [](const WorkerSpec& a, const WorkerSpec& b) { return a.id < b.id; });
  return instance;
}

CostProfile cost_profile(const TaskInstance& instance) {
  CostProfile p;
  p.c_min = std::numeric_limits<double>::infinity();
  p.c_max = 0.0;
  for (const WorkerSpec& w : instance.workers) {
    p.c_min = std::min(p.c_min, w.cost);
    p.c_max = std::max(p.c_max, w.cost);
    p.tau_max = std::max(p.tau_max, w.capacity);
  }
  return p;
}

std::vector<double> true_means(const TaskInstance& instance) {
  std::vector<double> out;
  out.reserve(instance.size());
  for (const auto& w : instance.workers) out.push_back(w.true_mean);
  return out;
}

std::vector<double> costs_of(const TaskInstance& instance) {
  std::vector<double> out;
  out.reserve(instance.size());
  for (const auto& w : instance.workers) out.push_back(w.cost);
  return out;
}

std::vector<Capacity> capacities_of(const TaskInstance& instance) {
  std::vector<Capacity> out;
  out.reserve(instance.size());
  for (const auto& w : instance.workers) out.push_back(w.capacity);
  return out;
}

ContextMatrix contexts_of(const TaskInstance& instance) {
  ContextMatrix m(instance.size(), instance.dimension);
  for (std::size_t i = 0; i < instance.size(); ++i) {
    std::copy(instance.workers[i].context.begin(), instance.workers[i].context.end(),
              m.row(i).begin());
  }
  return m;
}

PolicyView make_view(const TaskInstance& instance) {
  return PolicyView{costs_of(instance), capacities_of(instance), contexts_of(instance)};
}

double allocation_value(std::span<const double> counts, std::span<const double> means) {
  if (counts.size() != means.size()) throw Error("allocation_value: length mismatch");
  double v = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) v += means[i] * counts[i];
  return v;
}

Allocation make_allocation(std::vector<double> counts, std::span<const double> costs,
                           std::span<const double> values) {
  Allocation a;
  a.total_cost = allocation_value(counts, costs);
  a.expected_value = allocation_value(counts, values);
  a.counts = std::move(counts);
  return a;
}

RunResult summarize_steps(std::vector<StepRecord> steps, std::size_t workers, double budget) {
  RunResult r;
  r.final_counts.assign(workers, 0);
  r.residual_budget = budget;
  for (const StepRecord& s : steps) {
    r.realized_revenue += s.reward;
    r.expected_revenue += s.expected;
    r.budget_spent += s.cost;
    r.residual_budget -= s.cost;
    ++r.final_counts.at(s.worker);
  }
  r.iterations = steps.size();
  r.steps = std::move(steps);
  return r;
}

}  // namespace caws
