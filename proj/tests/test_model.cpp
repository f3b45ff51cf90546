#include <gtest/gtest.h>

#include "caws/model.hpp"

namespace caws {
namespace {

WorkerSpec worker(std::size_t id, std::vector<double> ctx, double cost = 1.0, Capacity cap = 1,
                  double mean = 0.5) {
  return {id, std::move(ctx), cost, cap, mean};
}

TaskInstance instance(std::vector<WorkerSpec> workers, std::size_t m = 2, double budget = 10.0) {
  TaskInstance t;
  t.workers = std::move(workers);
  t.dimension = m;
  t.budget = budget;
  return t;
}

void expect_error(const TaskInstance& t, const std::string& fragment) {
  try {
    validate_instance(t);
    FAIL() << "expected error containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(ValidateInstance, AcceptsMinimalInstance) {
  const TaskInstance t = instance({worker(0, {0.5, 0.5})});
  EXPECT_EQ(validate_instance(t), t);
}

TEST(ValidateInstance, RejectsContextOutOfRange) {
  expect_error(instance({worker(0, {1.2, 0.5})}), "context out of range");
}

TEST(ValidateInstance, RejectsDuplicateId) {
  expect_error(instance({worker(0, {0.1, 0.1}), worker(0, {0.2, 0.2})}), "duplicate id");
}

TEST(ValidateInstance, RejectsBadFields) {
  expect_error(instance({worker(0, {0.1})}), "dimension");
  expect_error(instance({worker(0, {0.1, 0.1}, 0.0)}), "cost");
  expect_error(instance({worker(0, {0.1, 0.1}, 1.0, 1, 1.5)}), "mean");
  expect_error(instance({}), "worker");
  expect_error(instance({worker(0, {0.1, 0.1})}, 2, 0.0), "budget");
  expect_error(instance({worker(1, {0.1, 0.1})}), "contiguous");
}

TEST(ValidateInstance, SortsById) {
  const TaskInstance t = validate_instance(instance({worker(1, {0.1, 0.1}), worker(0, {0.2, 0.2})}));
  EXPECT_EQ(t.workers[0].id, 0u);
  EXPECT_EQ(t.workers[1].id, 1u);
}

TEST(CostProfile, MinMax) {
  const TaskInstance t = validate_instance(
      instance({worker(0, {0.1, 0.1}, 1.5, 3), worker(1, {0.2, 0.2}, 1.0, 7)}));
  const CostProfile p = cost_profile(t);
  EXPECT_EQ(p.c_min, 1.0);
  EXPECT_EQ(p.c_max, 1.5);
  EXPECT_EQ(p.tau_max, 7u);
}

TEST(AllocationValue, Examples) {
  EXPECT_EQ(allocation_value(std::vector<double>{0, 0, 0}, std::vector<double>{0.3, 0.2, 0.9}), 0.0);
  EXPECT_NEAR(allocation_value(std::vector<double>{2, 2}, std::vector<double>{0.8, 0.6}), 2.8, 1e-12);
  EXPECT_NEAR(allocation_value(std::vector<double>{2, 2.5}, std::vector<double>{0.8, 0.6}), 3.1, 1e-12);
  EXPECT_THROW(allocation_value(std::vector<double>{1}, std::vector<double>{1, 2}), Error);
}

TEST(PolicyView, HidesMeans) {
  const TaskInstance t = validate_instance(instance({worker(0, {0.1, 0.9}, 1.25, 4, 0.7)}));
  const PolicyView v = make_view(t);
  EXPECT_EQ(v.costs, std::vector<double>{1.25});
  EXPECT_EQ(v.capacities, std::vector<Capacity>{4});
  EXPECT_EQ(v.contexts.row(0)[1], 0.9);
  EXPECT_EQ(v.dimension(), 2u);
}

TEST(SummarizeSteps, TotalsMatchLog) {
  std::vector<StepRecord> steps{{1, 0, 0, 1.5, 1.0, 0.8}, {2, 1, 3, 1.0, 0.0, 0.4},
                                {3, 0, 0, 1.5, 1.0, 0.8}};
  const RunResult r = summarize_steps(steps, 2, 5.0);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_EQ(r.realized_revenue, 2.0);
  EXPECT_NEAR(r.expected_revenue, 2.0, 1e-12);
  EXPECT_EQ(r.budget_spent, 4.0);
  EXPECT_EQ(r.residual_budget, 1.0);
  EXPECT_EQ(r.final_counts, (std::vector<std::uint64_t>{2, 1}));
}

}  // namespace
}  // namespace caws
