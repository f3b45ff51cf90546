#pragma once

// Episode runner, regret baselines, the closed-form regret bound and sweep
// aggregation.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "caws/config.hpp"
#include "caws/environment.hpp"
#include "caws/model.hpp"
#include "caws/partition.hpp"
#include "caws/policies.hpp"

namespace caws {

/// Optional time-varying input of an episode. Both pointers are set or
/// neither.
struct TimeVarying {
  const ContextTrace* trace = nullptr;
  const MuMap* map = nullptr;

  bool active() const { return trace != nullptr; }
};

/// Runs select -> reward -> observe while some available worker is
/// affordable. The policy draws from mix_seed(seed, {kPolicyStream}), the
/// rewards from mix_seed(seed, {kRewardStream}). In time-varying mode the
/// round t contexts are pushed to the policy before each selection and
/// rewards use the instant means.
RunResult run_episode(const TaskInstance& instance, Policy& policy, const RewardModel& reward,
                      std::uint64_t seed, TimeVarying tv = {});

/// Rounded fractional optimum over the true means.
Allocation baseline_allocation(const TaskInstance& instance);

/// Rounded fractional optimum over worker-rounds: every (worker, round)
/// of the trace is one unit with its instant mean, and a worker contributes
/// at most its capacity in total. Counts are per worker.
Allocation baseline_allocation(const TaskInstance& instance, const ContextTrace& trace,
                               const MuMap& map);

/// baseline.expected_value minus the mean over results of
/// sum_i means_i * final_counts_i. Throws caws::Error on an empty list.
double empirical_regret(std::span<const RunResult> results, const Allocation& baseline,
                        std::span<const double> means);

/// Smallest density gap between an unselected and a selected cube under
/// the rounded fractional optimum over cube means. Absent when no pair is
/// defined or the gap is zero.
std::optional<double> delta_min(const TaskInstance& instance, const PartitionGrid& grid);

struct BoundInputs {
  double budget = 1.0;
  std::size_t dimension = 1;
  double alpha = 1.0;
  double L = 1.0;
  double c_min = 1.0;
  double c_max = 1.0;
  double tau_max = 1.0;
  std::optional<double> delta_min;
};

/// Inputs for an instance, with delta_min over the grid the granularity
/// rule picks for its budget.
BoundInputs bound_inputs(const TaskInstance& instance);

/// Closed-form regret bound; absent (not finite) without delta_min.
/// Throws caws::Error on invalid inputs.
std::optional<double> theorem1_bound(const BoundInputs& inputs);

struct BoundReport {
  std::size_t d = 1;
  double delta = 0.0;
  std::optional<double> delta_min;
  std::optional<double> xi;
  std::optional<double> h;
  std::optional<double> bound;
};

BoundReport bound_report(const BoundInputs& inputs);

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};

Moments moments(std::span<const double> xs);

struct SummaryRow {
  std::string policy;
  double budget = 0.0;
  std::size_t workers = 0;
  std::size_t dimension = 0;
  double alpha = 0.0;
  std::size_t replications = 0;
  double mean_revenue = 0.0;
  double std_revenue = 0.0;
  double mean_expected_revenue = 0.0;
  double mean_regret = 0.0;
  double std_regret = 0.0;
  std::optional<double> bound;
};

struct EpisodeLog {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<StepRecord> steps;
};

struct SweepResult {
  std::vector<SummaryRow> rows;
  std::vector<EpisodeLog> logs;  // only with log_steps
};

/// Episode seed for one grid point and replication. Depends on values, not
/// grid positions, and not on the policy, so every policy sees the same
/// reward streams.
std::uint64_t episode_seed(std::uint64_t base, std::size_t workers, double budget,
                           std::size_t replication);

/// Every (workers, budget, policy) point with `replications` episodes each.
/// Rows follow grid order (workers, then budget, then policy) whatever
/// `jobs` is.
SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs = 1);

/// "# caws <version> config_digest=<hex> config=<json>"
std::string metadata_line(const ExperimentConfig& config);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows,
                       const std::string& metadata);
void write_step_log_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                        const std::string& metadata);

}  // namespace caws
