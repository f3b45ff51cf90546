#pragma once

// Sequential selection policies: context-aware worker selection (CAWS) and
// the reference learners (bounded epsilon-first, B-KUBE, random) plus the
// mean-aware oracle.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caws/environment.hpp"
#include "caws/knapsack.hpp"
#include "caws/model.hpp"
#include "caws/partition.hpp"
#include "caws/rng.hpp"

namespace caws {

enum class PolicyKind { caws, oracle, epsilon_first, bkube, random };

PolicyKind parse_policy_kind(std::string_view name);
std::string_view to_string(PolicyKind kind);

/// Available workers ordered by (cost, id). Affordable workers for a
/// residual budget are always a prefix.
class CostPool {
 public:
  struct Entry {
    double cost = 0.0;
    std::size_t worker = 0;
  };

  void insert(double cost, std::size_t worker);
  void erase(double cost, std::size_t worker);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](std::size_t k) const { return entries_[k]; }

  /// Number of entries with cost <= budget.
  std::size_t affordable(double budget) const;

 private:
  std::vector<Entry> entries_;
};

/// Base for every policy. Tracks the residual budget B(t) and residual
/// capacities tau_i(t) as seen by the policy.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view name() const = 0;

  /// Time-varying mode: called with the round's contexts before select().
  virtual void refresh_contexts(const ContextMatrix& contexts) { (void)contexts; }

  /// Picks the worker for iteration t. Requires at least one available
  /// worker with cost <= residual_budget().
  virtual std::size_t select(std::uint64_t t, Rng& rng) = 0;

  /// Feeds back the reward of the worker returned by the last select().
  virtual void observe(std::size_t worker, double reward) = 0;

  /// Statistics cell of a worker; the worker id for per-worker policies.
  virtual std::size_t cell_of(std::size_t worker) const { return worker; }

  double residual_budget() const { return budget_; }
  std::span<const Capacity> residual_capacities() const { return capacities_; }

 protected:
  Policy(std::vector<double> costs, std::vector<Capacity> capacities, double budget);

  /// Applies tau_i -= 1 and B -= c_i. Returns true if the worker ran out.
  bool charge(std::size_t worker);

  std::vector<double> costs_;
  std::vector<Capacity> capacities_;
  double budget_;
};

struct Granularity {
  enum class Mode { automatic, fixed, singleton };
  Mode mode = Mode::automatic;
  std::size_t cells_per_axis = 0;

  static Granularity automatic() { return {}; }
  static Granularity fixed(std::size_t d) { return {Mode::fixed, d}; }
  static Granularity singleton() { return {Mode::singleton, 0}; }
};

/// "auto", "singleton" or a positive integer.
Granularity parse_granularity(std::string_view text);
std::string to_string(const Granularity& g);

/// Inputs of one density-ordered greedy subroutine call over UCB indices.
struct SubroutineState {
  std::span<const std::size_t> cell_of;
  std::span<const CubeStats> stats;
  std::span<const double> costs;
  std::span<const Capacity> capacities;
  double budget = 0.0;
  std::uint64_t t = 1;
};

/// Direct per-worker transcription: U_i(t) for every available worker in
/// a sampled cell, density ordering, greedy fill. Reference for the
/// grouped version.
std::vector<knapsack::PlanEntry> caws_subroutine_reference(const SubroutineState& state);

/// Same weights computed per cell: U is constant within a cell, so each
/// cell's available workers in (cost, id) order are already in density
/// order, and a k-way merge over cell heads replaces the global sort. A
/// cell whose cheapest remaining worker no longer fits is dropped whole.
std::vector<knapsack::PlanEntry> caws_subroutine_grouped(std::span<const CostPool> pools,
                                                         std::span<const CubeStats> stats,
                                                         std::span<const Capacity> capacities,
                                                         double budget, std::uint64_t t);

/// Draws plan entry k's worker with probability count_k / sum of counts.
std::size_t draw_weighted(std::span<const knapsack::PlanEntry> plan, Rng& rng);

/// Context-aware worker selection over a uniform hypercube partition (or
/// one cell per worker, which is B-KUBE).
///
/// Initialization visits every cell that holds an affordable available
/// worker once, in ascending cell index, drawing uniformly among those
/// workers. Afterwards each iteration runs the density-ordered greedy over
/// UCB indices and draws worker i with probability x_i / sum x.
class CawsPolicy final : public Policy {
 public:
  CawsPolicy(const PolicyView& view, double budget, double alpha, Granularity granularity,
             std::string name = "caws");

  std::string_view name() const override { return name_; }
  void refresh_contexts(const ContextMatrix& contexts) override;
  std::size_t select(std::uint64_t t, Rng& rng) override;
  void observe(std::size_t worker, double reward) override;
  std::size_t cell_of(std::size_t worker) const override { return cell_of_[worker]; }

  std::size_t cell_count() const { return stats_.size(); }
  const std::optional<PartitionGrid>& grid() const { return grid_; }
  std::span<const CubeStats> stats() const { return stats_; }

  /// Weights x(t) from the grouped subroutine.
  std::vector<knapsack::PlanEntry> subroutine(std::uint64_t t) const;
  /// Weights x(t) from the per-worker reference.
  std::vector<knapsack::PlanEntry> subroutine_reference(std::uint64_t t) const;

  /// Next initialization cell, if any cell still awaits its first sample.
  std::optional<std::size_t> pending_init_cell() const;

 private:
  std::optional<std::size_t> advance_init_cursor();

  std::string name_;
  std::optional<PartitionGrid> grid_;
  std::vector<std::size_t> cell_of_;
  std::vector<CubeStats> stats_;
  std::vector<CostPool> pools_;
  std::size_t init_cursor_ = 0;
};

/// Bounded epsilon-first: uniform exploration with an epsilon share of the
/// budget, then density-ordered greedy plans over the empirical means,
/// re-planned whenever a plan is used up.
class EpsilonFirstPolicy final : public Policy {
 public:
  EpsilonFirstPolicy(const PolicyView& view, double budget, double epsilon);

  std::string_view name() const override { return "epsilon_first"; }
  std::size_t select(std::uint64_t t, Rng& rng) override;
  void observe(std::size_t worker, double reward) override;

  bool exploring() const { return exploring_; }
  std::span<const double> estimates() const { return estimates_; }

 private:
  CostPool pool_;
  double explore_residual_;
  bool exploring_ = true;
  bool last_was_exploration_ = false;
  std::vector<double> reward_sums_;
  std::vector<std::uint64_t> samples_;
  std::vector<double> estimates_;
  std::vector<knapsack::PlanEntry> plan_;
  std::size_t plan_pos_ = 0;
};

/// Uniform over affordable available workers.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(const PolicyView& view, double budget);

  std::string_view name() const override { return "random"; }
  std::size_t select(std::uint64_t t, Rng& rng) override;
  void observe(std::size_t worker, double reward) override;

 private:
  CostPool pool_;
};

/// Knows the means. Replays the density-ordered greedy allocation in plan
/// order. With a map and changing contexts it re-plans every round on the
/// instant means.
class OraclePolicy final : public Policy {
 public:
  OraclePolicy(const PolicyView& view, std::vector<double> means, double budget,
               std::optional<MuMap> map = std::nullopt);

  std::string_view name() const override { return "oracle"; }
  void refresh_contexts(const ContextMatrix& contexts) override;
  std::size_t select(std::uint64_t t, Rng& rng) override;
  void observe(std::size_t worker, double reward) override;

  std::span<const knapsack::PlanEntry> initial_plan() const { return initial_plan_; }

 private:
  std::vector<double> means_;
  std::optional<MuMap> map_;
  std::vector<knapsack::PlanEntry> initial_plan_;
  std::vector<knapsack::PlanEntry> plan_;
  std::size_t plan_pos_ = 0;
  bool stale_ = false;
};

struct PolicyConfig {
  PolicyKind kind = PolicyKind::caws;
  double epsilon = 0.1;
  Granularity granularity;
};

/// Builds a policy for one episode. Learners only ever see
/// make_view(instance); the oracle also gets the means (and the map, for
/// time-varying runs).
std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const TaskInstance& instance,
                                    const MuMap* map = nullptr);

}  // namespace caws
