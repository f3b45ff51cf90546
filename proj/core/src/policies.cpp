#include "caws/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace caws {

using knapsack::PlanEntry;

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "caws") return PolicyKind::caws;
  if (name == "oracle") return PolicyKind::oracle;
  if (name == "epsilon_first") return PolicyKind::epsilon_first;
  if (name == "bkube") return PolicyKind::bkube;
  if (name == "random") return PolicyKind::random;
  throw Error("unknown policy '" + std::string(name) +
              "' (expected caws | oracle | epsilon_first | bkube | random)");
}

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::caws: return "caws";
    case PolicyKind::oracle: return "oracle";
    case PolicyKind::epsilon_first: return "epsilon_first";
    case PolicyKind::bkube: return "bkube";
    case PolicyKind::random: return "random";
  }
  return "";
}

// ---------------------------------------------------------------------------
// CostPool

namespace {

bool entry_less(const CostPool::Entry& a, const CostPool::Entry& b) {
  return a.cost != b.cost ? a.cost < b.cost : a.worker < b.worker;
}

std::size_t draw_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform_below(rng, n));
}

}  // namespace

std::size_t draw_weighted(std::span<const PlanEntry> plan, Rng& rng) {
  std::uint64_t total = 0;
  for (const PlanEntry& e : plan) total += e.count;
  if (total == 0) throw std::logic_error("selection from an empty weight vector");
  std::uint64_t u = uniform_below(rng, total);
  for (const PlanEntry& e : plan) {
    if (u < e.count) return e.worker;
    u -= e.count;
  }
  return plan.back().worker;
}

void CostPool::insert(double cost, std::size_t worker) {
  const Entry e{cost, worker};
  entries_.insert(std::upper_bound(entries_.begin(), entries_.end(), e, entry_less), e);
}

void CostPool::erase(double cost, std::size_t worker) {
  const Entry e{cost, worker};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), e, entry_less);
  if (it == entries_.end() || it->worker != worker) throw std::logic_error("CostPool: missing entry");
  entries_.erase(it);
}

std::size_t CostPool::affordable(double budget) const {
  auto it = std::upper_bound(entries_.begin(), entries_.end(), budget,
                             [](double b, const Entry& e) { return b < e.cost; });
  return static_cast<std::size_t>(it - entries_.begin());
}

// ---------------------------------------------------------------------------
// Policy

Policy::Policy(std::vector<double> costs, std::vector<Capacity> capacities, double budget)
    : costs_(std::move(costs)), capacities_(std::move(capacities)), budget_(budget) {
  if (costs_.size() != capacities_.size()) throw Error("policy: cost/capacity length mismatch");
}

bool Policy::charge(std::size_t worker) {
  if (capacities_.at(worker) == 0) throw std::logic_error("policy: charged an unavailable worker");
  --capacities_[worker];
  budget_ -= costs_[worker];
  return capacities_[worker] == 0;
}

Granularity parse_granularity(std::string_view text) {
  if (text == "auto") return Granularity::automatic();
  if (text == "singleton") return Granularity::singleton();
  std::size_t d = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec != std::errc() || ptr != text.data() + text.size() || d == 0) {
    throw Error("granularity must be 'auto', 'singleton' or a positive integer, got '" +
                std::string(text) + "'");
  }
  return Granularity::fixed(d);
}

std::string to_string(const Granularity& g) {
  switch (g.mode) {
    case Granularity::Mode::automatic: return "auto";
    case Granularity::Mode::singleton: return "singleton";
    case Granularity::Mode::fixed: return std::to_string(g.cells_per_axis);
  }
  return "";
}

// ---------------------------------------------------------------------------
// Subroutine

std::vector<PlanEntry> caws_subroutine_reference(const SubroutineState& s) {
  const double log_t = std::log(static_cast<double>(s.t));
  std::vector<std::size_t> members;
  std::vector<double> values;
  std::vector<double> costs;
  std::vector<Capacity> caps;
  for (std::size_t i = 0; i < s.costs.size(); ++i) {
    if (s.capacities[i] == 0) continue;
    const CubeStats& st = s.stats[s.cell_of[i]];
    if (st.pulls == 0) continue;
    members.push_back(i);
    values.push_back(ucb_index_with_log(st, log_t));
    costs.push_back(s.costs[i]);
    caps.push_back(s.capacities[i]);
  }
  // density_greedy_plan breaks ties by position; positions follow worker
  // id, so that is the ascending-id rule.
  std::vector<PlanEntry> plan = knapsack::density_greedy_plan(values, costs, caps, s.budget);
  for (PlanEntry& e : plan) e.worker = members[e.worker];
  return plan;
}

std::vector<PlanEntry> caws_subroutine_grouped(std::span<const CostPool> pools,
                                               std::span<const CubeStats> stats,
                                               std::span<const Capacity> capacities,
                                               double budget, std::uint64_t t) {
  struct Head {
    double ucb;
    double cost;
    std::size_t worker;
    std::size_t cell;
    std::size_t pos;
  };
  const double log_t = std::log(static_cast<double>(t));
  std::vector<Head> heap;
  double cheapest = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < pools.size(); ++c) {
    if (stats[c].pulls == 0 || pools[c].empty()) continue;
    const CostPool::Entry& e = pools[c][0];
    heap.push_back({ucb_index_with_log(stats[c], log_t), e.cost, e.worker, c, 0});
    cheapest = std::min(cheapest, e.cost);
  }
  const auto lower_priority = [](const Head& a, const Head& b) {
    return knapsack::denser(b.ucb, b.cost, b.worker, a.ucb, a.cost, a.worker);
  };
  std::make_heap(heap.begin(), heap.end(), lower_priority);

  std::vector<PlanEntry> plan;
  double residual = budget;
  while (!heap.empty() && cheapest <= residual) {
    std::pop_heap(heap.begin(), heap.end(), lower_priority);
    Head h = heap.back();
    heap.pop_back();
    // Later members of this cell cost at least as much and the residual
    // only shrinks, so none of them fits either.
    if (h.cost > residual) continue;
    const knapsack::Take take = knapsack::greedy_take(residual, h.cost, capacities[h.worker]);
    plan.push_back({h.worker, take.count});
    residual = take.residual;
    const CostPool& pool = pools[h.cell];
    if (h.pos + 1 < pool.size()) {
      const CostPool::Entry& next = pool[h.pos + 1];
      heap.push_back({h.ucb, next.cost, next.worker, h.cell, h.pos + 1});
      std::push_heap(heap.begin(), heap.end(), lower_priority);
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// CawsPolicy

CawsPolicy::CawsPolicy(const PolicyView& view, double budget, double alpha,
                       Granularity granularity, std::string name)
    : Policy(view.costs, view.capacities, budget), name_(std::move(name)) {
  const std::size_t n = view.size();
  cell_of_.resize(n);
  if (granularity.mode == Granularity::Mode::singleton) {
    for (std::size_t i = 0; i < n; ++i) cell_of_[i] = i;
    stats_.resize(n);
  } else {
    const std::size_t d = granularity.mode == Granularity::Mode::fixed
                              ? granularity.cells_per_axis
                              : choose_granularity(std::max(budget, 1.0), alpha, view.dimension());
    grid_.emplace(d, view.dimension());
    stats_.resize(grid_->cube_count());
    for (std::size_t i = 0; i < n; ++i) cell_of_[i] = grid_->cube_index(view.contexts.row(i));
  }
  pools_.resize(stats_.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (capacities_[i] > 0) pools_[cell_of_[i]].insert(costs_[i], i);
  }
}

void CawsPolicy::refresh_contexts(const ContextMatrix& contexts) {
  if (!grid_) return;
  bool moved = false;
  for (std::size_t i = 0; i < cell_of_.size(); ++i) {
    const std::size_t cell = grid_->cube_index(contexts.row(i));
    if (cell == cell_of_[i]) continue;
    if (capacities_[i] > 0) {
      pools_[cell_of_[i]].erase(costs_[i], i);
      pools_[cell].insert(costs_[i], i);
    }
    cell_of_[i] = cell;
    moved = true;
  }
  // A worker may have entered a cell that was never sampled.
  if (moved) init_cursor_ = 0;
}

std::optional<std::size_t> CawsPolicy::advance_init_cursor() {
  for (; init_cursor_ < stats_.size(); ++init_cursor_) {
    if (stats_[init_cursor_].pulls == 0 && pools_[init_cursor_].affordable(budget_) > 0) {
      return init_cursor_;
    }
  }
  return std::nullopt;
}

std::optional<std::size_t> CawsPolicy::pending_init_cell() const {
  for (std::size_t c = init_cursor_; c < stats_.size(); ++c) {
    if (stats_[c].pulls == 0 && pools_[c].affordable(budget_) > 0) return c;
  }
  return std::nullopt;
}

std::size_t CawsPolicy::select(std::uint64_t t, Rng& rng) {
  if (const auto cell = advance_init_cursor()) {
    const CostPool& pool = pools_[*cell];
    return pool[draw_index(rng, pool.affordable(budget_))].worker;
  }
  const std::vector<PlanEntry> plan = subroutine(t);
  return draw_weighted(plan, rng);
}

void CawsPolicy::observe(std::size_t worker, double reward) {
  const std::size_t cell = cell_of_[worker];
  stats_[cell] = update_cube_stats(stats_[cell], reward);
  if (charge(worker)) pools_[cell].erase(costs_[worker], worker);
}

std::vector<PlanEntry> CawsPolicy::subroutine(std::uint64_t t) const {
  return caws_subroutine_grouped(pools_, stats_, capacities_, budget_, t);
}

std::vector<PlanEntry> CawsPolicy::subroutine_reference(std::uint64_t t) const {
  return caws_subroutine_reference({cell_of_, stats_, costs_, capacities_, budget_, t});
}

// ---------------------------------------------------------------------------
// EpsilonFirstPolicy

EpsilonFirstPolicy::EpsilonFirstPolicy(const PolicyView& view, double budget, double epsilon)
    : Policy(view.costs, view.capacities, budget),
      explore_residual_(epsilon * budget),
      reward_sums_(view.size(), 0.0),
      samples_(view.size(), 0),
      estimates_(view.size(), 0.0) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error("epsilon must be in (0,1)");
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (capacities_[i] > 0) pool_.insert(costs_[i], i);
  }
}

std::size_t EpsilonFirstPolicy::select(std::uint64_t /*t*/, Rng& rng) {
  if (exploring_) {
    const std::size_t n = pool_.affordable(std::min(budget_, explore_residual_));
    if (n > 0) {
      last_was_exploration_ = true;
      return pool_[draw_index(rng, n)].worker;
    }
    exploring_ = false;
  }
  last_was_exploration_ = false;
  if (plan_pos_ >= plan_.size()) {
    plan_ = knapsack::density_greedy_plan(estimates_, costs_, capacities_, budget_);
    plan_pos_ = 0;
    if (plan_.empty()) throw std::logic_error("epsilon_first: no affordable worker");
  }
  PlanEntry& entry = plan_[plan_pos_];
  const std::size_t worker = entry.worker;
  if (--entry.count == 0) ++plan_pos_;
  return worker;
}

void EpsilonFirstPolicy::observe(std::size_t worker, double reward) {
  if (last_was_exploration_) {
    reward_sums_[worker] += reward;
    ++samples_[worker];
    estimates_[worker] = reward_sums_[worker] / static_cast<double>(samples_[worker]);
    explore_residual_ -= costs_[worker];
  }
  if (charge(worker)) pool_.erase(costs_[worker], worker);
}

// ---------------------------------------------------------------------------
// RandomPolicy

RandomPolicy::RandomPolicy(const PolicyView& view, double budget)
    : Policy(view.costs, view.capacities, budget) {
  for (std::size_t i = 0; i < view.size(); ++i) {
    if (capacities_[i] > 0) pool_.insert(costs_[i], i);
  }
}

std::size_t RandomPolicy::select(std::uint64_t /*t*/, Rng& rng) {
  const std::size_t n = pool_.affordable(budget_);
  if (n == 0) throw std::logic_error("random: no affordable worker");
  return pool_[draw_index(rng, n)].worker;
}

void RandomPolicy::observe(std::size_t worker, double /*reward*/) {
  if (charge(worker)) pool_.erase(costs_[worker], worker);
}

// ---------------------------------------------------------------------------
// OraclePolicy

OraclePolicy::OraclePolicy(const PolicyView& view, std::vector<double> means, double budget,
                           std::optional<MuMap> map)
    : Policy(view.costs, view.capacities, budget), means_(std::move(means)), map_(std::move(map)) {
  if (means_.size() != costs_.size()) throw Error("oracle: means length mismatch");
  initial_plan_ = knapsack::density_greedy_plan(means_, costs_, capacities_, budget_);
  plan_ = initial_plan_;
}

void OraclePolicy::refresh_contexts(const ContextMatrix& contexts) {
  if (!map_) return;
  means_ = means_of(*map_, contexts);
  stale_ = true;
}

std::size_t OraclePolicy::select(std::uint64_t /*t*/, Rng& /*rng*/) {
  if (stale_ || plan_pos_ >= plan_.size()) {
    plan_ = knapsack::density_greedy_plan(means_, costs_, capacities_, budget_);
    plan_pos_ = 0;
    stale_ = false;
    if (plan_.empty()) throw std::logic_error("oracle: no affordable worker");
  }
  PlanEntry& entry = plan_[plan_pos_];
  const std::size_t worker = entry.worker;
  if (--entry.count == 0) ++plan_pos_;
  return worker;
}

void OraclePolicy::observe(std::size_t worker, double /*reward*/) { charge(worker); }

// ---------------------------------------------------------------------------

std::unique_ptr<Policy> make_policy(const PolicyConfig& config, const TaskInstance& instance,
                                    const MuMap* map) {
  const double budget = instance.budget;
  if (config.kind == PolicyKind::oracle) {
    std::optional<MuMap> m;
    if (map != nullptr) m = *map;
    return std::make_unique<OraclePolicy>(make_view(instance), true_means(instance), budget, m);
  }
  const PolicyView view = make_view(instance);
  switch (config.kind) {
    case PolicyKind::caws:
      return std::make_unique<CawsPolicy>(view, budget, instance.holder_alpha, config.granularity);
    case PolicyKind::bkube:
      return std::make_unique<CawsPolicy>(view, budget, instance.holder_alpha,
                                          Granularity::singleton(), "bkube");
    case PolicyKind::epsilon_first:
      return std::make_unique<EpsilonFirstPolicy>(view, budget, config.epsilon);
    case PolicyKind::random:
      return std::make_unique<RandomPolicy>(view, budget);
    case PolicyKind::oracle:
      break;
  }
  throw Error("unhandled policy kind");
}

}  // namespace caws
