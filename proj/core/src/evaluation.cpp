#include "caws/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iterator>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "caws/csv.hpp"
#include "caws/knapsack.hpp"
#include "caws/rng.hpp"

namespace caws {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

RunResult run_episode(const TaskInstance& instance, Policy& policy, const RewardModel& reward,
                      std::uint64_t seed, TimeVarying tv) {
  if (tv.active()) {
    if (tv.map == nullptr) throw Error("time-varying episode needs a mu-map");
    if (tv.trace->workers() != instance.size() || tv.trace->dimension() != instance.dimension) {
      throw Error("trace shape does not match the instance");
    }
  }
  Rng policy_rng(mix_seed(seed, {kPolicyStream}));
  Rng reward_rng(mix_seed(seed, {kRewardStream}));

  const std::vector<double> costs = costs_of(instance);
  std::vector<Capacity> capacities = capacities_of(instance);
  std::vector<double> means = true_means(instance);
  CostPool available;
  for (std::size_t i = 0; i < capacities.size(); ++i) {
    if (capacities[i] > 0) available.insert(costs[i], i);
  }

  double budget = instance.budget;
  std::vector<StepRecord> steps;
  const ContextMatrix* shown = nullptr;
  for (std::uint64_t t = 1; !available.empty() && available[0].cost <= budget; ++t) {
    if (tv.active()) {
      // Past the end of the trace the last round repeats; nothing to push.
      const ContextMatrix& contexts = tv.trace->at(t);
      if (&contexts != shown) {
        policy.refresh_contexts(contexts);
        means = means_of(*tv.map, contexts);
        shown = &contexts;
      }
    }
    const std::size_t w = policy.select(t, policy_rng);
    if (w >= capacities.size() || capacities[w] == 0 || costs[w] > budget) {
      throw std::logic_error(std::string(policy.name()) + " selected an unavailable worker");
    }
    const double r = sample_reward(means[w], reward, reward_rng);
    steps.push_back({t, w, policy.cell_of(w), costs[w], r, means[w]});
    policy.observe(w, r);
    budget -= costs[w];
    if (--capacities[w] == 0) available.erase(costs[w], w);
  }
  return summarize_steps(std::move(steps), instance.size(), instance.budget);
}

Allocation baseline_allocation(const TaskInstance& instance) {
  const std::vector<double> means = true_means(instance);
  const std::vector<double> costs = costs_of(instance);
  const std::vector<Capacity> caps = capacities_of(instance);
  return knapsack::round_down(knapsack::solve_fbkp(means, costs, caps, instance.budget), means,
                              costs);
}

Allocation baseline_allocation(const TaskInstance& instance, const ContextTrace& trace,
                               const MuMap& map) {
  const std::size_t n = instance.size();
  if (trace.workers() != n || trace.dimension() != instance.dimension) {
    throw Error("trace shape does not match the instance");
  }
  const std::uint64_t rounds = trace.rounds();
  struct Unit {
    double value;
    double cost;
    std::uint64_t key;  // worker * rounds + round, ties after cost
    std::size_t worker;
  };
  std::vector<Unit> units;
  units.reserve(n * rounds);
  for (std::uint64_t t = 1; t <= rounds; ++t) {
    const ContextMatrix& contexts = trace.at(t);
    for (std::size_t i = 0; i < n; ++i) {
      const WorkerSpec& w = instance.workers[i];
      if (w.capacity == 0) continue;
      units.push_back({map(contexts.row(i)), w.cost, i * rounds + (t - 1), i});
    }
  }
  std::sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) {
    return knapsack::denser(a.value, a.cost, a.key, b.value, b.cost, b.key);
  });

  std::vector<double> counts(n, 0.0);
  double value = 0.0;
  double residual = instance.budget;
  // Consecutive units of one worker form one item with capacity equal to
  // the run length, so a static trace reproduces the static baseline.
  for (std::size_t k = 0; k < units.size();) {
    const std::size_t w = units[k].worker;
    std::size_t end = k + 1;
    while (end < units.size() && units[end].worker == w) ++end;
    const double left = instance.workers[w].capacity - counts[w];
    const double run = std::min(static_cast<double>(end - k), left);
    const double c = units[k].cost;
    double take = run;
    bool split = false;
    if (std::fma(c, run, -residual) > 0.0) {
      take = std::min(std::floor(residual / c), run);
      split = true;
    } else {
      residual = std::fma(-c, run, residual);
    }
    for (std::size_t j = k; j < k + static_cast<std::size_t>(take); ++j) value += units[j].value;
    counts[w] += take;
    if (split) break;
    k = end;
  }

  Allocation out;
  out.counts = std::move(counts);
  out.expected_value = value;
  for (std::size_t i = 0; i < n; ++i) out.total_cost += instance.workers[i].cost * out.counts[i];
  return out;
}

double empirical_regret(std::span<const RunResult> results, const Allocation& baseline,
                        std::span<const double> means) {
  if (results.empty()) throw Error("empirical_regret: no results");
  double sum = 0.0;
  for (const RunResult& r : results) {
    if (r.final_counts.size() != means.size()) throw Error("empirical_regret: length mismatch");
    for (std::size_t i = 0; i < means.size(); ++i) {
      sum += means[i] * static_cast<double>(r.final_counts[i]);
    }
  }
  return baseline.expected_value - sum / static_cast<double>(results.size());
}

std::optional<double> delta_min(const TaskInstance& instance, const PartitionGrid& grid) {
  const std::size_t n = instance.size();
  std::vector<std::size_t> cube(n);
  std::map<std::size_t, std::pair<double, std::size_t>> totals;
  for (std::size_t i = 0; i < n; ++i) {
    cube[i] = grid.cube_index(instance.workers[i].context);
    auto& [sum, count] = totals[cube[i]];
    sum += instance.workers[i].true_mean;
    ++count;
  }
  std::vector<double> cube_means(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [sum, count] = totals[cube[i]];
    cube_means[i] = sum / static_cast<double>(count);
  }
  const std::vector<double> costs = costs_of(instance);
  const Allocation rounded = knapsack::round_down(
      knapsack::solve_fbkp(cube_means, costs, capacities_of(instance), instance.budget),
      cube_means, costs);

  struct Extremes {
    double mean = 0.0;
    double min_unselected = kInf;
    double max_selected = -kInf;
  };
  std::map<std::size_t, Extremes> per_cube;
  for (std::size_t i = 0; i < n; ++i) {
    Extremes& e = per_cube[cube[i]];
    e.mean = cube_means[i];
    if (rounded.counts[i] >= 1.0) {
      e.max_selected = std::max(e.max_selected, costs[i]);
    } else {
      e.min_unselected = std::min(e.min_unselected, costs[i]);
    }
  }
  std::vector<double> unselected;
  std::vector<double> selected;
  for (const auto& [q, e] : per_cube) {
    if (std::isfinite(e.min_unselected)) unselected.push_back(e.mean / e.min_unselected);
    if (std::isfinite(e.max_selected)) selected.push_back(e.mean / e.max_selected);
  }
  if (unselected.empty() || selected.empty()) return std::nullopt;
  std::sort(selected.begin(), selected.end());
  double best = kInf;
  for (double a : unselected) {
    const auto it = std::lower_bound(selected.begin(), selected.end(), a);
    if (it != selected.end()) best = std::min(best, *it - a);
    if (it != selected.begin()) best = std::min(best, a - *std::prev(it));
  }
  if (!(best > 0.0)) return std::nullopt;
  return best;
}

BoundInputs bound_inputs(const TaskInstance& instance) {
  const CostProfile profile = cost_profile(instance);
  BoundInputs in;
  in.budget = instance.budget;
  in.dimension = instance.dimension;
  in.alpha = instance.holder_alpha;
  in.L = instance.holder_L;
  in.c_min = profile.c_min;
  in.c_max = profile.c_max;
  in.tau_max = profile.tau_max;
  const std::size_t d = instance.budget >= 1.0
                            ? choose_granularity(instance.budget, instance.holder_alpha,
                                                 instance.dimension)
                            : 1;
  in.delta_min = delta_min(instance, PartitionGrid(d, instance.dimension));
  return in;
}

namespace {

void check_bound_inputs(const BoundInputs& in) {
  if (!(in.budget > 0.0) || !std::isfinite(in.budget)) throw Error("bound: budget must be positive");
  if (in.dimension == 0) throw Error("bound: dimension must be positive");
  if (!(in.alpha > 0.0)) throw Error("bound: alpha must be positive");
  if (!(in.L >= 0.0)) throw Error("bound: L must be non-negative");
  if (!(in.c_min > 0.0) || !(in.c_max >= in.c_min)) throw Error("bound: need 0 < c_min <= c_max");
  if (!(in.tau_max >= 0.0)) throw Error("bound: tau_max must be non-negative");
}

}  // namespace

std::optional<double> theorem1_bound(const BoundInputs& in) {
  return bound_report(in).bound;
}

BoundReport bound_report(const BoundInputs& in) {
  check_bound_inputs(in);
  BoundReport report;
  report.d = in.budget >= 1.0 ? choose_granularity(in.budget, in.alpha, in.dimension) : 1;
  report.delta = holder_delta(in.L, in.alpha, in.dimension, report.d);
  if (!in.delta_min || !(*in.delta_min > 0.0)) return report;
  report.delta_min = in.delta_min;

  const double m = static_cast<double>(in.dimension);
  const double ratio = in.c_max / in.c_min;
  const double dm = *in.delta_min;
  const double xi = 8.0 / (in.c_min * in.c_min * dm * dm) + ratio * ratio;
  const double h = xi * std::log(in.budget / in.c_min) + std::numbers::pi * std::numbers::pi / 3.0 + 1.0;
  const double growth = std::pow(in.budget, m / (in.alpha + m));
  report.xi = xi;
  report.h = h;
  report.bound = (in.tau_max + std::pow(2.0, m) * growth * h + 1.0) * ratio +
                 4.0 * in.L * std::pow(m, in.alpha / 2.0) * growth / in.c_min + 1.0;
  return report;
}

Moments moments(std::span<const double> xs) {
  if (xs.empty()) throw Error("moments: no values");
  double sum = 0.0;
  for (double x : xs) sum += x;
  Moments m;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (double x : xs) sq += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::uint64_t episode_seed(std::uint64_t base, std::size_t workers, double budget,
                           std::size_t replication) {
  return mix_seed(base, {kEpisodeStream, workers, std::bit_cast<std::uint64_t>(budget),
                         replication});
}

namespace {

struct Population {
  TaskInstance instance;
  std::optional<ContextTrace> trace;
};

Population prepare_population(const ExperimentConfig& config, std::size_t workers,
                              const MuMap& map) {
  Population p;
  if (config.worker_file) {
    p.instance = load_worker_csv(*config.worker_file, std::nullopt, &map);
    const HolderCertificate cert = map.certificate(p.instance.dimension);
    p.instance.holder_L = cert.L;
    p.instance.holder_alpha = cert.alpha;
  } else {
    GeneratorParams g;
    g.workers = workers;
    g.dimension = config.dimension;
    g.cost_min = config.cost_min;
    g.cost_max = config.cost_max;
    g.capacity_min = config.capacity_min;
    g.capacity_max = config.capacity_max;
    g.mu_map = map;
    g.seed = mix_seed(config.seed, {kInstanceStream, workers});
    p.instance = gen_synthetic(g);
  }
  if (config.holder_L) p.instance.holder_L = *config.holder_L;
  if (config.holder_alpha) p.instance.holder_alpha = *config.holder_alpha;

  if (config.trace_file) {
    p.trace = load_trace_csv(*config.trace_file, contexts_of(p.instance));
  } else if (config.drift) {
    p.trace = gen_drift_trace(p.instance.size(), config.trace_rounds, *config.drift,
                              mix_seed(config.seed, {kTraceStream, p.instance.size()}));
  }
  if (p.trace) apply_trace_start(p.instance, *p.trace, map);
  return p;
}

struct GridPoint {
  const Population* population;
  TaskInstance instance;
  Allocation baseline;
  std::optional<double> bound;
};

struct Outcome {
  double revenue = 0.0;
  double expected = 0.0;
  std::vector<StepRecord> steps;
};

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs) {
  validate_config(config);
  const MuMap map = resolve_mu_map(config);

  std::vector<Population> populations;
  if (config.worker_file) {
    populations.push_back(prepare_population(config, 0, map));
  } else {
    for (std::size_t n : config.workers) populations.push_back(prepare_population(config, n, map));
  }

  std::vector<GridPoint> points;
  for (const Population& p : populations) {
    for (double b : config.budgets) {
      GridPoint g{&p, p.instance, {}, {}};
      g.instance.budget = b;
      g.baseline = p.trace ? baseline_allocation(g.instance, *p.trace, map)
                           : baseline_allocation(g.instance);
      g.bound = theorem1_bound(bound_inputs(g.instance));
      points.push_back(std::move(g));
    }
  }

  const std::size_t n_policies = config.policies.size();
  const std::size_t reps = config.replications;
  const std::size_t total = points.size() * n_policies * reps;
  std::vector<Outcome> outcomes(total);
  const RewardModel reward{config.reward};

  auto run_job = [&](std::size_t job) {
    const std::size_t rep = job % reps;
    const std::size_t policy_index = (job / reps) % n_policies;
    const GridPoint& g = points[job / (reps * n_policies)];
    const std::uint64_t seed = episode_seed(config.seed, g.instance.size(), g.instance.budget, rep);
    const ContextTrace* trace = g.population->trace ? &*g.population->trace : nullptr;
    auto policy = make_policy(policy_config(config, config.policies[policy_index]), g.instance,
                              trace ? &map : nullptr);
    RunResult r = run_episode(g.instance, *policy, reward, seed,
                              TimeVarying{trace, trace ? &map : nullptr});
    Outcome& o = outcomes[job];
    o.revenue = r.realized_revenue;
    o.expected = r.expected_revenue;
    if (config.log_steps) o.steps = std::move(r.steps);
  };

  const unsigned threads = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  if (threads == 1) {
    for (std::size_t job = 0; job < total; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) {
      pool.emplace_back([&] {
        for (std::size_t job = next++; job < total; job = next++) {
          try {
            run_job(job);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = total;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SweepResult result;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const GridPoint& g = points[p];
    for (std::size_t k = 0; k < n_policies; ++k) {
      std::vector<double> revenue(reps);
      std::vector<double> expected(reps);
      std::vector<double> regret(reps);
      for (std::size_t rep = 0; rep < reps; ++rep) {
        Outcome& o = outcomes[(p * n_policies + k) * reps + rep];
        revenue[rep] = o.revenue;
        expected[rep] = o.expected;
        regret[rep] = g.baseline.expected_value - o.expected;
        if (config.log_steps) {
          result.logs.push_back({std::string(to_string(config.policies[k])),
                                 episode_seed(config.seed, g.instance.size(), g.instance.budget, rep),
                                 std::move(o.steps)});
        }
      }
      const Moments rev = moments(revenue);
      const Moments reg = moments(regret);
      SummaryRow row;
      row.policy = std::string(to_string(config.policies[k]));
      row.budget = g.instance.budget;
      row.workers = g.instance.size();
      row.dimension = g.instance.dimension;
      row.alpha = g.instance.holder_alpha;
      row.replications = reps;
      row.mean_revenue = rev.mean;
      row.std_revenue = rev.std;
      row.mean_expected_revenue = moments(expected).mean;
      row.mean_regret = reg.mean;
      row.std_regret = reg.std;
      row.bound = g.bound;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

std::string metadata_line(const ExperimentConfig& config) {
  char digest[17];
  std::snprintf(digest, sizeof digest, "%016llx",
                static_cast<unsigned long long>(config_digest(config)));
  return "# caws " + std::string(kVersion) + " config_digest=" + digest +
         " config=" + dump_config(config);
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows,
                       const std::string& metadata) {
  out << metadata << '\n';
  out << "policy,B,N,M,alpha,replications,mean_revenue,std_revenue,mean_expected_revenue,"
         "mean_regret,std_regret,theorem1_bound\n";
  for (const SummaryRow& r : rows) {
    out << r.policy << ',' << csv::format_double(r.budget) << ',' << r.workers << ','
        << r.dimension << ',' << csv::format_double(r.alpha) << ',' << r.replications << ','
        << csv::format_double(r.mean_revenue) << ',' << csv::format_double(r.std_revenue) << ','
        << csv::format_double(r.mean_expected_revenue) << ','
        << csv::format_double(r.mean_regret) << ',' << csv::format_double(r.std_regret) << ','
        << (r.bound ? csv::format_double(*r.bound) : std::string("inf")) << '\n';
  }
}

void write_step_log_csv(std::ostream& out, std::span<const EpisodeLog> logs,
                        const std::string& metadata) {
  out << metadata << '\n';
  out << "policy,seed,t,worker_id,cube,cost,reward\n";
  for (const EpisodeLog& log : logs) {
    for (const StepRecord& s : log.steps) {
      out << log.policy << ',' << log.seed << ',' << s.t << ',' << s.worker << ',' << s.cell << ','
          << csv::format_double(s.cost) << ',' << csv::format_double(s.reward) << '\n';
    }
  }
}

}  // namespace caws
