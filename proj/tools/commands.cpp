#include "commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "caws/config.hpp"
#include "caws/csv.hpp"
#include "caws/environment.hpp"
#include "caws/evaluation.hpp"
#include "caws/properties.hpp"

namespace caws::cli {

namespace fs = std::filesystem;

namespace {

fs::path default_out_dir() {
  if (const char* dir = std::getenv("CAWS_OUT_DIR"); dir != nullptr && *dir != '\0') return dir;
  return ".";
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  ensure_parent(path);
  csv::write_atomically(path, writer);
  return path.string();
}

// Flags shared by run and sweep. Every field is optional so that only
// flags actually given override the config file.
struct ExperimentFlags {
  std::optional<std::string> config;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> instance;
  std::optional<std::size_t> dimension;
  std::optional<std::string> mu_map;
  std::optional<double> sigma;
  std::optional<double> cost_min;
  std::optional<double> cost_max;
  std::optional<Capacity> capacity_min;
  std::optional<Capacity> capacity_max;
  std::optional<double> holder_alpha;
  std::optional<double> holder_L;
  std::optional<double> epsilon;
  std::optional<std::string> granularity;
  std::optional<std::size_t> replications;
  std::optional<std::string> reward;
  std::optional<std::string> trace;
  bool drift = false;
  std::optional<double> decay_rate;
  std::optional<double> step_size;
  std::optional<std::size_t> trace_rounds;
  bool log_steps = false;
  unsigned jobs = 1;
};

void add_experiment_flags(CLI::App& app, ExperimentFlags& f) {
  app.add_option("--config", f.config, "JSON experiment config");
  app.add_option("--out-dir", f.out_dir, "Output directory (default $CAWS_OUT_DIR or .)");
  app.add_option("--seed", f.seed, "Base seed");
  app.add_option("--instance", f.instance, "Worker CSV instead of the generator");
  app.add_option("--dimension", f.dimension, "Context dimension M");
  app.add_option("--mu-map", f.mu_map, "coordinate-mean | gaussian-distance-battery");
  app.add_option("--sigma", f.sigma, "Width of the gaussian map");
  app.add_option("--cost-min", f.cost_min);
  app.add_option("--cost-max", f.cost_max);
  app.add_option("--capacity-min", f.capacity_min);
  app.add_option("--capacity-max", f.capacity_max);
  app.add_option("--holder-alpha", f.holder_alpha, "Override the map's Hölder exponent");
  app.add_option("--holder-L", f.holder_L, "Override the map's Hölder constant");
  app.add_option("--epsilon", f.epsilon, "Exploration share of epsilon_first");
  app.add_option("--granularity", f.granularity, "auto | singleton | cells per axis");
  app.add_option("-R,--replications", f.replications);
  app.add_option("--reward", f.reward, "bernoulli | bounded-continuous");
  app.add_option("--trace", f.trace, "Trace CSV: per-round contexts");
  app.add_flag("--drift", f.drift, "Generate a (distance, battery) drift trace");
  app.add_option("--decay-rate", f.decay_rate, "Battery drop per round of the drift trace");
  app.add_option("--step-size", f.step_size, "Distance step of the drift trace");
  app.add_option("--trace-rounds", f.trace_rounds, "Rounds of the drift trace");
  app.add_flag("--log-steps", f.log_steps, "Also write the per-step log");
  app.add_option("--jobs", f.jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const ExperimentFlags& f) {
  ExperimentConfig c = f.config ? load_config(*f.config) : ExperimentConfig{};
  if (f.seed) c.seed = *f.seed;
  if (f.instance) c.worker_file = *f.instance;
  if (f.dimension) c.dimension = *f.dimension;
  if (f.mu_map) c.mu_map = *f.mu_map;
  if (f.sigma) c.sigma = *f.sigma;
  if (f.cost_min) c.cost_min = *f.cost_min;
  if (f.cost_max) c.cost_max = *f.cost_max;
  if (f.capacity_min) c.capacity_min = *f.capacity_min;
  if (f.capacity_max) c.capacity_max = *f.capacity_max;
  if (f.holder_alpha) c.holder_alpha = *f.holder_alpha;
  if (f.holder_L) c.holder_L = *f.holder_L;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.granularity) c.granularity = parse_granularity(*f.granularity);
  if (f.replications) c.replications = *f.replications;
  if (f.reward) c.reward = parse_reward_kind(*f.reward);
  if (f.trace) {
    c.trace_file = *f.trace;
    c.drift.reset();
  }
  if (f.drift || f.decay_rate || f.step_size) {
    if (!c.drift) c.drift = DriftParams{};
    c.trace_file.reset();
  }
  if (f.decay_rate) c.drift->decay_rate = *f.decay_rate;
  if (f.step_size) c.drift->step_size = *f.step_size;
  if (f.trace_rounds) c.trace_rounds = *f.trace_rounds;
  if (f.log_steps) c.log_steps = true;
  return c;
}

int write_outputs(const ExperimentConfig& config, const SweepResult& result, const fs::path& dir,
                  std::ostream& out) {
  const std::string meta = metadata_line(config);
  out << "wrote " << write_file(dir / "summary.csv", [&](std::ostream& os) {
    write_summary_csv(os, result.rows, meta);
  }) << '\n';
  if (config.log_steps) {
    out << "wrote " << write_file(dir / "steps.csv", [&](std::ostream& os) {
      write_step_log_csv(os, result.logs, meta);
    }) << '\n';
  }
  return 0;
}

std::vector<double> parse_range(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(csv::parse_double(std::string_view(text).substr(start, colon - start), 0));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw Error("--budget-range expects start:stop:step");
  return budget_range(parts[0], parts[1], parts[2]);
}

std::string digest_line(const TaskInstance& inst) {
  const CostProfile p = cost_profile(inst);
  return "N=" + std::to_string(inst.size()) + " M=" + std::to_string(inst.dimension) +
         " c_min=" + csv::format_double(p.c_min) + " c_max=" + csv::format_double(p.c_max) +
         " tau_max=" + std::to_string(p.tau_max);
}

std::string optional_text(const std::optional<double>& x) {
  return x ? csv::format_double(*x) : std::string("undefined");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Budgeted context-aware worker selection simulator", "caws"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // generate
  CLI::App* gen = app.add_subcommand("generate", "Write a synthetic worker CSV");
  GeneratorParams gp;
  std::uint64_t gen_seed = 1;
  std::optional<std::string> gen_out;
  std::string gen_map = "coordinate-mean";
  double gen_sigma = 1.0;
  std::size_t gen_rounds = 0;
  std::optional<std::string> gen_trace_out;
  DriftParams gen_drift;
  gen->add_option("-n,--workers", gp.workers, "Number of workers")->check(CLI::PositiveNumber);
  gen->add_option("--dimension", gp.dimension, "Context dimension M")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--cost-min", gp.cost_min);
  gen->add_option("--cost-max", gp.cost_max);
  gen->add_option("--capacity-min", gp.capacity_min);
  gen->add_option("--capacity-max", gp.capacity_max);
  gen->add_option("--mu-map", gen_map, "coordinate-mean | gaussian-distance-battery");
  gen->add_option("--sigma", gen_sigma);
  gen->add_option("--out", gen_out, "Worker CSV path (default <out-dir>/workers.csv)");
  gen->add_option("--trace-rounds", gen_rounds, "Also write a drift trace with this many rounds");
  gen->add_option("--trace-out", gen_trace_out, "Trace CSV path (default <out-dir>/trace.csv)");
  gen->add_option("--decay-rate", gen_drift.decay_rate);
  gen->add_option("--step-size", gen_drift.step_size);

  // run
  CLI::App* run_cmd = app.add_subcommand("run", "One policy, one budget, R replications");
  ExperimentFlags run_flags;
  std::optional<std::string> run_policy;
  std::optional<double> run_budget;
  std::optional<std::size_t> run_workers;
  add_experiment_flags(*run_cmd, run_flags);
  run_cmd->add_option("--policy", run_policy, "caws | oracle | epsilon_first | bkube | random");
  run_cmd->add_option("--budget", run_budget, "Budget B");
  run_cmd->add_option("-n,--workers", run_workers, "Number of generated workers");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "Grid of budgets x worker counts x policies");
  ExperimentFlags sweep_flags;
  std::vector<std::string> sweep_policies;
  std::vector<double> sweep_budgets;
  std::optional<std::string> sweep_range;
  std::vector<std::size_t> sweep_workers;
  add_experiment_flags(*sweep, sweep_flags);
  sweep->add_option("--policies", sweep_policies, "Policies")->delimiter(',');
  sweep->add_option("--budgets", sweep_budgets, "Budget grid")->delimiter(',');
  sweep->add_option("--budget-range", sweep_range, "start:stop:step, inclusive");
  sweep->add_option("-n,--workers", sweep_workers, "Worker-count grid")->delimiter(',');

  // bound
  CLI::App* bound = app.add_subcommand("bound", "Evaluate the regret bound");
  BoundInputs bi;
  std::optional<double> bound_delta_min;
  std::optional<std::string> bound_instance;
  std::string bound_map = "coordinate-mean";
  std::optional<double> bound_alpha;
  std::optional<double> bound_L;
  bound->add_option("--instance", bound_instance, "Worker CSV with true means");
  bound->add_option("--mu-map", bound_map, "Map filling empty means and certifying (L, alpha)");
  bound->add_option("--budget", bi.budget, "Budget B")->required();
  bound->add_option("--dimension", bi.dimension);
  bound->add_option("--alpha", bound_alpha);
  bound->add_option("--L", bound_L);
  bound->add_option("--c-min", bi.c_min);
  bound->add_option("--c-max", bi.c_max);
  bound->add_option("--tau-max", bi.tau_max);
  bound->add_option("--delta-min", bound_delta_min);

  // selftest
  CLI::App* self = app.add_subcommand("selftest", "Run the cross-module property suites");
  std::uint64_t self_seed = 1;
  self->add_option("--seed", self_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "caws: " << e.what() << '\n';
    return 2;
  }

  try {
    if (gen->parsed()) {
      gp.mu_map = parse_mu_map(gen_map);
      if (gp.mu_map.kind() == MuMap::Kind::gaussian_distance_battery) {
        gp.mu_map = MuMap::gaussian_distance_battery(gen_sigma);
      }
      gp.seed = mix_seed(gen_seed, {kInstanceStream, gp.workers});
      TaskInstance inst = gen_synthetic(gp);
      const fs::path dir = default_out_dir();
      std::optional<ContextTrace> trace;
      if (gen_rounds > 0) {
        if (gp.dimension != 2) throw Error("drift traces need --dimension 2");
        trace = gen_drift_trace(inst.size(), gen_rounds, gen_drift,
                                mix_seed(gen_seed, {kTraceStream, inst.size()}));
        apply_trace_start(inst, *trace, gp.mu_map);
      }
      const std::string path = write_file(gen_out ? fs::path(*gen_out) : dir / "workers.csv",
                                          [&](std::ostream& os) { write_worker_csv(os, inst); });
      out << digest_line(inst) << '\n' << "wrote " << path << '\n';
      if (trace) {
        const std::string tpath =
            write_file(gen_trace_out ? fs::path(*gen_trace_out) : dir / "trace.csv",
                       [&](std::ostream& os) { write_trace_csv(os, *trace); });
        out << "wrote " << tpath << '\n';
      }
      return 0;
    }

    if (run_cmd->parsed()) {
      ExperimentConfig c = resolve(run_flags);
      if (run_policy) c.policies = {parse_policy_kind(*run_policy)};
      if (c.policies.size() != 1) throw Error("run takes exactly one policy");
      if (run_budget) c.budgets = {*run_budget};
      if (c.budgets.size() != 1) throw Error("run takes exactly one budget");
      if (run_workers) c.workers = {*run_workers};
      if (!c.worker_file && c.workers.size() != 1) throw Error("run takes exactly one worker count");
      const SweepResult result = run_sweep(c, run_flags.jobs);
      return write_outputs(c, result, run_flags.out_dir ? fs::path(*run_flags.out_dir) : default_out_dir(),
                           out);
    }

    if (sweep->parsed()) {
      ExperimentConfig c = resolve(sweep_flags);
      if (!sweep_policies.empty()) {
        c.policies.clear();
        for (const std::string& p : sweep_policies) c.policies.push_back(parse_policy_kind(p));
      }
      if (sweep_range && !sweep_budgets.empty()) {
        throw Error("--budgets and --budget-range are exclusive");
      }
      if (sweep_range) c.budgets = parse_range(*sweep_range);
      if (!sweep_budgets.empty()) c.budgets = sweep_budgets;
      if (!sweep_workers.empty()) c.workers = sweep_workers;
      const SweepResult result = run_sweep(c, sweep_flags.jobs);
      return write_outputs(c, result,
                           sweep_flags.out_dir ? fs::path(*sweep_flags.out_dir) : default_out_dir(),
                           out);
    }

    if (bound->parsed()) {
      if (bound_instance) {
        const MuMap map = parse_mu_map(bound_map);
        TaskInstance inst = load_worker_csv(*bound_instance, std::nullopt, &map);
        const HolderCertificate cert = map.certificate(inst.dimension);
        inst.holder_alpha = bound_alpha.value_or(cert.alpha);
        inst.holder_L = bound_L.value_or(cert.L);
        inst.budget = bi.budget;
        bi = bound_inputs(inst);
      } else {
        bi.alpha = bound_alpha.value_or(1.0);
        bi.L = bound_L.value_or(1.0);
        bi.delta_min = bound_delta_min;
      }
      const BoundReport r = bound_report(bi);
      out << "B: " << csv::format_double(bi.budget) << '\n'
          << "M: " << bi.dimension << '\n'
          << "alpha: " << csv::format_double(bi.alpha) << '\n'
          << "L: " << csv::format_double(bi.L) << '\n'
          << "d: " << r.d << '\n'
          << "Delta: " << csv::format_double(r.delta) << '\n'
          << "delta_min: " << optional_text(r.delta_min) << '\n';
      if (r.bound) {
        out << "xi: " << csv::format_double(*r.xi) << '\n'
            << "h(ln B): " << csv::format_double(*r.h) << '\n'
            << "bound: " << csv::format_double(*r.bound) << '\n';
      } else {
        out << "bound: not finite (δ_min = 0 or undefined)\n";
      }
      return 0;
    }

    if (self->parsed()) {
      std::vector<properties::Report> reports;
      reports.push_back(properties::knapsack_oracle(500, self_seed));
      for (std::size_t d : {2, 5, 10, 47}) reports.push_back(properties::cube_gap(d, 10000, self_seed));
      reports.push_back(properties::subroutine_equivalence(1000, self_seed));
      reports.push_back(properties::episode_determinism(3, self_seed));
      std::size_t passed = 0;
      for (const properties::Report& r : reports) {
        out << (r.passed() ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.cases << " cases";
        if (!r.passed()) out << ", " << r.failures << " failed: " << r.first_failure;
        out << ")\n";
        if (r.passed()) ++passed;
      }
      out << "selftest: " << passed << " passed, " << reports.size() - passed << " failed\n";
      return passed == reports.size() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    err << "caws: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace caws::cli
