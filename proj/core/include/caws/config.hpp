#pragma once

// Experiment configuration: one JSON document, every field optional, with
// the defaults below.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "caws/environment.hpp"
#include "caws/policies.hpp"

namespace caws {

inline constexpr std::string_view kVersion = "0.1.0";

struct ExperimentConfig {
  // Instance source: a worker CSV, or the synthetic generator once per
  // entry of `workers`.
  std::optional<std::string> worker_file;
  std::vector<std::size_t> workers{1000};
  std::size_t dimension = 2;
  double cost_min = 1.0;
  double cost_max = 1.5;
  Capacity capacity_min = 20;
  Capacity capacity_max = 40;
  std::string mu_map = "coordinate-mean";
  double sigma = 1.0;
  // Replace the map's certificate when set.
  std::optional<double> holder_L;
  std::optional<double> holder_alpha;

  std::vector<PolicyKind> policies{PolicyKind::caws};
  double epsilon = 0.1;
  Granularity granularity;

  std::vector<double> budgets{1000.0};
  std::size_t replications = 10;
  std::uint64_t seed = 1;
  RewardKind reward = RewardKind::bernoulli;

  // Time-varying contexts: a trace CSV, or a generated drift trace.
  std::optional<std::string> trace_file;
  std::optional<DriftParams> drift;
  std::size_t trace_rounds = 1300;

  bool log_steps = false;

  bool time_varying() const { return trace_file.has_value() || drift.has_value(); }
};

/// Throws caws::Error on the first invalid field.
void validate_config(const ExperimentConfig& config);

/// Parses a JSON document. Unknown keys are rejected. `budgets` is either
/// a list or {"start", "stop", "step"} (inclusive).
ExperimentConfig parse_config(std::string_view json);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical compact JSON with sorted keys.
std::string dump_config(const ExperimentConfig& config);

/// FNV-1a 64 of dump_config.
std::uint64_t config_digest(const ExperimentConfig& config);

/// start, start + step, ... up to stop inclusive; computed as start + k*step.
std::vector<double> budget_range(double start, double stop, double step);

MuMap resolve_mu_map(const ExperimentConfig& config);

PolicyConfig policy_config(const ExperimentConfig& config, PolicyKind kind);

}  // namespace caws
