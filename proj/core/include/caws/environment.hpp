#pragma once

// Reward generation, context-to-mean maps, synthetic instance and drift
// trace generators, and flat-file ingestion.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "caws/model.hpp"
#include "caws/rng.hpp"

namespace caws {

enum class RewardKind { bernoulli, bounded_continuous };

struct RewardModel {
  RewardKind kind = RewardKind::bernoulli;
};

RewardKind parse_reward_kind(std::string_view name);
std::string_view to_string(RewardKind kind);

/// One i.i.d. reward with the given mean. Bernoulli draws are in {0,1};
/// bounded-continuous draws are uniform on
/// [mean - w, mean + w] with w = min(mean, 1 - mean).
double sample_reward(double mean, const RewardModel& model, Rng& rng);

/// Constants (L, alpha) of a Hölder condition |f(s) - f(s')| <= L |s - s'|^alpha.
struct HolderCertificate {
  double L = 1.0;
  double alpha = 1.0;
};

/// Context-to-mean map with image in [0,1].
class MuMap {
 public:
  enum class Kind { coordinate_mean, gaussian_distance_battery, custom_table };

  /// Average of the context coordinates.
  static MuMap coordinate_mean();
  /// exp(-d^2 / (2 sigma^2)) * sqrt(b) for context (d, b): the Gaussian
  /// distance-battery model divided by its supremum 1/(sigma sqrt(2 pi)).
  static MuMap gaussian_distance_battery(double sigma = 1.0);
  /// Multilinear interpolation of node values on a uniform grid with
  /// `nodes_per_axis` nodes per axis (axis 0 fastest).
  static MuMap custom_table(std::size_t nodes_per_axis, std::size_t dimension,
                            std::vector<double> node_values);

  Kind kind() const { return kind_; }
  double sigma() const { return sigma_; }

  double operator()(std::span<const double> context) const;

  /// A certificate the map provably satisfies on [0,1]^dimension.
  HolderCertificate certificate(std::size_t dimension) const;

 private:
  Kind kind_ = Kind::coordinate_mean;
  double sigma_ = 1.0;
  std::size_t nodes_ = 0;
  std::size_t table_dimension_ = 0;
  std::vector<double> table_;
};

double eval_mu_map(const MuMap& map, std::span<const double> context);

/// Accepts "coordinate-mean" and "gaussian-distance-battery".
MuMap parse_mu_map(std::string_view name);
std::string_view to_string(MuMap::Kind kind);

/// Largest observed |f(s) - f(s')| / |s - s'|^alpha over random pairs.
double fit_holder_constant(const MuMap& map, std::size_t dimension, double alpha,
                           std::size_t pairs, Rng& rng);

/// Overwrites every worker's true mean with map(context).
void apply_mu_map(TaskInstance& instance, const MuMap& map);

std::vector<double> means_of(const MuMap& map, const ContextMatrix& contexts);

struct GeneratorParams {
  std::size_t workers = 1;
  std::size_t dimension = 2;
  double cost_min = 1.0;
  double cost_max = 1.5;
  Capacity capacity_min = 20;
  Capacity capacity_max = 40;
  MuMap mu_map = MuMap::coordinate_mean();
  std::uint64_t seed = 1;
  double budget = 1.0;
};

/// Workers with i.i.d. uniform contexts, uniform costs, uniform integer
/// capacities and true_mean = mu_map(context). Deterministic in the seed.
TaskInstance gen_synthetic(const GeneratorParams& params);

/// Per-round contexts for every worker. Round t (1-based) resolves to the
/// last stored round when t exceeds the trace length.
class ContextTrace {
 public:
  ContextTrace() = default;
  explicit ContextTrace(std::vector<ContextMatrix> rounds);

  std::size_t rounds() const { return rounds_.size(); }
  std::size_t workers() const { return rounds_.empty() ? 0 : rounds_.front().rows(); }
  std::size_t dimension() const { return rounds_.empty() ? 0 : rounds_.front().dimension(); }
  bool empty() const { return rounds_.empty(); }

  const ContextMatrix& at(std::uint64_t t) const;

  friend bool operator==(const ContextTrace&, const ContextTrace&) = default;

 private:
  std::vector<ContextMatrix> rounds_;
};

struct DriftParams {
  double decay_rate = 0.05;
  double step_size = 0.05;
  // Battery at round 1; drawn uniformly from [0,1] when unset.
  std::optional<double> start_battery;
};

/// Two-dimensional (distance, battery) trace. Battery drops by decay_rate
/// per round and recharges to 1 when it would go below 0; distance follows
/// a random walk with uniform steps in [-step, step] reflected into [0,1].
ContextTrace gen_drift_trace(std::size_t workers, std::size_t rounds, const DriftParams& params,
                             std::uint64_t seed);

/// Copies round-1 contexts of the trace into the instance and refreshes
/// true means through the map.
void apply_trace_start(TaskInstance& instance, const ContextTrace& trace, const MuMap& map);

// Worker CSV: id,cost,capacity,mu,ctx_0,...,ctx_{M-1}

void write_worker_csv(std::ostream& out, const TaskInstance& instance);

/// Parses and validates a worker CSV. An empty `mu` field is filled from
/// `fill` and is an error without one. When `dimension` is given, the
/// header must carry exactly that many context columns.
TaskInstance read_worker_csv(std::istream& in, std::optional<std::size_t> dimension = {},
                             const MuMap* fill = nullptr);
TaskInstance load_worker_csv(const std::filesystem::path& path,
                             std::optional<std::size_t> dimension = {},
                             const MuMap* fill = nullptr);

// Trace CSV: t,id,ctx_0,...,ctx_{M-1}; rounds start at 1.

void write_trace_csv(std::ostream& out, const ContextTrace& trace);

/// Workers absent at round t keep their context from round t-1; round 0 is
/// `base`.
ContextTrace read_trace_csv(std::istream& in, const ContextMatrix& base);
ContextTrace load_trace_csv(const std::filesystem::path& path, const ContextMatrix& base);

}  // namespace caws
