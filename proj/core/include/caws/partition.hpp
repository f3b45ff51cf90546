#pragma once

// Uniform hypercube partition of [0,1]^M, per-cube reward statistics and
// the UCB index computed from them.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace caws {

/// d cells per axis, d^M cubes, axis-0-fastest linear index.
class PartitionGrid {
 public:
  PartitionGrid(std::size_t cells_per_axis, std::size_t dimension);

  std::size_t cells_per_axis() const { return d_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t cube_count() const { return cube_count_; }

  /// Per-axis cell floor(x * d), with x == 1 clamped into the last cell.
  std::size_t cube_index(std::span<const double> context) const;

  /// Inverse of the linearization: per-axis cell coordinates of a cube.
  std::vector<std::size_t> cube_coords(std::size_t index) const;

 private:
  std::size_t d_;
  std::size_t dimension_;
  std::size_t cube_count_;
};

/// ceil(budget^(1 / (alpha + dimension))), robust to pow() rounding on exact
/// powers.
std::size_t choose_granularity(double budget, double alpha, std::size_t dimension);

/// Largest mean gap between two contexts in one cube under a Hölder
/// condition with constants (L, alpha): L * (sqrt(M) / d)^alpha.
double holder_delta(double L, double alpha, std::size_t dimension, std::size_t d);

struct CubeStats {
  std::uint64_t pulls = 0;
  double mean_reward = 0.0;

  friend bool operator==(const CubeStats&, const CubeStats&) = default;
};

/// Incremental running mean. Throws caws::Error if reward is outside [0,1].
CubeStats update_cube_stats(CubeStats stats, double reward);

/// mean + sqrt(2 ln t / pulls). Throws caws::Error when pulls == 0 or t == 0.
double ucb_index(const CubeStats& stats, std::uint64_t t);

/// Same as ucb_index with ln(t) precomputed by the caller.
inline double ucb_index_with_log(const CubeStats& stats, double log_t) {
  return stats.mean_reward + std::sqrt(2.0 * log_t / static_cast<double>(stats.pulls));
}

}  // namespace caws
