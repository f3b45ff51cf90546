#include "caws/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "caws/model.hpp"

namespace caws {

PartitionGrid::PartitionGrid(std::size_t cells_per_axis, std::size_t dimension)
    : d_(cells_per_axis), dimension_(dimension), cube_count_(1) {
  if (d_ == 0) throw Error("partition: cells per axis must be positive");
  if (dimension_ == 0) throw Error("partition: dimension must be positive");
  for (std::size_t j = 0; j < dimension_; ++j) {
    if (cube_count_ > std::numeric_limits<std::size_t>::max() / d_) {
      throw Error("partition: d^M overflows");
    }
    cube_count_ *= d_;
  }
}

std::size_t PartitionGrid::cube_index(std::span<const double> context) const {
  if (context.size() != dimension_) throw Error("cube_index: dimension mismatch");
  std::size_t index = 0;
  std::size_t stride = 1;
  for (double x : context) {
    if (!(x >= 0.0 && x <= 1.0)) throw Error("cube_index: context out of range");
    const auto cell = std::min(static_cast<std::size_t>(x * static_cast<double>(d_)), d_ - 1);
    index += cell * stride;
    stride *= d_;
  }
  return index;
}

std::vector<std::size_t> PartitionGrid::cube_coords(std::size_t index) const {
  std::vector<std::size_t> coords(dimension_);
  for (std::size_t j = 0; j < dimension_; ++j) {
    coords[j] = index % d_;
    index /= d_;
  }
  return coords;
}

std::size_t choose_granularity(double budget, double alpha, std::size_t dimension) {
  if (!(budget >= 1.0)) throw Error("choose_granularity: budget must be at least 1");
  if (!(alpha > 0.0) || dimension == 0) throw Error("choose_granularity: bad alpha or dimension");
  const double exponent = alpha + static_cast<double>(dimension);
  auto d = static_cast<std::size_t>(std::ceil(std::pow(budget, 1.0 / exponent)));
  d = std::max<std::size_t>(d, 1);
  // pow(27, 1/3) is 3.0000000000000004; walk back while (d-1)^e still covers B.
  while (d > 1 && std::pow(static_cast<double>(d - 1), exponent) >= budget) --d;
  while (std::pow(static_cast<double>(d), exponent) < budget) ++d;
  return d;
}

double holder_delta(double L, double alpha, std::size_t dimension, std::size_t d) {
  return L * std::pow(std::sqrt(static_cast<double>(dimension)) / static_cast<double>(d), alpha);
}

CubeStats update_cube_stats(CubeStats stats, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) throw Error("update_cube_stats: reward out of range");
  const double total = stats.mean_reward * static_cast<double>(stats.pulls) + reward;
  ++stats.pulls;
  stats.mean_reward = total / static_cast<double>(stats.pulls);
  return stats;
}

double ucb_index(const CubeStats& stats, std::uint64_t t) {
  if (stats.pulls == 0) throw Error("ucb_index: cube has no pulls");
  if (t == 0) throw Error("ucb_index: t must be positive");
  return ucb_index_with_log(stats, std::log(static_cast<double>(t)));
}

}  // namespace caws
