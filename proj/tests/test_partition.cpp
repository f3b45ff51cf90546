#include <gtest/gtest.h>

#include <cmath>

#include "caws/model.hpp"
#include "caws/partition.hpp"
#include "caws/properties.hpp"
#include "caws/rng.hpp"

namespace caws {
namespace {

using Ctx = std::vector<double>;

TEST(ChooseGranularity, Examples) {
  EXPECT_EQ(choose_granularity(1.0, 1.0, 2), 1u);
  EXPECT_EQ(choose_granularity(1.0, 0.5, 7), 1u);
  EXPECT_EQ(choose_granularity(100000.0, 1.0, 2), 47u);
  EXPECT_EQ(choose_granularity(40000.0, 1.0, 2), 35u);
}

TEST(ChooseGranularity, ExactPowers) {
  // pow(64, 1/3) is 3.9999999999999996 in double.
  EXPECT_EQ(choose_granularity(64.0, 1.0, 2), 4u);
  EXPECT_EQ(choose_granularity(27.0, 1.0, 2), 3u);
  EXPECT_EQ(choose_granularity(1000.0, 1.0, 2), 10u);
  EXPECT_EQ(choose_granularity(1001.0, 1.0, 2), 11u);
  EXPECT_EQ(choose_granularity(1e6, 1.0, 2), 100u);
  EXPECT_EQ(choose_granularity(1.5, 1.0, 2), 2u);
}

TEST(ChooseGranularity, RejectsBudgetBelowOne) {
  EXPECT_THROW(choose_granularity(0.5, 1.0, 2), Error);
}

TEST(PartitionGrid, CubeIndexExamples) {
  const PartitionGrid g(4, 2);
  EXPECT_EQ(g.cube_count(), 16u);
  EXPECT_EQ(g.cube_index(Ctx{0, 0}), 0u);
  EXPECT_EQ(g.cube_index(Ctx{1.0, 1.0}), 15u);
  EXPECT_EQ(g.cube_index(Ctx{0.26, 0.5}), 9u);
}

TEST(PartitionGrid, CubeIndexErrors) {
  const PartitionGrid g(4, 2);
  EXPECT_THROW(g.cube_index(Ctx{0.5}), Error);
  EXPECT_THROW(g.cube_index(Ctx{0.5, 1.5}), Error);
  EXPECT_THROW(g.cube_index(Ctx{-0.1, 0.5}), Error);
}

TEST(PartitionGrid, CoordsInvertIndex) {
  const PartitionGrid g(5, 3);
  for (std::size_t q = 0; q < g.cube_count(); ++q) {
    const auto c = g.cube_coords(q);
    EXPECT_EQ(c[0] + 5 * c[1] + 25 * c[2], q);
  }
}

TEST(PartitionGrid, EveryContextLandsInItsCube) {
  Rng rng(1);
  for (std::size_t d : {1, 2, 3, 7, 47}) {
    const PartitionGrid g(d, 2);
    for (int k = 0; k < 2000; ++k) {
      const Ctx x{uniform01(rng), uniform01(rng)};
      const std::size_t q = g.cube_index(x);
      ASSERT_LT(q, g.cube_count());
      const auto c = g.cube_coords(q);
      for (std::size_t j = 0; j < 2; ++j) {
        EXPECT_LE(static_cast<double>(c[j]) / static_cast<double>(d), x[j]);
        EXPECT_GE(static_cast<double>(c[j] + 1) / static_cast<double>(d), x[j]);
      }
    }
  }
}

TEST(HolderDelta, Examples) {
  EXPECT_NEAR(holder_delta(1.0, 1.0, 2, 2), 0.7071067811865476, 1e-15);
  EXPECT_NEAR(holder_delta(1.0, 2.0, 1, 10), 0.01, 1e-15);
  double prev = holder_delta(1.0, 1.0, 2, 1);
  for (std::size_t d = 2; d < 200; ++d) {
    const double cur = holder_delta(1.0, 1.0, 2, d);
    EXPECT_LT(cur, prev);
    prev = cur;
  }
}

TEST(CubeStats, UpdateExamples) {
  EXPECT_EQ(update_cube_stats({0, 0.0}, 1.0), (CubeStats{1, 1.0}));
  EXPECT_EQ(update_cube_stats({1, 1.0}, 0.0), (CubeStats{2, 0.5}));
  const CubeStats s = update_cube_stats({3, 1.0 / 3.0}, 1.0);
  EXPECT_EQ(s.pulls, 4u);
  EXPECT_NEAR(s.mean_reward, 0.5, 1e-15);
  EXPECT_THROW(update_cube_stats({0, 0.0}, 1.5), Error);
}

TEST(CubeStats, RunningMeanMatchesBatchMean) {
  Rng rng(4);
  CubeStats s;
  double sum = 0.0;
  for (int k = 1; k <= 10000; ++k) {
    const double r = uniform01(rng);
    sum += r;
    s = update_cube_stats(s, r);
    ASSERT_NEAR(s.mean_reward, sum / k, 1e-12);
  }
}

TEST(UcbIndex, Examples) {
  EXPECT_NEAR(ucb_index_with_log({8, 0.5}, 4.0), 1.5, 1e-15);
  EXPECT_EQ(ucb_index({3, 0.25}, 1), 0.25);
  EXPECT_THROW(ucb_index({0, 0.0}, 5), Error);
  EXPECT_THROW(ucb_index({1, 0.0}, 0), Error);
}

TEST(UcbIndex, MonotoneInPullsAndTime) {
  for (std::uint64_t n = 1; n < 100; ++n) {
    EXPECT_GT(ucb_index({n, 0.4}, 1000), ucb_index({n + 1, 0.4}, 1000));
    EXPECT_LT(ucb_index({n, 0.4}, 1000), ucb_index({n, 0.4}, 1001));
  }
  EXPECT_NEAR(ucb_index({100000000, 0.4}, 50), 0.4, 1e-3);
}

TEST(CubeGap, SameCubeGapWithinDelta) {
  for (std::size_t d : {2, 5, 10, 47}) {
    const properties::Report r = properties::cube_gap(d, 5000, 3);
    EXPECT_TRUE(r.passed()) << r.first_failure;
  }
}

}  // namespace
}  // namespace caws
