#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "caws/csv.hpp"
#include "caws/environment.hpp"

namespace caws {
namespace {

using Ctx = std::vector<double>;

template <typename F>
void expect_error_mentions(F&& f, const std::string& fragment) {
  try {
    f();
    FAIL() << "expected error containing '" << fragment << "'";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(SampleReward, BernoulliFrequency) {
  Rng rng(11);
  const RewardModel model{RewardKind::bernoulli};
  const int n = 100000;
  int ones = 0;
  for (int k = 0; k < n; ++k) {
    const double r = sample_reward(0.3, model, rng);
    ASSERT_TRUE(r == 0.0 || r == 1.0);
    ones += r == 1.0;
  }
  EXPECT_NEAR(static_cast<double>(ones) / n, 0.3, 0.01);
}

TEST(SampleReward, IndependentDraws) {
  Rng rng(12);
  const RewardModel model{RewardKind::bernoulli};
  const int n = 100000;
  std::vector<double> xs(n);
  for (double& x : xs) x = sample_reward(0.5, model, rng);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double num = 0.0;
  double den = 0.0;
  for (int k = 0; k < n; ++k) {
    den += (xs[k] - mean) * (xs[k] - mean);
    if (k + 1 < n) num += (xs[k] - mean) * (xs[k + 1] - mean);
  }
  EXPECT_LT(std::abs(num / den), 0.02);
}

TEST(SampleReward, BoundedContinuous) {
  Rng rng(13);
  const RewardModel model{RewardKind::bounded_continuous};
  for (double mu : {0.0, 0.2, 0.5, 0.9, 1.0}) {
    double sum = 0.0;
    const int n = 50000;
    for (int k = 0; k < n; ++k) {
      const double r = sample_reward(mu, model, rng);
      ASSERT_GE(r, 0.0);
      ASSERT_LE(r, 1.0);
      sum += r;
    }
    EXPECT_NEAR(sum / n, mu, 0.01);
  }
  EXPECT_EQ(parse_reward_kind("bounded-continuous"), RewardKind::bounded_continuous);
  EXPECT_THROW(parse_reward_kind("gamma"), Error);
}

TEST(MuMap, Examples) {
  const MuMap mean = MuMap::coordinate_mean();
  EXPECT_NEAR(mean(Ctx{0.2, 0.8}), 0.5, 1e-15);
  EXPECT_EQ(mean(Ctx{0.0, 0.0}), 0.0);
  const MuMap g = MuMap::gaussian_distance_battery(1.0);
  EXPECT_NEAR(g(Ctx{0.0, 1.0}), 1.0, 1e-15);
  EXPECT_EQ(g(Ctx{0.4, 0.0}), 0.0);
  EXPECT_NEAR(g(Ctx{1.0, 0.25}), std::exp(-0.5) * 0.5, 1e-15);
  EXPECT_THROW(g(Ctx{0.1, 0.2, 0.3}), Error);
  EXPECT_THROW(MuMap::gaussian_distance_battery(0.0), Error);
  EXPECT_EQ(parse_mu_map("gaussian-distance-battery").kind(), MuMap::Kind::gaussian_distance_battery);
  EXPECT_THROW(parse_mu_map("linear"), Error);
}

TEST(MuMap, CustomTableInterpolates) {
  const MuMap t = MuMap::custom_table(2, 2, {0.0, 1.0, 0.0, 1.0});
  EXPECT_NEAR(t(Ctx{0.25, 0.9}), 0.25, 1e-15);
  EXPECT_NEAR(t(Ctx{1.0, 0.0}), 1.0, 1e-15);
  EXPECT_THROW(MuMap::custom_table(2, 2, {0.0, 1.0}), Error);
}

TEST(MuMap, CertificatesHoldOnSampledPairs) {
  Rng rng(14);
  std::vector<std::pair<MuMap, std::size_t>> maps{
      {MuMap::coordinate_mean(), 1},
      {MuMap::coordinate_mean(), 2},
      {MuMap::coordinate_mean(), 5},
      {MuMap::gaussian_distance_battery(0.3), 2},
      {MuMap::gaussian_distance_battery(1.0), 2},
      {MuMap::gaussian_distance_battery(2.5), 2},
      {MuMap::custom_table(3, 2, {0.1, 0.9, 0.2, 0.4, 0.4, 0.0, 1.0, 0.3, 0.6}), 2},
  };
  for (const auto& [map, m] : maps) {
    const HolderCertificate cert = map.certificate(m);
    for (int k = 0; k < 100000; ++k) {
      Ctx a(m);
      Ctx b(m);
      for (std::size_t j = 0; j < m; ++j) {
        a[j] = uniform01(rng);
        // Mix of close and far pairs.
        b[j] = k % 2 ? uniform01(rng) : std::clamp(a[j] + 1e-3 * (uniform01(rng) - 0.5), 0.0, 1.0);
      }
      double dist = 0.0;
      for (std::size_t j = 0; j < m; ++j) dist += (a[j] - b[j]) * (a[j] - b[j]);
      dist = std::sqrt(dist);
      ASSERT_LE(std::abs(map(a) - map(b)), cert.L * std::pow(dist, cert.alpha) + 1e-12)
          << "kind " << to_string(map.kind()) << " m " << m;
    }
  }
}

TEST(GenSynthetic, DeterministicAndInRange) {
  GeneratorParams p;
  p.workers = 2000;
  p.seed = 5;
  p.budget = 100.0;
  const TaskInstance a = gen_synthetic(p);
  EXPECT_EQ(a, gen_synthetic(p));
  p.seed = 6;
  EXPECT_NE(a, gen_synthetic(p));

  ASSERT_EQ(a.size(), 2000u);
  EXPECT_EQ(a.budget, 100.0);
  double ctx_sum = 0.0;
  double cost_sum = 0.0;
  for (const WorkerSpec& w : a.workers) {
    EXPECT_GE(w.cost, 1.0);
    EXPECT_LE(w.cost, 1.5);
    EXPECT_GE(w.capacity, 20u);
    EXPECT_LE(w.capacity, 40u);
    EXPECT_EQ(w.true_mean, MuMap::coordinate_mean()(w.context));
    ctx_sum += w.context[0];
    cost_sum += w.cost;
  }
  EXPECT_NEAR(ctx_sum / 2000, 0.5, 0.03);
  EXPECT_NEAR(cost_sum / 2000, 1.25, 0.02);
  EXPECT_NO_THROW(validate_instance(a));
}

TEST(DriftTrace, BatteryDecaysAndRecharges) {
  DriftParams p;
  p.decay_rate = 0.05;
  p.step_size = 0.0;
  p.start_battery = 1.0;
  const ContextTrace trace = gen_drift_trace(3, 50, p, 7);
  ASSERT_EQ(trace.rounds(), 50u);
  for (std::uint64_t t = 1; t <= 50; ++t) {
    const std::uint64_t phase = (t - 1) % 21;
    const double expected = 1.0 - 0.05 * static_cast<double>(phase);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(trace.at(t).row(i)[1], std::max(expected, 0.0), 1e-9) << "t " << t;
      // Zero step size keeps distance fixed.
      EXPECT_EQ(trace.at(t).row(i)[0], trace.at(1).row(i)[0]);
    }
  }
}

TEST(DriftTrace, DistanceStaysInUnitInterval) {
  DriftParams p;
  p.step_size = 0.3;
  const ContextTrace trace = gen_drift_trace(50, 200, p, 8);
  for (std::uint64_t t = 1; t <= 200; ++t) {
    for (std::size_t i = 0; i < 50; ++i) {
      EXPECT_GE(trace.at(t).row(i)[0], 0.0);
      EXPECT_LE(trace.at(t).row(i)[0], 1.0);
    }
  }
  EXPECT_EQ(trace, gen_drift_trace(50, 200, p, 8));
  EXPECT_EQ(trace.at(1000), trace.at(200));
  EXPECT_THROW(trace.at(0), Error);
}

TEST(WorkerCsv, RoundTrip) {
  GeneratorParams p;
  p.workers = 50;
  p.dimension = 3;
  p.seed = 9;
  const TaskInstance a = gen_synthetic(p);
  std::stringstream ss;
  write_worker_csv(ss, a);
  TaskInstance b = read_worker_csv(ss, 3);
  b.budget = a.budget;
  b.holder_L = a.holder_L;
  b.holder_alpha = a.holder_alpha;
  EXPECT_EQ(a.workers, b.workers);
}

TEST(WorkerCsv, Errors) {
  expect_error_mentions(
      [] {
        std::istringstream in("id,cost,capacity,mu,ctx_0,ctx_1,ctx_2\n0,1,1,0.5,0.1,0.2,0.3\n");
        read_worker_csv(in, 2);
      },
      "line 1");
  expect_error_mentions(
      [] {
        std::istringstream in("id,price,capacity,mu,ctx_0\n");
        read_worker_csv(in);
      },
      "line 1");
  expect_error_mentions(
      [] {
        std::istringstream in("id,cost,capacity,mu,ctx_0\n0,1,1,0.5,0.1\n1,1,1,0.5,1.7\n");
        read_worker_csv(in);
      },
      "line 3");
  expect_error_mentions(
      [] {
        std::istringstream in("id,cost,capacity,mu,ctx_0\n0,1,1,,0.1\n");
        read_worker_csv(in);
      },
      "line 2");
}

TEST(WorkerCsv, EmptyMuFilledFromMap) {
  std::istringstream in("id,cost,capacity,mu,ctx_0,ctx_1\n0,1,2,,0.2,0.6\n");
  const MuMap map = MuMap::coordinate_mean();
  const TaskInstance t = read_worker_csv(in, 2, &map);
  EXPECT_NEAR(t.workers[0].true_mean, 0.4, 1e-15);
}

TEST(TraceCsv, CarriesContextsForward) {
  ContextMatrix base(2, 1);
  base.row(0)[0] = 0.1;
  base.row(1)[0] = 0.2;
  std::istringstream in("t,id,ctx_0\n1,0,0.5\n3,1,0.9\n");
  const ContextTrace trace = read_trace_csv(in, base);
  ASSERT_EQ(trace.rounds(), 3u);
  EXPECT_EQ(trace.at(1).row(0)[0], 0.5);
  EXPECT_EQ(trace.at(1).row(1)[0], 0.2);
  EXPECT_EQ(trace.at(2), trace.at(1));
  EXPECT_EQ(trace.at(3).row(0)[0], 0.5);
  EXPECT_EQ(trace.at(3).row(1)[0], 0.9);
  EXPECT_EQ(trace.at(99), trace.at(3));

  std::stringstream out;
  write_trace_csv(out, trace);
  EXPECT_EQ(read_trace_csv(out, base), trace);

  std::istringstream bad("t,id,ctx_0\n1,5,0.5\n");
  EXPECT_THROW(read_trace_csv(bad, base), Error);
}

TEST(ApplyTraceStart, RefreshesMeans) {
  GeneratorParams p;
  p.workers = 4;
  p.seed = 3;
  TaskInstance t = gen_synthetic(p);
  DriftParams d;
  d.start_battery = 1.0;
  const ContextTrace trace = gen_drift_trace(4, 5, d, 1);
  const MuMap map = MuMap::gaussian_distance_battery(1.0);
  apply_trace_start(t, trace, map);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.workers[i].context[0], trace.at(1).row(i)[0]);
    EXPECT_EQ(t.workers[i].true_mean, map(trace.at(1).row(i)));
  }
}

TEST(Csv, FormatRoundTrip) {
  Rng rng(2);
  for (int k = 0; k < 1000; ++k) {
    const double x = uniform01(rng) * std::pow(10.0, static_cast<double>(uniform_below(rng, 20)) - 10);
    EXPECT_EQ(csv::parse_double(csv::format_double(x), 1), x);
  }
  EXPECT_THROW(csv::parse_double("1.5x", 4), Error);
  EXPECT_THROW(csv::parse_uint("-1", 4), Error);
}

}  // namespace
}  // namespace caws
