#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dsprover/schedule.hpp"

using namespace dsprover;

TEST(DynamicSchedule, Endpoints) {
  const DynamicScheduleConfig cfg{6, 12, 5};
  EXPECT_EQ(dynamic_sample_count(cfg, 0.0), 18u);
  EXPECT_EQ(dynamic_sample_count(cfg, 1.0), 6u);
  // 6 + 12 e^-2.5 = 6.985
  EXPECT_EQ(dynamic_sample_count(cfg, 0.5), 7u);
}

TEST(DynamicSchedule, RoundsHalfUp) {
  // a + b e^0 = 2.5 exactly
  EXPECT_EQ(dynamic_sample_count({1.5, 1.0, 1.0}, 0.0), 3u);
  EXPECT_EQ(dynamic_sample_count({1.25, 1.0, 1.0}, 0.0), 2u);
}

TEST(DynamicSchedule, FloorOfOne) {
  EXPECT_EQ(dynamic_sample_count({0.1, 0.1, 5.0}, 1.0), 1u);
}

TEST(DynamicSchedule, ClampsRatio) {
  const DynamicScheduleConfig cfg{};
  EXPECT_EQ(dynamic_sample_count(cfg, -3.0), 18u);
  EXPECT_EQ(dynamic_sample_count(cfg, 7.0), 6u);
}

TEST(DynamicSchedule, MonotoneOnRandomTuples) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> param(0.01, 40.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const DynamicScheduleConfig cfg{param(rng), param(rng), param(rng)};
    double r1 = unit(rng), r2 = unit(rng);
    if (r1 > r2) std::swap(r1, r2);
    EXPECT_GE(dynamic_sample_count(cfg, r1), dynamic_sample_count(cfg, r2));
  }
}

TEST(DynamicSchedule, Validation) {
  EXPECT_THROW(validate(DynamicScheduleConfig{0, 12, 5}), Error);
  EXPECT_THROW(validate(DynamicScheduleConfig{6, -1, 5}), Error);
  EXPECT_THROW(validate(DynamicScheduleConfig{6, 12, -5}), Error);
  EXPECT_NO_THROW(validate(DynamicScheduleConfig{}));
  EXPECT_THROW(validate(FixedScheduleConfig{0}), Error);
}

TEST(FixedSchedule, ConstantAndOversample) {
  EXPECT_EQ(sample_count(FixedScheduleConfig{64}, 0.0), 64u);
  EXPECT_EQ(sample_count(FixedScheduleConfig{64}, 1.0), 64u);
  EXPECT_EQ(oversample_request(18), 90u);
  EXPECT_EQ(oversample_request(6, 3), 18u);
}

TEST(ElapsedRatio, Clamped) {
  const auto t0 = Clock::now();
  const TimeBudget b{std::chrono::seconds(10), t0};
  EXPECT_DOUBLE_EQ(elapsed_ratio(b, t0), 0.0);
  EXPECT_NEAR(elapsed_ratio(b, t0 + std::chrono::seconds(5)), 0.5, 1e-9);
  EXPECT_DOUBLE_EQ(elapsed_ratio(b, t0 + std::chrono::seconds(50)), 1.0);
  EXPECT_DOUBLE_EQ(elapsed_ratio(b, t0 - std::chrono::seconds(1)), 0.0);
  EXPECT_DOUBLE_EQ(elapsed_ratio(TimeBudget{Duration::zero(), t0}, t0), 1.0);
}
