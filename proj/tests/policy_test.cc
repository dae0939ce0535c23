/*
 * Copyright 2026 The IOBBA Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "iobba/policy.h"

#include <cmath>

#include "gtest/gtest.h"
#include "iobba/random.h"

namespace iobba {
namespace {

constexpr double kMinBits = 129e3 * 4;
constexpr double kMaxBits = 3993e3 * 4;

TEST(LadderTest, Standard) {
  const Ladder ladder = Ladder::standard();
  ASSERT_EQ(ladder.size(), 5);
  const double rates[] = {129e3, 378e3, 578e3, 1536e3, 3993e3};
  for (int i = 1; i <= 5; ++i) {
    EXPECT_EQ(ladder.at(i).index, i);
    EXPECT_EQ(ladder.at(i).max_encoding_rate_bps, rates[i - 1]);
    EXPECT_EQ(ladder.at(i).mean_segment_size_bits, rates[i - 1] * 4.0);
  }
  EXPECT_EQ(ladder.segment_duration_s(), 4.0);
}

TEST(LadderTest, Invalid) {
  EXPECT_THROW(Ladder({{"a", 100}}, 4.0), PolicyError);
  EXPECT_THROW(Ladder({{"a", 100}, {"b", 100}}, 4.0), PolicyError);
  EXPECT_THROW(Ladder({{"a", 200}, {"b", 100}}, 4.0), PolicyError);
  EXPECT_THROW(Ladder({{"a", 100}, {"b", 200}}, 0.0), PolicyError);
  EXPECT_THROW(Ladder({{"a", 0}, {"b", 200}}, 4.0), PolicyError);
}

TEST(LinearMapTest, Boundaries) {
  const Ladder ladder = Ladder::standard();
  const SegmentMap map = build_linear_map(ladder, 15, 135, 150);
  EXPECT_EQ(map.value_at(15), kMinBits);
  EXPECT_NEAR(map.value_at(75), 0.5 * (kMinBits + kMaxBits), 1e-6);
  EXPECT_NEAR(map.value_at(135), kMaxBits, 1e-9 * kMaxBits);
  EXPECT_EQ(map.value_at(150), kMaxBits);
  EXPECT_EQ(map.value_at(0), kMinBits);
}

TEST(LinearMapTest, InvalidThresholds) {
  const Ladder ladder = Ladder::standard();
  EXPECT_THROW(build_linear_map(ladder, 0, 135, 150), PolicyError);
  EXPECT_THROW(build_linear_map(ladder, 135, 135, 150), PolicyError);
  EXPECT_THROW(build_linear_map(ladder, 15, 160, 150), PolicyError);
  EXPECT_THROW(build_exponential_map(ladder, 50, 40, 150), PolicyError);
}

TEST(ExponentialMapTest, ClosedForm) {
  const Ladder ladder = Ladder::standard();
  const SegmentMap map = build_exponential_map(ladder, 45, 135, 150);
  // Hand value of (3993/129)^(1/90).
  EXPECT_NEAR(map.beta(), 1.0389, 5e-5);
  EXPECT_NEAR(map.beta(), std::exp(std::log(3993.0 / 129.0) / 90.0), 1e-14);
  EXPECT_NEAR(map.value_at(45), kMinBits, 1e-9 * kMinBits);
  EXPECT_NEAR(map.value_at(135), kMaxBits, 1e-9 * kMaxBits);
  EXPECT_NEAR(map.alpha() * std::pow(map.beta(), 90.0), map.value_at(90),
              1e-6);
}

TEST(ExponentialMapTest, BelowLinearBetweenThresholds) {
  const Ladder ladder = Ladder::standard();
  const SegmentMap exp = build_exponential_map(ladder, 45, 135, 150);
  const SegmentMap lin = build_linear_map(ladder, 45, 135, 150);
  for (int i = 0; i <= 1000; ++i) {
    const double b = 45.0 + 90.0 * i / 1000.0;
    EXPECT_LE(exp.value_at(b), lin.value_at(b) * (1 + 1e-12));
  }
}

TEST(SegmentMapTest, NonDecreasing) {
  const Ladder ladder = Ladder::standard();
  for (const auto& map : {build_exponential_map(ladder, 30, 90, 100),
                          build_linear_map(ladder, 10, 90, 100)}) {
    double prev = 0.0;
    for (double b = 0.0; b <= 100.0; b += 0.1) {
      EXPECT_GE(map.value_at(b), prev);
      prev = map.value_at(b);
    }
  }
}

TEST(QuantizeTest, FloorRule) {
  const Ladder ladder = Ladder::standard();
  EXPECT_EQ(quantize_to_quality(ladder.at(3).mean_segment_size_bits, ladder),
            3);
  EXPECT_EQ(quantize_to_quality(kMinBits - 1, ladder), 1);
  EXPECT_EQ(quantize_to_quality(0.0, ladder), 1);
  EXPECT_EQ(quantize_to_quality(kMaxBits, ladder), 5);
  EXPECT_EQ(quantize_to_quality(1e12, ladder), 5);
  EXPECT_EQ(quantize_to_quality(ladder.at(4).mean_segment_size_bits - 1,
                                ladder),
            3);
}

TEST(QuantizeTest, AgreesWithLinearScan) {
  const Ladder ladder = Ladder::standard();
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double v = rng.uniform(0.0, 2.0 * kMaxBits);
    int expected = 1;
    for (int q = 1; q <= ladder.size(); ++q) {
      if (ladder.at(q).mean_segment_size_bits <= v) expected = q;
    }
    EXPECT_EQ(quantize_to_quality(v, ladder), expected);
  }
}

TEST(OutdoorReservoirTest, Clamps) {
  const Ladder ladder = Ladder::standard();
  // 15.97 Mbit at 4 Mbit/s is about 4 s, below 0.1 * 150.
  EXPECT_EQ(outdoor_r_lower(ladder, 4e6, 150), 15.0);
  EXPECT_EQ(outdoor_r_lower(ladder, 1e3, 150), 45.0);
  EXPECT_EQ(outdoor_r_lower(ladder, 0.0, 150), 45.0);
  EXPECT_NEAR(outdoor_r_lower(ladder, kMaxBits / 30.0, 150), 30.0, 1e-9);
}

// ---------------------------------------------------------------------------

SegmentMaps standard_maps(double b_max = 150) {
  PolicyConfig config;
  config.mode = PolicyMode::kIobba;
  return build_maps(config, Ladder::standard(), b_max, 4e6);
}

TEST(NextQualityTest, IndoorUpgradeNeedsStreak) {
  const Ladder ladder = Ladder::standard();
  const SegmentMaps maps = standard_maps();
  PolicyState state;
  state.mode = PolicyMode::kIobba;
  state.current_quality = 2;
  // Full buffer: the indoor map asks for the top quality.
  for (int request = 1; request <= 2; ++request) {
    const auto d =
        next_quality(state, 149.0, CoverageState::kIndoor, maps, ladder);
    EXPECT_EQ(d.quality, 2) << "request " << request;
    state = d.state;
  }
  const auto third =
      next_quality(state, 149.0, CoverageState::kIndoor, maps, ladder);
  EXPECT_EQ(third.quality, 3);
  EXPECT_EQ(third.state.upgrade_streak, 0);
}

TEST(NextQualityTest, IndoorDowngradeIsImmediate) {
  const Ladder ladder = Ladder::standard();
  const SegmentMaps maps = standard_maps();
  PolicyState state;
  state.mode = PolicyMode::kIobba;
  state.current_quality = 5;
  state.upgrade_streak = 2;
  const auto d = next_quality(state, 10.0, CoverageState::kIndoor, maps, ladder);
  EXPECT_EQ(d.quality, 1);
  EXPECT_EQ(d.state.upgrade_streak, 0);
}

TEST(NextQualityTest, StreakResetsOnOutdoor) {
  const Ladder ladder = Ladder::standard();
  const SegmentMaps maps = standard_maps();
  PolicyState state;
  state.mode = PolicyMode::kIobba;
  state.current_quality = 1;
  state = next_quality(state, 149.0, CoverageState::kIndoor, maps, ladder).state;
  state = next_quality(state, 149.0, CoverageState::kIndoor, maps, ladder).state;
  EXPECT_EQ(state.upgrade_streak, 2);
  state = next_quality(state, 20.0, CoverageState::kOutdoor, maps, ladder).state;
  EXPECT_EQ(state.upgrade_streak, 0);
}

TEST(NextQualityTest, OutdoorAboveUpperIsTop) {
  const Ladder ladder = Ladder::standard();
  const SegmentMaps maps = standard_maps();
  PolicyState state;
  state.mode = PolicyMode::kIobba;
  const auto d =
      next_quality(state, 135.0, CoverageState::kOutdoor, maps, ladder);
  EXPECT_EQ(d.quality, 5);
}

TEST(NextQualityTest, BaselineIgnoresDetection) {
  const Ladder ladder = Ladder::standard();
  const SegmentMaps maps = standard_maps();
  Rng rng(2);
  PolicyState state;
  for (int i = 0; i < 500; ++i) {
    const double b = rng.uniform(0, 150);
    const auto in = next_quality(state, b, CoverageState::kIndoor, maps, ladder);
    const auto out =
        next_quality(state, b, CoverageState::kOutdoor, maps, ladder);
    EXPECT_EQ(in.quality, out.quality);
    EXPECT_EQ(in.quality,
              quantize_to_quality(maps.outdoor.value_at(b), ladder));
    state = in.state;
  }
}

TEST(NextQualityTest, MOneWithSharedMapsIsBaseline) {
  const Ladder ladder = Ladder::standard();
  PolicyConfig config;
  config.mode = PolicyMode::kIobba;
  config.m = 1;
  config.indoor_shape = MapShape::kLinear;
  config.indoor_constant_reservoir = false;
  const SegmentMaps maps = build_maps(config, ladder, 150, 1e6);
  PolicyState iobba{PolicyMode::kIobba, 1, 0, 1, CoverageState::kOutdoor};
  PolicyState base;
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double b = rng.uniform(0, 150);
    const auto det =
        rng.below(2) ? CoverageState::kIndoor : CoverageState::kOutdoor;
    const auto a = next_quality(iobba, b, det, maps, ladder);
    const auto c = next_quality(base, b, det, maps, ladder);
    ASSERT_EQ(a.quality, c.quality);
    iobba = a.state;
    base = c.state;
  }
}

TEST(PolicyConfigTest, Validation) {
  PolicyConfig c;
  EXPECT_NO_THROW(validate_policy_config(c));
  c.m = 0;
  EXPECT_THROW(validate_policy_config(c), PolicyError);
  c = {};
  c.indoor_r_lower_fraction = 0.95;
  EXPECT_THROW(validate_policy_config(c), PolicyError);
  c = {};
  c.reservoir_min_fraction = 0.4;
  EXPECT_THROW(validate_policy_config(c), PolicyError);
}

TEST(BuildMapsTest, DefaultThresholds) {
  const SegmentMaps maps = standard_maps(150);
  EXPECT_EQ(maps.indoor.shape(), MapShape::kExponential);
  EXPECT_DOUBLE_EQ(maps.indoor.r_lower(), 45.0);
  EXPECT_DOUBLE_EQ(maps.indoor.r_upper(), 135.0);
  EXPECT_EQ(maps.outdoor.shape(), MapShape::kLinear);
  EXPECT_DOUBLE_EQ(maps.outdoor.r_lower(), 15.0);
  EXPECT_DOUBLE_EQ(maps.outdoor.r_upper(), 135.0);
}

}  // namespace
}  // namespace iobba
