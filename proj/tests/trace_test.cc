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

#include "iobba/trace.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "iobba/random.h"
#include "test_util.h"

namespace iobba {
namespace {

std::string with_header(const std::string& rows) {
  return std::string(kTraceCsvHeader) + "\n" + rows;
}

TraceError::Kind parse_error_kind(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_trace(in, "x");
  } catch (const TraceError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a TraceError";
  return TraceError::Kind::kInvalidSpec;
}

TEST(TraceParseTest, SingleRow) {
  std::istringstream in(with_header("0.0,4G,-85.0,8.0,outdoor\n"));
  const Trace trace = parse_trace(in, "one");
  ASSERT_EQ(trace.samples.size(), 1u);
  EXPECT_EQ(trace.id, "one");
  EXPECT_EQ(trace.samples[0].network, NetworkType::k4G);
  EXPECT_DOUBLE_EQ(trace.samples[0].power_dbm, -85.0);
  EXPECT_DOUBLE_EQ(trace.samples[0].confidence_radius_m, 8.0);
  EXPECT_EQ(trace.samples[0].truth, CoverageState::kOutdoor);
}

TEST(TraceParseTest, DecreasingTimestamp) {
  EXPECT_EQ(parse_error_kind(with_header("1.0,4G,-85,8,outdoor\n"
                                         "0.5,4G,-85,8,outdoor\n")),
            TraceError::Kind::kNonMonotonicTimestamp);
}

TEST(TraceParseTest, RepeatedTimestamp) {
  EXPECT_EQ(parse_error_kind(with_header("1.0,4G,-85,8,outdoor\n"
                                         "1.0,4G,-85,8,outdoor\n")),
            TraceError::Kind::kNonMonotonicTimestamp);
}

TEST(TraceParseTest, NonPositiveRadius) {
  EXPECT_EQ(parse_error_kind(with_header("1.0,4G,-90.0,-3.0,indoor\n")),
            TraceError::Kind::kOutOfRangeValue);
  EXPECT_EQ(parse_error_kind(with_header("1.0,4G,-90.0,0,indoor\n")),
            TraceError::Kind::kOutOfRangeValue);
}

TEST(TraceParseTest, PowerOutOfRange) {
  EXPECT_EQ(parse_error_kind(with_header("0,4G,-150,8,indoor\n")),
            TraceError::Kind::kOutOfRangeValue);
  EXPECT_EQ(parse_error_kind(with_header("0,4G,-10,8,indoor\n")),
            TraceError::Kind::kOutOfRangeValue);
}

TEST(TraceParseTest, MalformedRows) {
  EXPECT_EQ(parse_error_kind(with_header("0,4G,-85,8\n")),
            TraceError::Kind::kMalformedRow);
  EXPECT_EQ(parse_error_kind(with_header("0,5G,-85,8,outdoor\n")),
            TraceError::Kind::kMalformedRow);
  EXPECT_EQ(parse_error_kind(with_header("0,4G,abc,8,outdoor\n")),
            TraceError::Kind::kMalformedRow);
  EXPECT_EQ(parse_error_kind(with_header("0,4G,-85,8,inside\n")),
            TraceError::Kind::kMalformedRow);
  EXPECT_EQ(parse_error_kind("time,net\n0,4G,-85,8,outdoor\n"),
            TraceError::Kind::kMalformedRow);
}

TEST(TraceParseTest, EmptyTrace) {
  EXPECT_EQ(parse_error_kind(with_header("")), TraceError::Kind::kEmptyTrace);
}

TEST(TraceParseTest, ErrorCarriesLineNumber) {
  std::istringstream in(with_header("0,4G,-85,8,outdoor\n"
                                    "1,4G,-85,8,outdoor\n"
                                    "2,4G,-85,8,nowhere\n"));
  try {
    parse_trace(in, "x");
    FAIL();
  } catch (const TraceError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(TraceParseTest, MixedNetworks) {
  std::istringstream in(with_header("0,2G,-80,8,outdoor\n"
                                    "1,3G,-80,8,outdoor\n"
                                    "2,4G,-80,8,indoor\n"));
  const Trace trace = parse_trace(in, "mix");
  EXPECT_EQ(trace.samples[0].network, NetworkType::k2G);
  EXPECT_EQ(trace.samples[1].network, NetworkType::k3G);
  EXPECT_EQ(trace.samples[2].network, NetworkType::k4G);
  EXPECT_EQ(trace.samples[2].truth, CoverageState::kIndoor);
}

TEST(TraceIoTest, RoundTripIsExact) {
  Rng rng(11);
  for (int round = 0; round < 20; ++round) {
    Trace trace{"rt", {}};
    double t = rng.uniform(0.0, 5.0);
    const size_t n = 1 + rng.below(200);
    for (size_t i = 0; i < n; ++i) {
      trace.samples.push_back(
          {t, static_cast<NetworkType>(rng.below(3)), rng.uniform(-140, -20),
           rng.uniform(0.01, 500.0),
           rng.below(2) == 0 ? CoverageState::kIndoor
                             : CoverageState::kOutdoor});
      t += rng.uniform(1e-3, 3.0);
    }
    std::stringstream buf;
    write_trace(buf, trace);
    EXPECT_EQ(parse_trace(buf, "rt"), trace);
  }
}

TEST(TraceIoTest, FileIdIsBasename) {
  testing::TempDir dir;
  const Trace trace = testing::trace_from_powers({-90, -91}, "walk");
  write_trace_file(dir.file("walk.csv"), trace);
  EXPECT_EQ(read_trace_file(dir.file("walk.csv")), trace);
}

TEST(TraceValidateTest, RejectsBadSamples) {
  Trace trace = testing::trace_from_powers({-90, -91, -92});
  EXPECT_NO_THROW(validate_trace(trace));
  trace.samples[2].timestamp_s = 1.0;
  EXPECT_THROW(validate_trace(trace), TraceError);
  EXPECT_THROW(validate_trace(Trace{"e", {}}), TraceError);
}

// ---------------------------------------------------------------------------

SynthesisSpec two_phase_spec() {
  SynthesisSpec spec;
  spec.indoor = default_indoor_profile();
  spec.outdoor = default_outdoor_profile();
  spec.timeline = {{100.0, CoverageState::kOutdoor},
                   {100.0, CoverageState::kIndoor}};
  return spec;
}

TEST(SynthesizeTest, TimelineLabels) {
  const Trace trace = synthesize_trace(two_phase_spec(), 5);
  ASSERT_EQ(trace.samples.size(), 200u);
  for (size_t i = 0; i < 200; ++i) {
    EXPECT_DOUBLE_EQ(trace.samples[i].timestamp_s, static_cast<double>(i));
    EXPECT_EQ(trace.samples[i].truth, i < 100 ? CoverageState::kOutdoor
                                              : CoverageState::kIndoor);
  }
  EXPECT_NO_THROW(validate_trace(trace));
}

TEST(SynthesizeTest, Deterministic) {
  EXPECT_EQ(synthesize_trace(two_phase_spec(), 9),
            synthesize_trace(two_phase_spec(), 9));
  EXPECT_NE(synthesize_trace(two_phase_spec(), 9),
            synthesize_trace(two_phase_spec(), 10));
}

// Sample mean within 3 standard errors of the configured mean.
void expect_mean_matches(const SynthesisSpec& spec, CoverageState state,
                         double mean, double sd) {
  const Trace trace = synthesize_trace(spec, 21);
  double sum = 0.0;
  size_t n = 0;
  for (const auto& s : trace.samples) {
    if (s.truth != state) continue;
    sum += s.power_dbm;
    ++n;
  }
  ASSERT_EQ(n, 10000u);
  EXPECT_NEAR(sum / static_cast<double>(n), mean,
              3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST(SynthesizeTest, PowerMeansFollowTheProfiles) {
  SynthesisSpec spec;
  spec.indoor = {NormalPower{-105, 5}, QuantizedLogNormalRadius{3.4, 0.5, 1}};
  spec.outdoor = {NormalPower{-85, 5}, QuantizedLogNormalRadius{1.8, 0.4, 1}};
  spec.timeline = {{10000.0, CoverageState::kIndoor},
                   {10000.0, CoverageState::kOutdoor}};
  expect_mean_matches(spec, CoverageState::kIndoor, -105.0, 5.0);
  expect_mean_matches(spec, CoverageState::kOutdoor, -85.0, 5.0);
}

TEST(SynthesizeTest, CorrelatedShadowingKeepsMarginals) {
  SynthesisSpec spec;
  spec.indoor = {NormalPower{-105, 5}, QuantizedLogNormalRadius{3.4, 0.5, 1}};
  spec.outdoor = spec.indoor;
  spec.timeline = {{200000.0, CoverageState::kIndoor}};
  spec.shadowing_correlation_s = 10.0;
  const Trace trace = synthesize_trace(spec, 3);
  double sum = 0.0, sq = 0.0, lag = 0.0;
  const size_t n = trace.samples.size();
  for (size_t i = 0; i < n; ++i) {
    const double x = trace.samples[i].power_dbm + 105.0;
    sum += x;
    sq += x * x;
    if (i > 0) lag += x * (trace.samples[i - 1].power_dbm + 105.0);
  }
  const double var = sq / n;
  EXPECT_NEAR(sum / n, 0.0, 0.5);
  EXPECT_NEAR(std::sqrt(var), 5.0, 0.15);
  // Lag-1 autocorrelation of an AR(1) with coefficient exp(-1/10).
  EXPECT_NEAR(lag / (n - 1) / var, std::exp(-0.1), 0.02);
}

TEST(SynthesizeTest, QuantizedRadiusIsPositiveMultipleOfStep) {
  SynthesisSpec spec = two_phase_spec();
  spec.indoor.radius = QuantizedLogNormalRadius{0.0, 2.0, 2.0};
  const Trace trace = synthesize_trace(spec, 4);
  for (const auto& s : trace.samples) {
    if (s.truth != CoverageState::kIndoor) continue;
    EXPECT_GE(s.confidence_radius_m, 2.0);
    EXPECT_DOUBLE_EQ(std::fmod(s.confidence_radius_m, 2.0), 0.0);
  }
}

TEST(SynthesizeTest, DiscreteRadiusUsesOnlyLevels) {
  SynthesisSpec spec = two_phase_spec();
  spec.outdoor.radius = DiscreteRadius{{4.0, 8.0}, {1.0, 3.0}};
  const Trace trace = synthesize_trace(spec, 4);
  int eights = 0;
  for (size_t i = 0; i < 100; ++i) {
    const double r = trace.samples[i].confidence_radius_m;
    EXPECT_TRUE(r == 4.0 || r == 8.0);
    eights += r == 8.0;
  }
  EXPECT_GT(eights, 50);
}

TEST(SynthesizeTest, InvalidSpecs) {
  SynthesisSpec spec = two_phase_spec();
  spec.timeline.clear();
  EXPECT_THROW(synthesize_trace(spec, 1), TraceError);
  spec = two_phase_spec();
  spec.sample_period_s = 0.0;
  EXPECT_THROW(synthesize_trace(spec, 1), TraceError);
  spec = two_phase_spec();
  spec.indoor.radius = DiscreteRadius{{4.0}, {1.0, 2.0}};
  EXPECT_THROW(synthesize_trace(spec, 1), TraceError);
}

TEST(TransitionCorpusTest, ShapeOfEachTrace) {
  TransitionCorpusOptions options;
  options.count = 5;
  options.duration_s = 600.0;
  const auto traces = transition_corpus(options, 8);
  ASSERT_EQ(traces.size(), 5u);
  for (const auto& trace : traces) {
    ASSERT_EQ(trace.samples.size(), 600u);
    // One outdoor lead-in, then indoor to the end.
    size_t switch_at = 0;
    while (trace.samples[switch_at].truth == CoverageState::kOutdoor) {
      ++switch_at;
    }
    EXPECT_GE(switch_at, 20u);
    EXPECT_LE(switch_at, 61u);
    for (size_t i = switch_at; i < trace.samples.size(); ++i) {
      EXPECT_EQ(trace.samples[i].truth, CoverageState::kIndoor);
    }
  }
  EXPECT_EQ(traces[0].id, "walkin000");
  EXPECT_EQ(transition_corpus(options, 8), traces);
}

}  // namespace
}  // namespace iobba
