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

#include <algorithm>
#include <cmath>

#include "iobba/text.h"

namespace iobba {

namespace {

using Kind = PolicyError::Kind;

// Map values within this relative distance above a ladder size count as a
// hit; keeps pow() rounding at the thresholds from dropping a level.
constexpr double kQuantizeTolerance = 1e-9;

void check_thresholds(double r_lower, double r_upper, double b_max) {
  if (!(r_lower > 0.0 && r_lower < r_upper && r_upper <= b_max) ||
      !std::isfinite(b_max)) {
    throw PolicyError(Kind::kInvalidThresholds,
                      "need 0 < r_lower < r_upper <= B_max, got " +
                          text::format_double(r_lower) + ", " +
                          text::format_double(r_upper) + ", " +
                          text::format_double(b_max));
  }
}

}  // namespace

Ladder::Ladder(const std::vector<RepresentationSpec>& levels,
               double segment_duration_s)
    : segment_duration_s_(segment_duration_s) {
  if (levels.size() < 2) {
    throw PolicyError(Kind::kInvalidLadder, "ladder needs >= 2 levels");
  }
  if (!(segment_duration_s > 0.0) || !std::isfinite(segment_duration_s)) {
    throw PolicyError(Kind::kInvalidLadder,
                      "segment duration must be positive");
  }
  for (size_t i = 0; i < levels.size(); ++i) {
    const double rate = levels[i].max_encoding_rate_bps;
    if (!(rate > 0.0) || !std::isfinite(rate) ||
        (i > 0 && !(rate > levels[i - 1].max_encoding_rate_bps))) {
      throw PolicyError(Kind::kInvalidLadder,
                        "ladder rates must be positive and strictly "
                        "increasing");
    }
    levels_.push_back({static_cast<int>(i) + 1, levels[i].resolution, rate,
                       rate * segment_duration_s});
  }
}

Ladder Ladder::standard() {
  return Ladder({{"320x240", 129e3},
                 {"480x360", 378e3},
                 {"854x480", 578e3},
                 {"1280x720", 1536e3},
                 {"1920x1080", 3993e3}},
                4.0);
}

std::string_view to_string(MapShape shape) {
  return shape == MapShape::kLinear ? "linear" : "exponential";
}

double SegmentMap::value_at(double buffer_s) const {
  if (buffer_s <= r_lower_) return size_min_;
  if (buffer_s >= r_upper_) return size_max_;
  if (shape_ == MapShape::kLinear) {
    const double f = (buffer_s - r_lower_) / (r_upper_ - r_lower_);
    return size_min_ + f * (size_max_ - size_min_);
  }
  return alpha_ * std::pow(beta_, buffer_s);
}

SegmentMap build_linear_map(const Ladder& ladder, double r_lower,
                            double r_upper, double b_max) {
  check_thresholds(r_lower, r_upper, b_max);
  SegmentMap map;
  map.shape_ = MapShape::kLinear;
  map.r_lower_ = r_lower;
  map.r_upper_ = r_upper;
  map.b_max_ = b_max;
  map.size_min_ = ladder.lowest().mean_segment_size_bits;
  map.size_max_ = ladder.highest().mean_segment_size_bits;
  return map;
}

SegmentMap build_exponential_map(const Ladder& ladder, double r_lower,
                                 double r_upper, double b_max) {
  check_thresholds(r_lower, r_upper, b_max);
  const double s_min = ladder.lowest().mean_segment_size_bits;
  const double s_max = ladder.highest().mean_segment_size_bits;
  if (!(s_min > 0.0 && s_max > s_min)) {
    throw PolicyError(Kind::kDegenerateLadder,
                      "exponential map needs S(R_max) > S(R_min) > 0");
  }
  SegmentMap map;
  map.shape_ = MapShape::kExponential;
  map.r_lower_ = r_lower;
  map.r_upper_ = r_upper;
  map.b_max_ = b_max;
  map.size_min_ = s_min;
  map.size_max_ = s_max;
  map.beta_ = std::pow(s_max / s_min, 1.0 / (r_upper - r_lower));
  map.alpha_ = s_min * std::pow(map.beta_, -r_lower);
  return map;
}

int quantize_to_quality(double map_value, const Ladder& ladder) {
  const double limit = map_value * (1.0 + kQuantizeTolerance);
  int quality = 1;
  for (const auto& rep : ladder.representations()) {
    if (rep.mean_segment_size_bits <= limit) quality = rep.index;
  }
  return quality;
}

double outdoor_r_lower(const Ladder& ladder, double recent_throughput_bps,
                       double b_max, double min_fraction,
                       double max_fraction) {
  const double lo = min_fraction * b_max;
  const double hi = max_fraction * b_max;
  if (!(recent_throughput_bps > 0.0)) return hi;
  const double fetch_s =
      ladder.highest().mean_segment_size_bits / recent_throughput_bps;
  return std::clamp(fetch_s, lo, hi);
}

QualityDecision next_quality(const PolicyState& state, double buffer_s,
                             CoverageState detection, const SegmentMaps& maps,
                             const Ladder& ladder) {
  QualityDecision out{state.current_quality, state};
  out.state.last_detection = detection;

  if (state.mode == PolicyMode::kBaseline ||
      detection == CoverageState::kOutdoor) {
    out.quality = quantize_to_quality(maps.outdoor.value_at(buffer_s), ladder);
    out.state.upgrade_streak = 0;
    out.state.current_quality = out.quality;
    return out;
  }

  const int candidate =
      quantize_to_quality(maps.indoor.value_at(buffer_s), ladder);
  const int current = state.current_quality;
  if (candidate > current && state.m > 1) {
    out.state.upgrade_streak = state.upgrade_streak + 1;
    if (out.state.upgrade_streak >= state.m) {
      out.quality = current + 1;
      out.state.upgrade_streak = 0;
    }
  } else {
    out.quality = candidate;
    out.state.upgrade_streak = 0;
  }
  out.state.current_quality = out.quality;
  return out;
}

void validate_policy_config(const PolicyConfig& config) {
  if (config.m < 1) {
    throw PolicyError(Kind::kInvalidThresholds, "m must be >= 1");
  }
  const bool fractions_ok =
      config.reservoir_min_fraction > 0.0 &&
      config.reservoir_min_fraction <= config.reservoir_max_fraction &&
      config.reservoir_max_fraction < config.r_upper_fraction &&
      config.indoor_r_lower_fraction > 0.0 &&
      config.indoor_r_lower_fraction < config.r_upper_fraction &&
      config.r_upper_fraction <= 1.0;
  if (!fractions_ok) {
    throw PolicyError(Kind::kInvalidThresholds,
                      "reservoir and threshold fractions out of order");
  }
}

SegmentMaps build_maps(const PolicyConfig& config, const Ladder& ladder,
                       double b_max, double recent_throughput_bps) {
  const double r_upper = config.r_upper_fraction * b_max;
  const double dynamic_lower =
      outdoor_r_lower(ladder, recent_throughput_bps, b_max,
                      config.reservoir_min_fraction,
                      config.reservoir_max_fraction);
  const double indoor_lower = config.indoor_constant_reservoir
                                  ? config.indoor_r_lower_fraction * b_max
                                  : dynamic_lower;
  SegmentMap outdoor = build_linear_map(ladder, dynamic_lower, r_upper, b_max);
  SegmentMap indoor =
      config.indoor_shape == MapShape::kExponential
          ? build_exponential_map(ladder, indoor_lower, r_upper, b_max)
          : build_linear_map(ladder, indoor_lower, r_upper, b_max);
  return {indoor, outdoor};
}

}  // namespace iobba
