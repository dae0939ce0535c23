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

#ifndef IOBBA_POLICY_H_
#define IOBBA_POLICY_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "iobba/trace.h"

namespace iobba {

class PolicyError : public std::runtime_error {
 public:
  enum class Kind { kInvalidThresholds, kDegenerateLadder, kInvalidLadder };

  PolicyError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Representation {
  int index = 1;  // 1-based
  std::string resolution;
  double max_encoding_rate_bps = 0.0;
  double mean_segment_size_bits = 0.0;
};

struct RepresentationSpec {
  std::string resolution;
  double max_encoding_rate_bps = 0.0;
};

class Ladder {
 public:
  // Throws PolicyError(kInvalidLadder) unless there are >= 2 levels with
  // strictly increasing positive rates and a positive segment duration.
  Ladder(const std::vector<RepresentationSpec>& levels,
         double segment_duration_s);

  // 129, 378, 578, 1536 and 3993 kbps at 4 s segments.
  static Ladder standard();

  const std::vector<Representation>& representations() const {
    return levels_;
  }
  int size() const { return static_cast<int>(levels_.size()); }
  const Representation& at(int index) const { return levels_.at(index - 1); }
  const Representation& lowest() const { return levels_.front(); }
  const Representation& highest() const { return levels_.back(); }
  double segment_duration_s() const { return segment_duration_s_; }

 private:
  std::vector<Representation> levels_;
  double segment_duration_s_;
};

enum class MapShape { kLinear, kExponential };

std::string_view to_string(MapShape shape);

// Buffer occupancy (s) to target mean segment size (bits). Below r_lower the
// map returns the smallest size, above r_upper the largest.
class SegmentMap {
 public:
  MapShape shape() const { return shape_; }
  double r_lower() const { return r_lower_; }
  double r_upper() const { return r_upper_; }
  double b_max() const { return b_max_; }
  double size_min() const { return size_min_; }
  double size_max() const { return size_max_; }
  // Exponential form alpha * beta^B; for the linear map these are 0.
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  double value_at(double buffer_s) const;

 private:
  friend SegmentMap build_linear_map(const Ladder&, double, double, double);
  friend SegmentMap build_exponential_map(const Ladder&, double, double,
                                          double);
  SegmentMap() = default;

  MapShape shape_ = MapShape::kLinear;
  double r_lower_ = 0.0;
  double r_upper_ = 0.0;
  double b_max_ = 0.0;
  double size_min_ = 0.0;
  double size_max_ = 0.0;
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

// Both throw PolicyError(kInvalidThresholds) unless
// 0 < r_lower < r_upper <= b_max.
SegmentMap build_linear_map(const Ladder& ladder, double r_lower,
                            double r_upper, double b_max);
SegmentMap build_exponential_map(const Ladder& ladder, double r_lower,
                                 double r_upper, double b_max);

// Largest quality whose mean segment size does not exceed map_value, or 1.
int quantize_to_quality(double map_value, const Ladder& ladder);

// Reservoir for the outdoor map: time to fetch one top-quality segment at
// the recent throughput, clamped to [min_fraction, max_fraction] * b_max.
double outdoor_r_lower(const Ladder& ladder, double recent_throughput_bps,
                       double b_max, double min_fraction = 0.1,
                       double max_fraction = 0.3);

enum class PolicyMode { kBaseline, kIobba };

struct PolicyState {
  PolicyMode mode = PolicyMode::kBaseline;
  int current_quality = 1;
  int upgrade_streak = 0;
  int m = 3;
  CoverageState last_detection = CoverageState::kOutdoor;

  friend bool operator==(const PolicyState&, const PolicyState&) = default;
};

struct SegmentMaps {
  SegmentMap indoor;
  SegmentMap outdoor;
};

struct QualityDecision {
  int quality = 1;
  PolicyState state;
};

// Baseline: linear outdoor map only. IOBBA: the outdoor map when detected
// outdoors, otherwise the indoor map with immediate downgrades and one-level
// upgrades after m consecutive upgrade signals (m = 1 applies the map's
// choice directly).
QualityDecision next_quality(const PolicyState& state, double buffer_s,
                             CoverageState detection, const SegmentMaps& maps,
                             const Ladder& ladder);

struct PolicyConfig {
  PolicyMode mode = PolicyMode::kBaseline;
  int m = 3;
  MapShape indoor_shape = MapShape::kExponential;
  // Indoor reservoir fixed at indoor_r_lower_fraction * B_max, or the same
  // dynamic reservoir as outdoors when false.
  bool indoor_constant_reservoir = true;
  double indoor_r_lower_fraction = 0.3;
  double r_upper_fraction = 0.9;
  double reservoir_min_fraction = 0.1;
  double reservoir_max_fraction = 0.3;
};

void validate_policy_config(const PolicyConfig& config);

// Maps in effect for one request given the recent throughput estimate.
SegmentMaps build_maps(const PolicyConfig& config, const Ladder& ladder,
                       double b_max, double recent_throughput_bps);

}  // namespace iobba

#endif  // IOBBA_POLICY_H_
