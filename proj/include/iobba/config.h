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

#ifndef IOBBA_CONFIG_H_
#define IOBBA_CONFIG_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iobba/policy.h"
#include "iobba/radio.h"
#include "iobba/simulator.h"
#include "iobba/trace.h"

namespace iobba {

// Raised for an invalid configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Experiment description, read from a JSON file:
//
//   {
//     "traces": ["traces/"],            files or directories of *.csv
//     "ladder": {"segment_duration_s": 4,
//                "representations": [{"resolution": "320x240",
//                                     "rate_kbps": 129}, ...]},
//     "bmax_s": [60, 150, 240],
//     "k_users": [1, 2, 4, 8],
//     "policies": ["baseline", "iobba-true", "iobba-detected"],
//     "detector_model": "detector.model",   or "fit_detector": true
//     "training_traces": [...],         fit input, defaults to "traces"
//     "out_dir": "out",
//     "seed": 1,
//     "video_duration_s": 596, "startup_threshold_s": 8, "m": 3,
//     "indoor_r_lower_fraction": 0.3, "r_upper_fraction": 0.9,
//     "reservoir_fraction": [0.1, 0.3],
//     "threads": 0,
//     "network": {"4G": {"measured_bandwidth_hz": 15e3,
//                        "data_bandwidth_hz": 18e6,
//                        "sensitivity_dbm": -94}}
//   }
//
// Every key is optional except "traces". Relative paths resolve against the
// config file's directory.
struct ExperimentConfig {
  std::vector<std::string> traces;
  std::vector<std::string> training_traces;
  std::vector<RepresentationSpec> ladder;
  double segment_duration_s = 4.0;
  std::vector<double> b_max_s{150.0};
  std::vector<int> k_users{4};
  std::vector<std::string> policies{"baseline", "iobba-true",
                                    "iobba-detected"};
  std::string detector_model;
  bool fit_detector = false;
  std::string out_dir = "out";
  uint64_t seed = 1;
  double video_duration_s = 596.0;
  double startup_threshold_s = 8.0;
  int m = 3;
  double indoor_r_lower_fraction = 0.3;
  double r_upper_fraction = 0.9;
  double reservoir_min_fraction = 0.1;
  double reservoir_max_fraction = 0.3;
  unsigned threads = 0;
  NetworkTable network;

  Ladder build_ladder() const;
  SessionConfig base_session() const;
  std::vector<PolicyVariant> policy_variants() const;
  bool needs_detector() const;
};

ExperimentConfig default_experiment_config();
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);

// Throws ConfigError naming the first invalid field.
void validate_experiment_config(const ExperimentConfig& config);

// Files as given, directories expanded to their *.csv files in name order.
std::vector<std::string> expand_trace_paths(
    const std::vector<std::string>& paths);

// Synthesis spec in JSON:
//   {"id": "t0", "sample_period_s": 1, "network": "4G",
//    "shadowing_correlation_s": 0,
//    "timeline": [{"state": "outdoor", "duration_s": 120}, ...],
//    "indoor":  {"power":  {"family": "normal", "mean_dbm": -105,
//                           "stddev_db": 5},
//                "radius": {"family": "quantized_lognormal", "mu": 3.4,
//                           "sigma": 0.5, "step_m": 1}},
//    "outdoor": {...}}
// Power families: normal | reflected_lognormal (ceiling_dbm, mu, sigma).
// Radius families: quantized_lognormal | discrete (levels_m, weights).
SynthesisSpec parse_synthesis_spec(const std::string& json_text);

}  // namespace iobba

#endif  // IOBBA_CONFIG_H_
