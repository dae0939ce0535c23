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

#ifndef IOBBA_TRACE_H_
#define IOBBA_TRACE_H_

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace iobba {

// Declaration order is the tie-break order: Indoor wins ties.
enum class CoverageState { kIndoor = 0, kOutdoor = 1 };

enum class NetworkType { k2G = 0, k3G = 1, k4G = 2 };

inline constexpr double kMinPowerDbm = -140.0;
inline constexpr double kMaxPowerDbm = -20.0;

std::string_view to_string(CoverageState state);
std::string_view to_string(NetworkType network);

struct TraceSample {
  double timestamp_s = 0.0;
  NetworkType network = NetworkType::k4G;
  double power_dbm = 0.0;
  double confidence_radius_m = 1.0;
  CoverageState truth = CoverageState::kOutdoor;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct Trace {
  std::string id;
  std::vector<TraceSample> samples;

  friend bool operator==(const Trace&, const Trace&) = default;
};

class TraceError : public std::runtime_error {
 public:
  enum class Kind {
    kMalformedRow,
    kNonMonotonicTimestamp,
    kOutOfRangeValue,
    kEmptyTrace,
    kInvalidSpec,
  };

  TraceError(Kind kind, size_t line, const std::string& what);

  Kind kind() const { return kind_; }
  // 1-based line in the source, 0 when not tied to a line.
  size_t line() const { return line_; }

 private:
  Kind kind_;
  size_t line_;
};

inline constexpr std::string_view kTraceCsvHeader =
    "timestamp_s,network,power_dbm,confidence_radius_m,truth";

// Parses the trace CSV format. Throws TraceError on the first bad row.
Trace parse_trace(std::istream& source, std::string id);
Trace read_trace_file(const std::string& path);

void write_trace(std::ostream& out, const Trace& trace);
void write_trace_file(const std::string& path, const Trace& trace);

// Checks all sample and ordering invariants; throws TraceError.
void validate_trace(const Trace& trace);

// ---------------------------------------------------------------------------
// Synthesis

struct NormalPower {
  double mean_dbm = -90.0;
  double stddev_db = 5.0;
};

// ceiling_dbm - LogNormal(mu, sigma): a tail toward weak signal.
struct ReflectedLogNormalPower {
  double ceiling_dbm = -70.0;
  double mu = 3.0;
  double sigma = 0.4;
};

using PowerDistribution = std::variant<NormalPower, ReflectedLogNormalPower>;

// Discrete radius levels with relative weights.
struct DiscreteRadius {
  std::vector<double> levels_m;
  std::vector<double> weights;
};

// LogNormal(mu, sigma) rounded to the nearest multiple of step_m (never
// below one step).
struct QuantizedLogNormalRadius {
  double mu = 2.0;
  double sigma = 0.5;
  double step_m = 1.0;
};

using RadiusDistribution =
    std::variant<DiscreteRadius, QuantizedLogNormalRadius>;

struct ClassProfile {
  PowerDistribution power;
  RadiusDistribution radius;
};

struct TimelinePhase {
  double duration_s = 0.0;
  CoverageState state = CoverageState::kOutdoor;
};

struct SynthesisSpec {
  std::string id = "synthetic";
  ClassProfile indoor;
  ClassProfile outdoor;
  std::vector<TimelinePhase> timeline;
  double sample_period_s = 1.0;
  NetworkType network = NetworkType::k4G;
  // Correlation time of the shadowing process driving power draws. 0 gives
  // independent samples; tau > 0 gives an AR(1) latent with coefficient
  // exp(-period / tau) and unchanged per-class marginals.
  double shadowing_correlation_s = 0.0;
};

// Profiles shaped after typical measurements: indoor power about 20 dB
// weaker than outdoor, indoor GNSS radius an order of magnitude larger.
ClassProfile default_indoor_profile();
ClassProfile default_outdoor_profile();

// Deterministic in (spec, seed). Labels follow the timeline: a sample at
// time t carries the state of the phase with start <= t < end.
Trace synthesize_trace(const SynthesisSpec& spec, uint64_t seed);

// Outdoor-to-indoor walk-in traces: an outdoor lead-in of random length,
// then indoor coverage for the rest of the trace. The defaults model a
// cell-edge user: 16 dB building loss, 7 dB shadowing correlated over 20 s.
struct TransitionCorpusOptions {
  size_t count = 30;
  double duration_s = 3000.0;
  double min_outdoor_s = 20.0;
  double max_outdoor_s = 60.0;
  double sample_period_s = 1.0;
  double shadowing_correlation_s = 20.0;
  NetworkType network = NetworkType::k4G;
  ClassProfile indoor{NormalPower{-116.0, 7.0},
                      QuantizedLogNormalRadius{3.4, 0.5, 1.0}};
  ClassProfile outdoor{NormalPower{-100.0, 7.0},
                       QuantizedLogNormalRadius{1.8, 0.45, 1.0}};
  std::string id_prefix = "walkin";
};

std::vector<SynthesisSpec> transition_corpus_specs(
    const TransitionCorpusOptions& options, uint64_t seed);
std::vector<Trace> transition_corpus(const TransitionCorpusOptions& options,
                                     uint64_t seed);

}  // namespace iobba

#endif  // IOBBA_TRACE_H_
