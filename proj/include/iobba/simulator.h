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

#ifndef IOBBA_SIMULATOR_H_
#define IOBBA_SIMULATOR_H_

#include <compare>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "iobba/detector.h"
#include "iobba/policy.h"
#include "iobba/radio.h"
#include "iobba/trace.h"

namespace iobba {

// Where an IOBBA session takes its indoor/outdoor decision from.
enum class DetectionSource { kNone, kGroundTruth, kDetector };

struct PolicyVariant {
  std::string name = "baseline";
  PolicyConfig config;
  DetectionSource detection = DetectionSource::kNone;
};

// "baseline", "iobba-true" and "iobba-detected" with default thresholds.
PolicyVariant baseline_policy();
PolicyVariant iobba_true_policy();
PolicyVariant iobba_detected_policy();
// Throws std::invalid_argument for an unknown name.
PolicyVariant policy_by_name(const std::string& name);

class ConfigInvalid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SessionConfig {
  double b_max_s = 150.0;
  // Buffer level that starts playback and resumes it after a stall.
  double startup_threshold_s = 8.0;
  int k_users = 1;
  // 9:56 of video.
  double video_duration_s = 596.0;
  Ladder ladder = Ladder::standard();
  PolicyVariant policy;
  // Sessions still running at cap_factor * video_duration are cut off.
  double wall_time_cap_factor = 5.0;
  NetworkTable network;
};

void validate_session_config(const SessionConfig& config,
                             const DetectorModel* model);

struct SessionTag {
  std::string trace_id;
  std::string policy;
  int k_users = 0;
  double b_max_s = 0.0;

  friend auto operator<=>(const SessionTag&, const SessionTag&) = default;
  friend bool operator==(const SessionTag&, const SessionTag&) = default;
};

namespace event {

struct SegmentRequested {
  double wall_time_s = 0.0;
  int segment = 0;  // 1-based
  int quality = 1;
  CoverageState detection = CoverageState::kOutdoor;
  friend bool operator==(const SegmentRequested&,
                         const SegmentRequested&) = default;
};

struct SegmentCompleted {
  double wall_time_s = 0.0;
  int segment = 0;
  int quality = 1;
  double bits = 0.0;
  double download_s = 0.0;
  friend bool operator==(const SegmentCompleted&,
                         const SegmentCompleted&) = default;
};

struct PlaybackStarted {
  double wall_time_s = 0.0;
  friend bool operator==(const PlaybackStarted&,
                         const PlaybackStarted&) = default;
};

struct StallStarted {
  double wall_time_s = 0.0;
  friend bool operator==(const StallStarted&, const StallStarted&) = default;
};

struct StallEnded {
  double wall_time_s = 0.0;
  friend bool operator==(const StallEnded&, const StallEnded&) = default;
};

struct QualityChanged {
  double wall_time_s = 0.0;
  int from = 1;
  int to = 1;
  friend bool operator==(const QualityChanged&,
                         const QualityChanged&) = default;
};

struct SessionEnded {
  double wall_time_s = 0.0;
  bool capped = false;
  friend bool operator==(const SessionEnded&, const SessionEnded&) = default;
};

}  // namespace event

using SessionEvent =
    std::variant<event::SegmentRequested, event::SegmentCompleted,
                 event::PlaybackStarted, event::StallStarted,
                 event::StallEnded, event::QualityChanged,
                 event::SessionEnded>;

double wall_time(const SessionEvent& e);

// What the player does from this buffer sample until the next one.
enum class PlayerPhase {
  kStartup,      // downloading, playback not yet started
  kStalled,      // downloading, playback halted on an empty buffer
  kDownloading,  // downloading while playing
  kIdle,         // buffer full, playing without downloading
  kDraining,     // all segments fetched, playing out the buffer
  kEnded,
};

std::string_view to_string(PlayerPhase phase);

struct BufferSample {
  double wall_time_s = 0.0;
  double buffer_s = 0.0;
  int segments_completed = 0;
  PlayerPhase phase = PlayerPhase::kStartup;
  friend bool operator==(const BufferSample&, const BufferSample&) = default;
};

struct SessionLog {
  SessionTag tag;
  double segment_duration_s = 4.0;
  double video_duration_s = 596.0;
  double b_max_s = 150.0;
  double startup_threshold_s = 8.0;
  std::vector<double> ladder_rates_bps;
  std::vector<SessionEvent> events;
  std::vector<BufferSample> buffer;
  bool capped = false;
  bool trace_exhausted = false;

  int expected_segments() const;
  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

// Plays one session against the trace. `model` is required when the
// policy's detection source is kDetector. Throws ConfigInvalid.
SessionLog simulate_session(const Trace& trace, const SessionConfig& config,
                            const DetectorModel* model = nullptr);

// Same loop over an explicit per-user rate series. `truth` and `detected`
// hold one label per series point and may be empty when the policy does
// not read them.
SessionLog simulate_session(const ThroughputSeries& series,
                            std::span<const CoverageState> truth,
                            std::span<const CoverageState> detected,
                            const SessionConfig& config,
                            std::string trace_id);

struct ExperimentGrid {
  std::vector<int> k_users;
  std::vector<double> b_max_s;
};

// traces x k_users x b_max x policies, sorted by tag. Sessions run on up to
// `threads` workers (0 = hardware concurrency); output order does not
// depend on scheduling.
std::vector<SessionLog> run_experiment(std::span<const Trace> traces,
                                       const ExperimentGrid& grid,
                                       std::span<const PolicyVariant> policies,
                                       const SessionConfig& base,
                                       const DetectorModel* model = nullptr,
                                       unsigned threads = 0);

class MalformedLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One "# {json summary}" line, then CSV rows
// wall_time_s,event,segment,quality,prev_quality,bits,download_s,buffer_s,
// phase,detail with "buffer" rows for the trajectory.
void write_session_log(std::ostream& out, const SessionLog& log);
SessionLog read_session_log(std::istream& in);

// Structural checks: time order, stall alternation, segment accounting,
// buffer bounds. Throws MalformedLog.
void validate_session_log(const SessionLog& log);

}  // namespace iobba

#endif  // IOBBA_SIMULATOR_H_
