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

#include "iobba/simulator.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace iobba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;

}  // namespace

PolicyVariant baseline_policy() {
  PolicyVariant v;
  v.name = "baseline";
  v.config.mode = PolicyMode::kBaseline;
  v.detection = DetectionSource::kNone;
  return v;
}

PolicyVariant iobba_true_policy() {
  PolicyVariant v;
  v.name = "iobba-true";
  v.config.mode = PolicyMode::kIobba;
  v.detection = DetectionSource::kGroundTruth;
  return v;
}

PolicyVariant iobba_detected_policy() {
  PolicyVariant v = iobba_true_policy();
  v.name = "iobba-detected";
  v.detection = DetectionSource::kDetector;
  return v;
}

PolicyVariant policy_by_name(const std::string& name) {
  if (name == "baseline") return baseline_policy();
  if (name == "iobba-true") return iobba_true_policy();
  if (name == "iobba-detected") return iobba_detected_policy();
  throw std::invalid_argument("unknown policy '" + name +
                              "' (baseline | iobba-true | iobba-detected)");
}

namespace {

void check_config(const SessionConfig& config) {
  const double d = config.ladder.segment_duration_s();
  if (!(config.b_max_s >= d) || !std::isfinite(config.b_max_s)) {
    throw ConfigInvalid("b_max_s must hold at least one segment");
  }
  if (!(config.startup_threshold_s > 0.0 &&
        config.startup_threshold_s <= config.b_max_s)) {
    throw ConfigInvalid("startup_threshold_s must be in (0, b_max_s]");
  }
  if (config.k_users < 1 || config.k_users > kMaxUsers) {
    throw ConfigInvalid("k_users must be in [1, 8]");
  }
  const double segments = config.video_duration_s / d;
  if (!(config.video_duration_s > 0.0) ||
      std::abs(segments - std::round(segments)) > 1e-9 * segments) {
    throw ConfigInvalid(
        "video_duration_s must be a positive multiple of the segment "
        "duration");
  }
  if (!(config.wall_time_cap_factor >= 1.0)) {
    throw ConfigInvalid("wall_time_cap_factor must be >= 1");
  }
  try {
    validate_policy_config(config.policy.config);
  } catch (const PolicyError& e) {
    throw ConfigInvalid(std::string("policy: ") + e.what());
  }
  if (config.policy.config.mode == PolicyMode::kIobba &&
      config.policy.detection == DetectionSource::kNone) {
    throw ConfigInvalid("IOBBA policy '" + config.policy.name +
                        "' needs a detection source");
  }
}

}  // namespace

void validate_session_config(const SessionConfig& config,
                             const DetectorModel* model) {
  check_config(config);
  if (config.policy.detection == DetectionSource::kDetector) {
    if (model == nullptr) {
      throw ConfigInvalid("policy '" + config.policy.name +
                          "' needs a detector model");
    }
    model->validate();
  }
}

double wall_time(const SessionEvent& e) {
  return std::visit([](const auto& ev) { return ev.wall_time_s; }, e);
}

std::string_view to_string(PlayerPhase phase) {
  switch (phase) {
    case PlayerPhase::kStartup:
      return "startup";
    case PlayerPhase::kStalled:
      return "stalled";
    case PlayerPhase::kDownloading:
      return "downloading";
    case PlayerPhase::kIdle:
      return "idle";
    case PlayerPhase::kDraining:
      return "draining";
    case PlayerPhase::kEnded:
      return "ended";
  }
  return "?";
}

int SessionLog::expected_segments() const {
  return static_cast<int>(std::lround(video_duration_s / segment_duration_s));
}

namespace {

class SessionRunner {
 public:
  SessionRunner(const ThroughputSeries& series,
                std::span<const CoverageState> truth,
                std::span<const CoverageState> detected,
                const SessionConfig& config, std::string trace_id)
      : series_(series),
        truth_(truth),
        detected_(detected),
        config_(config),
        d_(config.ladder.segment_duration_s()),
        cap_(config.wall_time_cap_factor * config.video_duration_s) {
    log_.tag = {std::move(trace_id), config.policy.name, config.k_users,
                config.b_max_s};
    log_.segment_duration_s = d_;
    log_.video_duration_s = config.video_duration_s;
    log_.b_max_s = config.b_max_s;
    log_.startup_threshold_s = config.startup_threshold_s;
    for (const auto& rep : config.ladder.representations()) {
      log_.ladder_rates_bps.push_back(rep.max_encoding_rate_bps);
    }
    last_timestamp_ = series.points().back().timestamp_s;
  }

  SessionLog run() {
    const int total = log_.expected_segments();
    PolicyState state;
    state.mode = config_.policy.config.mode;
    state.m = config_.policy.config.m;
    double recent_bps = config_.ladder.lowest().max_encoding_rate_bps;
    int previous_quality = 0;

    for (int j = 1; j <= total; ++j) {
      if (buffer_ + d_ > config_.b_max_s + kEps) idle();

      const CoverageState detection = detect();
      const SegmentMaps maps = build_maps(config_.policy.config,
                                          config_.ladder, config_.b_max_s,
                                          recent_bps);
      const QualityDecision decision =
          next_quality(state, buffer_, detection, maps, config_.ladder);
      state = decision.state;
      const int quality = decision.quality;
      log_.events.push_back(
          event::SegmentRequested{now_, j, quality, detection});
      if (previous_quality != 0 && quality != previous_quality) {
        log_.events.push_back(
            event::QualityChanged{now_, previous_quality, quality});
      }
      previous_quality = quality;

      const double bits = config_.ladder.at(quality).mean_segment_size_bits;
      const double start = now_;
      record(download_phase());
      if (!download(bits)) {
        log_.capped = true;
        record(PlayerPhase::kEnded);
        log_.events.push_back(event::SessionEnded{now_, true});
        return std::move(log_);
      }
      buffer_ += d_;
      ++completed_;
      const double elapsed = now_ - start;
      log_.events.push_back(
          event::SegmentCompleted{now_, j, quality, bits, elapsed});
      if (elapsed > 0.0) recent_bps = bits / elapsed;
      if (!playing_ &&
          (buffer_ + kEps >= config_.startup_threshold_s || j == total)) {
        start_playback();
      }
    }

    if (!playing_) start_playback();
    record(PlayerPhase::kDraining);
    advance(now_ + buffer_);
    buffer_ = 0.0;
    record(PlayerPhase::kEnded);
    log_.events.push_back(event::SessionEnded{now_, false});
    return std::move(log_);
  }

 private:
  PlayerPhase download_phase() const {
    if (playing_) return PlayerPhase::kDownloading;
    return started_ ? PlayerPhase::kStalled : PlayerPhase::kStartup;
  }

  void record(PlayerPhase phase) {
    log_.buffer.push_back({now_, buffer_, completed_, phase});
  }

  void start_playback() {
    playing_ = true;
    if (started_) {
      log_.events.push_back(event::StallEnded{now_});
    } else {
      started_ = true;
      log_.events.push_back(event::PlaybackStarted{now_});
    }
  }

  // Moves wall time forward, draining the buffer while playing.
  void advance(double t) {
    if (playing_) buffer_ = std::max(0.0, buffer_ - (t - now_));
    now_ = t;
    if (now_ > last_timestamp_) log_.trace_exhausted = true;
  }

  void idle() {
    // A full buffer that never reached the startup level starts playback.
    if (!playing_) start_playback();
    record(PlayerPhase::kIdle);
    const double target = config_.b_max_s - d_;
    advance(now_ + (buffer_ - target));
    buffer_ = target;
  }

  CoverageState detect() const {
    const size_t i = series_.index_at(now_);
    switch (config_.policy.detection) {
      case DetectionSource::kGroundTruth:
        return truth_[i];
      case DetectionSource::kDetector:
        return detected_[i];
      case DetectionSource::kNone:
        break;
    }
    return CoverageState::kOutdoor;
  }

  // Integrates the piecewise-constant rate until `bits` are delivered.
  // Returns false when the wall-time cap cuts the download off.
  bool download(double bits) {
    const auto& points = series_.points();
    double remaining = bits;
    while (true) {
      const size_t idx = series_.index_at(now_);
      const double rate = points[idx].rate_bps;
      const double piece_end =
          idx + 1 < points.size() ? points[idx + 1].timestamp_s : kInf;
      const double finish = rate > 0.0 ? now_ + remaining / rate : kInf;
      const double next = std::min(piece_end, finish);
      const double empty = playing_ ? now_ + buffer_ : kInf;

      if (empty < next && empty <= cap_) {
        remaining = std::max(0.0, remaining - rate * (empty - now_));
        advance(empty);
        buffer_ = 0.0;
        playing_ = false;
        log_.events.push_back(event::StallStarted{now_});
        record(PlayerPhase::kStalled);
        continue;
      }
      if (next > cap_) {
        advance(cap_);
        return false;
      }
      if (finish <= piece_end) {
        advance(finish);
        return true;
      }
      remaining = std::max(0.0, remaining - rate * (piece_end - now_));
      advance(piece_end);
    }
  }

  const ThroughputSeries& series_;
  std::span<const CoverageState> truth_;
  std::span<const CoverageState> detected_;
  const SessionConfig& config_;
  const double d_;
  const double cap_;
  double last_timestamp_ = 0.0;

  SessionLog log_;
  double now_ = 0.0;
  double buffer_ = 0.0;
  bool playing_ = false;
  bool started_ = false;
  int completed_ = 0;
};

}  // namespace

SessionLog simulate_session(const ThroughputSeries& series,
                            std::span<const CoverageState> truth,
                            std::span<const CoverageState> detected,
                            const SessionConfig& config,
                            std::string trace_id) {
  check_config(config);
  if (series.empty()) throw ConfigInvalid("throughput series is empty");
  const size_t n = series.points().size();
  if ((config.policy.detection == DetectionSource::kGroundTruth &&
       truth.size() != n) ||
      (config.policy.detection == DetectionSource::kDetector &&
       detected.size() != n)) {
    throw ConfigInvalid("detection labels do not match the throughput series");
  }
  return SessionRunner(series, truth, detected, config, std::move(trace_id))
      .run();
}

SessionLog simulate_session(const Trace& trace, const SessionConfig& config,
                            const DetectorModel* model) {
  validate_session_config(config, model);
  validate_trace(trace);
  const ThroughputSeries series =
      throughput_series(trace, config.k_users, config.network);
  std::vector<CoverageState> truth;
  std::vector<CoverageState> detected;
  truth.reserve(trace.samples.size());
  for (const auto& s : trace.samples) truth.push_back(s.truth);
  if (config.policy.detection == DetectionSource::kDetector) {
    for (const auto& d : detect_series(*model, trace)) {
      detected.push_back(d.state);
    }
  }
  return simulate_session(series, truth, detected, config, trace.id);
}

std::vector<SessionLog> run_experiment(std::span<const Trace> traces,
                                       const ExperimentGrid& grid,
                                       std::span<const PolicyVariant> policies,
                                       const SessionConfig& base,
                                       const DetectorModel* model,
                                       unsigned threads) {
  if (traces.empty() || grid.k_users.empty() || grid.b_max_s.empty() ||
      policies.empty()) {
    throw ConfigInvalid("experiment grid, traces and policies must be "
                        "non-empty");
  }
  std::vector<SessionConfig> configs;
  for (int k : grid.k_users) {
    for (double b_max : grid.b_max_s) {
      for (const auto& policy : policies) {
        SessionConfig c = base;
        c.k_users = k;
        c.b_max_s = b_max;
        c.startup_threshold_s = std::min(base.startup_threshold_s, b_max);
        c.policy = policy;
        validate_session_config(c, model);
        configs.push_back(std::move(c));
      }
    }
  }
  const size_t jobs = traces.size() * configs.size();
  std::vector<SessionLog> logs(jobs);
  std::atomic<size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (size_t i = next++; i < jobs; i = next++) {
      try {
        logs[i] = simulate_session(traces[i / configs.size()],
                                   configs[i % configs.size()], model);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  std::stable_sort(logs.begin(), logs.end(),
                   [](const SessionLog& a, const SessionLog& b) {
                     return a.tag < b.tag;
                   });
  return logs;
}

}  // namespace iobba
