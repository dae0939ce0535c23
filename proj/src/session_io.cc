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

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "iobba/simulator.h"
#include "iobba/text.h"
#include "json.hpp"

namespace iobba {

namespace {

constexpr std::string_view kLogHeader =
    "wall_time_s,event,segment,quality,prev_quality,bits,download_s,buffer_s,"
    "phase,detail";

constexpr double kBufferSlack = 1e-9;

std::string fmt(double v) { return text::format_double(v); }

struct RowWriter {
  std::ostream& out;

  void operator()(const event::SegmentRequested& e) const {
    out << fmt(e.wall_time_s) << ",segment_requested," << e.segment << ','
        << e.quality << ",,,,,," << to_string(e.detection) << '\n';
  }
  void operator()(const event::SegmentCompleted& e) const {
    out << fmt(e.wall_time_s) << ",segment_completed," << e.segment << ','
        << e.quality << ",," << fmt(e.bits) << ',' << fmt(e.download_s)
        << ",,,\n";
  }
  void operator()(const event::PlaybackStarted& e) const {
    out << fmt(e.wall_time_s) << ",playback_started,,,,,,,,\n";
  }
  void operator()(const event::StallStarted& e) const {
    out << fmt(e.wall_time_s) << ",stall_started,,,,,,,,\n";
  }
  void operator()(const event::StallEnded& e) const {
    out << fmt(e.wall_time_s) << ",stall_ended,,,,,,,,\n";
  }
  void operator()(const event::QualityChanged& e) const {
    out << fmt(e.wall_time_s) << ",quality_changed,," << e.to << ',' << e.from
        << ",,,,,\n";
  }
  void operator()(const event::SessionEnded& e) const {
    out << fmt(e.wall_time_s) << ",session_ended,,,,,,,,"
        << (e.capped ? "capped" : "complete") << '\n';
  }
  void operator()(const BufferSample& s) const {
    out << fmt(s.wall_time_s) << ",buffer," << s.segments_completed
        << ",,,,," << fmt(s.buffer_s) << ',' << to_string(s.phase) << ",\n";
  }
};

std::optional<PlayerPhase> parse_phase(std::string_view s) {
  for (auto p : {PlayerPhase::kStartup, PlayerPhase::kStalled,
                 PlayerPhase::kDownloading, PlayerPhase::kIdle,
                 PlayerPhase::kDraining, PlayerPhase::kEnded}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

}  // namespace

void write_session_log(std::ostream& out, const SessionLog& log) {
  nlohmann::ordered_json summary;
  summary["trace_id"] = log.tag.trace_id;
  summary["policy"] = log.tag.policy;
  summary["k_users"] = log.tag.k_users;
  summary["bmax_s"] = log.tag.b_max_s;
  summary["segment_duration_s"] = log.segment_duration_s;
  summary["video_duration_s"] = log.video_duration_s;
  summary["session_bmax_s"] = log.b_max_s;
  summary["startup_threshold_s"] = log.startup_threshold_s;
  summary["ladder_bps"] = log.ladder_rates_bps;
  summary["capped"] = log.capped;
  summary["trace_exhausted"] = log.trace_exhausted;
  out << "# " << summary.dump() << '\n';
  out << kLogHeader << '\n';

  // Events and buffer samples interleaved by wall time, events first.
  const RowWriter writer{out};
  size_t b = 0;
  for (const auto& e : log.events) {
    const double t = wall_time(e);
    while (b < log.buffer.size() && log.buffer[b].wall_time_s < t) {
      writer(log.buffer[b++]);
    }
    std::visit(writer, e);
  }
  while (b < log.buffer.size()) writer(log.buffer[b++]);
}

SessionLog read_session_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# ")) {
    throw MalformedLog("session log must start with a '# {summary}' line");
  }
  SessionLog log;
  try {
    const auto summary = nlohmann::json::parse(line.substr(2));
    log.tag.trace_id = summary.at("trace_id").get<std::string>();
    log.tag.policy = summary.at("policy").get<std::string>();
    log.tag.k_users = summary.at("k_users").get<int>();
    log.tag.b_max_s = summary.at("bmax_s").get<double>();
    log.segment_duration_s = summary.at("segment_duration_s").get<double>();
    log.video_duration_s = summary.at("video_duration_s").get<double>();
    log.b_max_s = summary.at("session_bmax_s").get<double>();
    log.startup_threshold_s = summary.at("startup_threshold_s").get<double>();
    log.ladder_rates_bps =
        summary.at("ladder_bps").get<std::vector<double>>();
    log.capped = summary.at("capped").get<bool>();
    log.trace_exhausted = summary.at("trace_exhausted").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedLog(std::string("bad session summary: ") + e.what());
  }
  if (!std::getline(in, line) || text::trim(line) != kLogHeader) {
    throw MalformedLog("missing session log column header");
  }

  size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = text::trim(line);
    if (row.empty()) continue;
    const auto f = text::split(row, ',');
    auto fail = [&](const std::string& what) {
      return MalformedLog("line " + std::to_string(line_no) + ": " + what);
    };
    if (f.size() != 10) throw fail("expected 10 fields");
    const auto t = text::parse_double(f[0]);
    if (!t) throw fail("bad wall time");
    auto need_int = [&](std::string_view s) {
      const auto v = text::parse_int(s);
      if (!v) throw fail("bad integer '" + std::string(s) + "'");
      return static_cast<int>(*v);
    };
    auto need_double = [&](std::string_view s) {
      const auto v = text::parse_double(s);
      if (!v) throw fail("bad number '" + std::string(s) + "'");
      return *v;
    };
    const std::string_view kind = f[1];
    if (kind == "segment_requested") {
      const auto state = f[9] == "indoor" ? CoverageState::kIndoor
                                          : CoverageState::kOutdoor;
      if (f[9] != "indoor" && f[9] != "outdoor") throw fail("bad detection");
      log.events.push_back(event::SegmentRequested{
          *t, need_int(f[2]), need_int(f[3]), state});
    } else if (kind == "segment_completed") {
      log.events.push_back(event::SegmentCompleted{
          *t, need_int(f[2]), need_int(f[3]), need_double(f[5]),
          need_double(f[6])});
    } else if (kind == "playback_started") {
      log.events.push_back(event::PlaybackStarted{*t});
    } else if (kind == "stall_started") {
      log.events.push_back(event::StallStarted{*t});
    } else if (kind == "stall_ended") {
      log.events.push_back(event::StallEnded{*t});
    } else if (kind == "quality_changed") {
      log.events.push_back(
          event::QualityChanged{*t, need_int(f[4]), need_int(f[3])});
    } else if (kind == "session_ended") {
      if (f[9] != "capped" && f[9] != "complete") throw fail("bad end kind");
      log.events.push_back(event::SessionEnded{*t, f[9] == "capped"});
    } else if (kind == "buffer") {
      const auto phase = parse_phase(f[8]);
      if (!phase) throw fail("bad phase");
      log.buffer.push_back(
          BufferSample{*t, need_double(f[7]), need_int(f[2]), *phase});
    } else {
      throw fail("unknown event '" + std::string(kind) + "'");
    }
  }
  validate_session_log(log);
  return log;
}

void validate_session_log(const SessionLog& log) {
  if (log.ladder_rates_bps.empty()) {
    throw MalformedLog("log carries no ladder");
  }
  if (!(log.segment_duration_s > 0.0) || !(log.video_duration_s > 0.0)) {
    throw MalformedLog("non-positive durations");
  }
  if (log.events.empty() ||
      !std::holds_alternative<event::SessionEnded>(log.events.back())) {
    throw MalformedLog("log does not end with session_ended");
  }
  double last = 0.0;
  bool stalled = false;
  int completed = 0;
  const int levels = static_cast<int>(log.ladder_rates_bps.size());
  for (size_t i = 0; i < log.events.size(); ++i) {
    const auto& e = log.events[i];
    const double t = wall_time(e);
    if (!(t >= last)) throw MalformedLog("event wall times decrease");
    last = t;
    if (std::holds_alternative<event::StallStarted>(e)) {
      if (stalled) throw MalformedLog("stall started twice");
      stalled = true;
    } else if (std::holds_alternative<event::StallEnded>(e)) {
      if (!stalled) throw MalformedLog("stall ended without start");
      stalled = false;
    } else if (const auto* c = std::get_if<event::SegmentCompleted>(&e)) {
      ++completed;
      if (c->quality < 1 || c->quality > levels) {
        throw MalformedLog("quality outside the ladder");
      }
    } else if (const auto* r = std::get_if<event::SegmentRequested>(&e)) {
      if (r->quality < 1 || r->quality > levels) {
        throw MalformedLog("quality outside the ladder");
      }
    } else if (std::holds_alternative<event::SessionEnded>(e) &&
               i + 1 != log.events.size()) {
      throw MalformedLog("session_ended before the last event");
    }
  }
  if (!log.capped && completed != log.expected_segments()) {
    throw MalformedLog("completed " + std::to_string(completed) +
                       " segments, expected " +
                       std::to_string(log.expected_segments()));
  }
  for (const auto& s : log.buffer) {
    if (s.buffer_s < -kBufferSlack || s.buffer_s > log.b_max_s + kBufferSlack) {
      throw MalformedLog("buffer sample outside [0, B_max]");
    }
  }
}

}  // namespace iobba
