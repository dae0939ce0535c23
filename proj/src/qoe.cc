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

#include "iobba/qoe.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "iobba/text.h"

namespace iobba {

QoeReport qoe_from_log(const SessionLog& log) {
  validate_session_log(log);
  QoeReport report;
  report.tag = log.tag;
  report.capped = log.capped;

  double rate_sum = 0.0;
  int segments = 0;
  bool started = false;
  double stall_begin = 0.0;
  bool stalled = false;
  for (const auto& e : log.events) {
    if (const auto* c = std::get_if<event::SegmentCompleted>(&e)) {
      rate_sum += log.ladder_rates_bps[static_cast<size_t>(c->quality - 1)];
      ++segments;
    } else if (std::holds_alternative<event::PlaybackStarted>(e)) {
      started = true;
    } else if (const auto* s = std::get_if<event::StallStarted>(&e)) {
      if (started) ++report.stall_count;
      stall_begin = s->wall_time_s;
      stalled = true;
    } else if (const auto* s = std::get_if<event::StallEnded>(&e)) {
      report.stall_time_s += s->wall_time_s - stall_begin;
      stalled = false;
    } else if (std::holds_alternative<event::QualityChanged>(e)) {
      ++report.quality_changes;
    } else if (const auto* s = std::get_if<event::SessionEnded>(&e)) {
      if (stalled) report.stall_time_s += s->wall_time_s - stall_begin;
    }
  }
  // A complete session covers the whole video; a capped one is averaged
  // over what it fetched.
  const double covered =
      log.capped ? segments * log.segment_duration_s : log.video_duration_s;
  report.mean_bitrate_bps =
      segments > 0 ? rate_sum * log.segment_duration_s / covered : 0.0;
  report.rebuffering_per_s = report.stall_count / log.video_duration_s;
  report.adaptation_per_s = report.quality_changes / log.video_duration_s;
  return report;
}

std::string_view to_string(QoeMetric metric) {
  switch (metric) {
    case QoeMetric::kMeanBitrate:
      return "mean_bitrate_bps";
    case QoeMetric::kRebuffering:
      return "rebuf_per_s";
    case QoeMetric::kAdaptation:
      return "adapt_per_s";
  }
  return "?";
}

double metric_value(const QoeReport& report, QoeMetric metric) {
  switch (metric) {
    case QoeMetric::kMeanBitrate:
      return report.mean_bitrate_bps;
    case QoeMetric::kRebuffering:
      return report.rebuffering_per_s;
    case QoeMetric::kAdaptation:
      return report.adaptation_per_s;
  }
  return 0.0;
}

AggregateStat summarize(std::span<const double> values) {
  if (values.empty()) throw EmptyGroup("cannot summarize an empty group");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  AggregateStat stat;
  stat.n = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  stat.mean = sum / static_cast<double>(stat.n);
  if (stat.n == 1) {
    stat.single_sample = true;
    return stat;
  }
  double ss = 0.0;
  for (double v : sorted) ss += (v - stat.mean) * (v - stat.mean);
  const double sd = std::sqrt(ss / static_cast<double>(stat.n - 1));
  stat.standard_error = sd / std::sqrt(static_cast<double>(stat.n));
  stat.ci95_halfwidth = 1.96 * stat.standard_error;
  return stat;
}

std::vector<AggregateRow> aggregate(std::span<const QoeReport> reports,
                                    const GroupBy& group_by) {
  if (reports.empty()) throw EmptyGroup("no reports to aggregate");
  std::map<SessionTag, std::vector<const QoeReport*>> groups;
  for (const auto& r : reports) {
    SessionTag key;
    if (group_by.trace_id) key.trace_id = r.tag.trace_id;
    if (group_by.policy) key.policy = r.tag.policy;
    if (group_by.k_users) key.k_users = r.tag.k_users;
    if (group_by.b_max) key.b_max_s = r.tag.b_max_s;
    groups[key].push_back(&r);
  }
  std::vector<AggregateRow> rows;
  for (const auto& [key, members] : groups) {
    for (auto metric : {QoeMetric::kMeanBitrate, QoeMetric::kRebuffering,
                        QoeMetric::kAdaptation}) {
      std::vector<double> values;
      values.reserve(members.size());
      for (const auto* r : members) values.push_back(metric_value(*r, metric));
      rows.push_back({key, metric, summarize(values)});
    }
  }
  return rows;
}

void write_report_csv(std::ostream& out, std::span<const QoeReport> reports) {
  out << "trace_id,policy,k_users,bmax_s,mean_bitrate_bps,rebuf_per_s,"
         "adapt_per_s,stall_s,stalls,capped\n";
  for (const auto& r : reports) {
    out << r.tag.trace_id << ',' << r.tag.policy << ',' << r.tag.k_users << ','
        << text::format_double(r.tag.b_max_s) << ','
        << text::format_double(r.mean_bitrate_bps) << ','
        << text::format_double(r.rebuffering_per_s) << ','
        << text::format_double(r.adaptation_per_s) << ','
        << text::format_double(r.stall_time_s) << ',' << r.stall_count << ','
        << (r.capped ? 1 : 0) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows,
                         const GroupBy& group_by) {
  out << "trace_id,policy,k_users,bmax_s,metric,mean,se,ci95,n\n";
  for (const auto& row : rows) {
    const auto& g = row.group;
    out << (group_by.trace_id ? g.trace_id : "*") << ','
        << (group_by.policy ? g.policy : "*") << ','
        << (group_by.k_users ? std::to_string(g.k_users) : "*") << ','
        << (group_by.b_max ? text::format_double(g.b_max_s) : "*") << ','
        << to_string(row.metric) << ',' << text::format_double(row.stat.mean)
        << ',' << text::format_double(row.stat.standard_error) << ','
        << text::format_double(row.stat.ci95_halfwidth) << ',' << row.stat.n
        << '\n';
  }
}

}  // namespace iobba
