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

#ifndef IOBBA_QOE_H_
#define IOBBA_QOE_H_

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iobba/simulator.h"

namespace iobba {

struct QoeReport {
  SessionTag tag;
  double mean_bitrate_bps = 0.0;
  // Per second of nominal video duration.
  double rebuffering_per_s = 0.0;
  double adaptation_per_s = 0.0;
  // Supplementary: total stalled wall time and raw counts.
  double stall_time_s = 0.0;
  int stall_count = 0;
  int quality_changes = 0;
  bool capped = false;
};

// Throws MalformedLog if the log fails validate_session_log.
QoeReport qoe_from_log(const SessionLog& log);

enum class QoeMetric { kMeanBitrate, kRebuffering, kAdaptation };

std::string_view to_string(QoeMetric metric);
double metric_value(const QoeReport& report, QoeMetric metric);

struct AggregateStat {
  double mean = 0.0;
  double standard_error = 0.0;
  double ci95_halfwidth = 0.0;
  size_t n = 0;
  // n == 1: the zero-width interval carries no information.
  bool single_sample = false;
};

class EmptyGroup : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mean, standard error (n-1 denominator) and 1.96 * SE half-width.
// Values are summed in sorted order so the result is independent of input
// order. Throws EmptyGroup.
AggregateStat summarize(std::span<const double> values);

struct GroupBy {
  bool trace_id = false;
  bool policy = true;
  bool k_users = true;
  bool b_max = true;
};

struct AggregateRow {
  // Fields not in the grouping are empty / zero.
  SessionTag group;
  QoeMetric metric = QoeMetric::kMeanBitrate;
  AggregateStat stat;
};

// One row per (group, metric), groups in tag order, metrics in enum order.
std::vector<AggregateRow> aggregate(std::span<const QoeReport> reports,
                                    const GroupBy& group_by = {});

// trace_id,policy,k_users,bmax_s,mean_bitrate_bps,rebuf_per_s,adapt_per_s
// followed by supplementary stall_s,stalls,capped.
void write_report_csv(std::ostream& out, std::span<const QoeReport> reports);
// trace_id,policy,k_users,bmax_s,metric,mean,se,ci95,n; '*' marks a field
// aggregated over.
void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows,
                         const GroupBy& group_by = {});

}  // namespace iobba

#endif  // IOBBA_QOE_H_
