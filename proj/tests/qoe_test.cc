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
#include <sstream>

#include "gtest/gtest.h"
#include "iobba/random.h"

namespace iobba {
namespace {

// Hand-built log: one segment per second of wall time, playback from the
// second segment, and a one-second stall after each listed segment.
SessionLog make_log(const std::vector<int>& qualities,
                    const std::vector<int>& stall_after = {},
                    SessionTag tag = {"t", "baseline", 1, 150}) {
  SessionLog log;
  log.tag = tag;
  for (const auto& rep : Ladder::standard().representations()) {
    log.ladder_rates_bps.push_back(rep.max_encoding_rate_bps);
  }
  double t = 0.0;
  int prev = 0;
  for (size_t i = 0; i < qualities.size(); ++i) {
    const int j = static_cast<int>(i) + 1;
    const int q = qualities[i];
    log.events.push_back(event::SegmentRequested{t, j, q});
    if (prev != 0 && q != prev) {
      log.events.push_back(event::QualityChanged{t, prev, q});
    }
    prev = q;
    t += 1.0;
    log.events.push_back(event::SegmentCompleted{t, j, q, 4.0 * q, 1.0});
    if (j == 2) log.events.push_back(event::PlaybackStarted{t});
    if (std::find(stall_after.begin(), stall_after.end(), j) !=
        stall_after.end()) {
      log.events.push_back(event::StallStarted{t});
      log.events.push_back(event::StallEnded{t + 1.0});
      t += 1.0;
    }
  }
  log.events.push_back(event::SessionEnded{t + 10.0, false});
  return log;
}

TEST(QoeFromLogTest, ConstantSession) {
  const auto report = qoe_from_log(make_log(std::vector<int>(149, 1)));
  EXPECT_DOUBLE_EQ(report.mean_bitrate_bps, 129e3);
  EXPECT_EQ(report.rebuffering_per_s, 0.0);
  EXPECT_EQ(report.adaptation_per_s, 0.0);
  EXPECT_EQ(report.stall_count, 0);
}

TEST(QoeFromLogTest, TwoStalls) {
  const auto report =
      qoe_from_log(make_log(std::vector<int>(149, 2), {40, 90}));
  EXPECT_EQ(report.stall_count, 2);
  EXPECT_DOUBLE_EQ(report.rebuffering_per_s, 2.0 / 596.0);
  EXPECT_NEAR(report.rebuffering_per_s, 3.36e-3, 1e-5);
  EXPECT_DOUBLE_EQ(report.stall_time_s, 2.0);
}

TEST(QoeFromLogTest, AlternatingQualities) {
  std::vector<int> q(149);
  for (size_t i = 0; i < q.size(); ++i) q[i] = i % 2 ? 3 : 1;
  const auto report = qoe_from_log(make_log(q));
  EXPECT_EQ(report.quality_changes, 148);
  EXPECT_DOUBLE_EQ(report.adaptation_per_s, 148.0 / 596.0);
  // 75 segments at R1 and 74 at R3 over the whole video.
  EXPECT_NEAR(report.mean_bitrate_bps, (75 * 129e3 + 74 * 578e3) / 149.0,
              1e-6);
}

TEST(QoeFromLogTest, CappedSessionAveragesFetchedSegments) {
  SessionLog log = make_log(std::vector<int>(10, 5));
  log.capped = true;
  log.events.back() = event::SessionEnded{100.0, true};
  const auto report = qoe_from_log(log);
  EXPECT_TRUE(report.capped);
  EXPECT_DOUBLE_EQ(report.mean_bitrate_bps, 3993e3);
}

TEST(QoeFromLogTest, RejectsInvalidLog) {
  SessionLog log = make_log(std::vector<int>(100, 1));
  EXPECT_THROW(qoe_from_log(log), MalformedLog);
}

TEST(SummarizeTest, ClosedForms) {
  const std::vector<double> same{2.0, 2.0, 2.0};
  const auto s = summarize(same);
  EXPECT_EQ(s.mean, 2.0);
  EXPECT_EQ(s.standard_error, 0.0);
  EXPECT_EQ(s.ci95_halfwidth, 0.0);
  const std::vector<double> two{1.0, 4.0};
  const auto t = summarize(two);
  EXPECT_DOUBLE_EQ(t.mean, 2.5);
  EXPECT_DOUBLE_EQ(t.standard_error, 1.5);
  EXPECT_DOUBLE_EQ(t.ci95_halfwidth, 1.96 * 1.5);
  EXPECT_EQ(t.n, 2u);
}

TEST(SummarizeTest, SingleSampleIsFlagged) {
  const std::vector<double> one{7.0};
  const auto s = summarize(one);
  EXPECT_TRUE(s.single_sample);
  EXPECT_EQ(s.mean, 7.0);
  EXPECT_EQ(s.n, 1u);
}

TEST(SummarizeTest, EmptyThrows) {
  EXPECT_THROW(summarize(std::vector<double>{}), EmptyGroup);
  EXPECT_THROW(aggregate(std::vector<QoeReport>{}), EmptyGroup);
}

TEST(SummarizeTest, PermutationInvariant) {
  Rng rng(1);
  std::vector<double> v(101);
  for (auto& x : v) x = rng.normal(0.0, 1e6) * std::pow(10.0, rng.below(8));
  const auto a = summarize(v);
  std::reverse(v.begin(), v.end());
  for (size_t i = v.size() - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
  const auto b = summarize(v);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(AggregateTest, MatchesBruteForceRecomputation) {
  Rng rng(2);
  std::vector<QoeReport> reports;
  for (int trace = 0; trace < 7; ++trace) {
    for (const char* policy : {"baseline", "iobba-true"}) {
      for (double b : {60.0, 150.0}) {
        std::vector<int> q(149);
        for (auto& x : q) x = 1 + static_cast<int>(rng.below(5));
        std::vector<int> stalls;
        for (int s = 0; s < static_cast<int>(rng.below(4)); ++s) {
          stalls.push_back(10 + 30 * s);
        }
        reports.push_back(qoe_from_log(make_log(
            q, stalls, {"tr" + std::to_string(trace), policy, 4, b})));
      }
    }
  }
  const auto rows = aggregate(reports);
  ASSERT_EQ(rows.size(), 4u * 3u);
  for (const auto& row : rows) {
    std::vector<double> values;
    for (const auto& r : reports) {
      if (r.tag.policy != row.group.policy || r.tag.b_max_s != row.group.b_max_s)
        continue;
      values.push_back(metric_value(r, row.metric));
    }
    ASSERT_EQ(values.size(), 7u);
    double mean = 0.0;
    for (double v : values) mean += v / 7.0;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / 6.0) / std::sqrt(7.0);
    EXPECT_NEAR(row.stat.mean, mean, 1e-9 * std::max(1.0, std::abs(mean)));
    EXPECT_NEAR(row.stat.standard_error, se, 1e-9 * std::max(1.0, se));
    EXPECT_EQ(row.stat.n, 7u);
    EXPECT_EQ(row.group.trace_id, "");
  }
}

TEST(AggregateTest, GroupByTrace) {
  std::vector<QoeReport> reports{
      qoe_from_log(make_log(std::vector<int>(149, 1), {}, {"a", "p", 1, 60})),
      qoe_from_log(make_log(std::vector<int>(149, 2), {}, {"b", "p", 1, 60}))};
  GroupBy by;
  by.trace_id = true;
  const auto rows = aggregate(reports, by);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_TRUE(rows[0].stat.single_sample);
  std::ostringstream out;
  write_aggregate_csv(out, rows, by);
  EXPECT_NE(out.str().find("a,p,1,60,mean_bitrate_bps,129000,0,0,1"),
            std::string::npos);
}

TEST(CsvTest, Headers) {
  std::vector<QoeReport> reports{
      qoe_from_log(make_log(std::vector<int>(149, 1), {}, {"a", "p", 2, 60}))};
  std::ostringstream report_csv;
  write_report_csv(report_csv, reports);
  EXPECT_EQ(report_csv.str().substr(0, report_csv.str().find('\n')),
            "trace_id,policy,k_users,bmax_s,mean_bitrate_bps,rebuf_per_s,"
            "adapt_per_s,stall_s,stalls,capped");
  EXPECT_NE(report_csv.str().find("a,p,2,60,129000,0,0,0,0,0"),
            std::string::npos);
  std::ostringstream agg_csv;
  write_aggregate_csv(agg_csv, aggregate(reports));
  EXPECT_EQ(agg_csv.str().substr(0, agg_csv.str().find('\n')),
            "trace_id,policy,k_users,bmax_s,metric,mean,se,ci95,n");
  EXPECT_NE(agg_csv.str().find("*,p,2,60,rebuf_per_s,0,0,0,1"),
            std::string::npos);
}

}  // namespace
}  // namespace iobba
