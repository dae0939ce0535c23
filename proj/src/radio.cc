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

#include "iobba/radio.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace iobba {

NetworkParams default_network_params(NetworkType type) {
  switch (type) {
    case NetworkType::k2G:
      return {200e3, 200e3, -104.0};
    case NetworkType::k3G:
      return {3.84e6, 5e6, -106.0};
    case NetworkType::k4G:
      return {15e3, 18e6, -94.0};
  }
  return {};
}

void validate_network_params(const NetworkParams& params) {
  if (!(params.measured_bandwidth_hz > 0.0) ||
      !(params.data_bandwidth_hz > 0.0)) {
    throw std::invalid_argument("network bandwidths must be positive");
  }
  if (!(params.sensitivity_dbm >= kMinPowerDbm &&
        params.sensitivity_dbm <= kMaxPowerDbm)) {
    throw std::invalid_argument("sensitivity threshold outside [-140, -20]");
  }
}

NetworkTable::NetworkTable()
    : params_{default_network_params(NetworkType::k2G),
              default_network_params(NetworkType::k3G),
              default_network_params(NetworkType::k4G)} {}

void NetworkTable::set(NetworkType type, const NetworkParams& params) {
  validate_network_params(params);
  params_[static_cast<size_t>(type)] = params;
}

double sinr_linear(double power_dbm, const NetworkParams& params) {
  const double gamma =
      std::pow(10.0, (power_dbm - params.sensitivity_dbm) / 10.0);
  return std::min(gamma, kMaxSinrLinear);
}

double cell_throughput(double power_dbm, const NetworkParams& params) {
  return params.data_bandwidth_hz *
         std::log2(1.0 + sinr_linear(power_dbm, params));
}

UserCountOutOfRange::UserCountOutOfRange(int k_users)
    : std::out_of_range("user count " + std::to_string(k_users) +
                        " outside [1, " + std::to_string(kMaxUsers) + "]") {}

double per_user_throughput(double cell_rate_bps, int k_users) {
  if (k_users < 1 || k_users > kMaxUsers) throw UserCountOutOfRange(k_users);
  return cell_rate_bps / k_users;
}

ThroughputSeries::ThroughputSeries(std::vector<RatePoint> points)
    : points_(std::move(points)) {
  for (size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].rate_bps >= 0.0) || !std::isfinite(points_[i].rate_bps)) {
      throw std::invalid_argument("throughput rates must be non-negative");
    }
    if (i > 0 && !(points_[i].timestamp_s > points_[i - 1].timestamp_s)) {
      throw std::invalid_argument("throughput timestamps must increase");
    }
  }
}

size_t ThroughputSeries::index_at(double t) const {
  auto it = std::upper_bound(
      points_.begin(), points_.end(), t,
      [](double v, const RatePoint& p) { return v < p.timestamp_s; });
  if (it == points_.begin()) return 0;
  return static_cast<size_t>(it - points_.begin()) - 1;
}

double ThroughputSeries::rate_at(double t) const {
  if (points_.empty()) return 0.0;
  return points_[index_at(t)].rate_bps;
}

ThroughputSeries throughput_series(const Trace& trace, int k_users,
                                   const NetworkTable& table) {
  if (k_users < 1 || k_users > kMaxUsers) throw UserCountOutOfRange(k_users);
  std::vector<RatePoint> points;
  points.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    const double cell = cell_throughput(s.power_dbm, table[s.network]);
    points.push_back({s.timestamp_s, per_user_throughput(cell, k_users)});
  }
  return ThroughputSeries(std::move(points));
}

}  // namespace iobba
