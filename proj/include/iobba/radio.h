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

#ifndef IOBBA_RADIO_H_
#define IOBBA_RADIO_H_

#include <array>
#include <stdexcept>
#include <vector>

#include "iobba/trace.h"

namespace iobba {

struct NetworkParams {
  double measured_bandwidth_hz = 0.0;
  double data_bandwidth_hz = 0.0;
  // Sensitivity threshold over the measured bandwidth; interference is
  // folded into it.
  double sensitivity_dbm = 0.0;
};

// SINR cap of 20 dB, the highest-modulation operating point.
inline constexpr double kMaxSinrLinear = 100.0;
inline constexpr int kMaxUsers = 8;

// Per-RAT parameter table indexed by NetworkType.
class NetworkTable {
 public:
  // 2G: 200 kHz / 200 kHz / -104 dBm, 3G: 3.84 MHz / 5 MHz / -106 dBm,
  // 4G: 15 kHz / 18 MHz / -94 dBm.
  NetworkTable();

  const NetworkParams& operator[](NetworkType type) const {
    return params_[static_cast<size_t>(type)];
  }
  // Throws std::invalid_argument if params violate their invariants.
  void set(NetworkType type, const NetworkParams& params);

 private:
  std::array<NetworkParams, 3> params_;
};

NetworkParams default_network_params(NetworkType type);
void validate_network_params(const NetworkParams& params);

double sinr_linear(double power_dbm, const NetworkParams& params);

// Shannon rate over the data bandwidth, bits/s.
double cell_throughput(double power_dbm, const NetworkParams& params);

class UserCountOutOfRange : public std::out_of_range {
 public:
  explicit UserCountOutOfRange(int k_users);
};

// Round-robin share of the cell rate; k_users in [1, 8].
double per_user_throughput(double cell_rate_bps, int k_users);

struct RatePoint {
  double timestamp_s = 0.0;
  double rate_bps = 0.0;
};

// Piecewise-constant per-user rate: each point holds until the next one,
// the last point holds forever, the first point also covers t < t0.
class ThroughputSeries {
 public:
  ThroughputSeries() = default;
  // Throws std::invalid_argument unless timestamps strictly increase and
  // rates are non-negative.
  explicit ThroughputSeries(std::vector<RatePoint> points);

  const std::vector<RatePoint>& points() const { return points_; }
  bool empty() const { return points_.empty(); }

  double rate_at(double t) const;
  // Index of the point in effect at time t.
  size_t index_at(double t) const;

 private:
  std::vector<RatePoint> points_;
};

ThroughputSeries throughput_series(const Trace& trace, int k_users,
                                   const NetworkTable& table = {});

}  // namespace iobba

#endif  // IOBBA_RADIO_H_
