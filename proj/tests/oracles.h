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

#ifndef IOBBA_TESTS_ORACLES_H_
#define IOBBA_TESTS_ORACLES_H_

// Reference computations written independently of the library code paths
// they check. Shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <vector>

#include "iobba/detector.h"
#include "iobba/trace.h"

namespace iobba::oracle {

// Density by linear scan over the bins; `floor` outside the support and in
// bins below it.
inline double density(const EmpiricalDistribution& d, double x,
                      double floor) {
  const auto& e = d.edges();
  const size_t n = d.densities().size();
  for (size_t i = 0; i < n; ++i) {
    const bool last = i + 1 == n;
    if (x >= e[i] && (x < e[i + 1] || (last && x == e[i + 1]))) {
      return std::max(d.densities()[i], floor);
    }
  }
  return floor;
}

// Enumerates both classes and keeps the first strict maximum of the product
// of the two normalized observations, so Indoor wins ties.
inline CoverageState argmax_class(const DetectorModel& m, double power,
                                  double radius, bool use_radius = true) {
  const double f = m.smoothing_floor;
  const double py[2] = {density(m.power_indoor, power, f),
                        density(m.power_outdoor, power, f)};
  const double pz[2] = {density(m.radius_indoor, radius, f),
                        density(m.radius_outdoor, radius, f)};
  const CoverageState classes[2] = {CoverageState::kIndoor,
                                    CoverageState::kOutdoor};
  CoverageState best = classes[0];
  double best_score = -1.0;
  for (int c = 0; c < 2; ++c) {
    const double obs_y = py[c] / (py[0] + py[1]);
    const double obs_z = use_radius ? pz[c] / (pz[0] + pz[1]) : 0.5;
    const double score = obs_y * obs_z;
    if (score > best_score) {
      best_score = score;
      best = classes[c];
    }
  }
  return best;
}

// Sorted union of two edge vectors.
inline std::vector<double> merged_edges(const std::vector<double>& a,
                                        const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Accuracy of the Bayes rule for data drawn from the model itself with
// equal class priors, integrated exactly over the cells of the merged
// piecewise-constant grid.
inline double bayes_accuracy(const DetectorModel& m) {
  const auto ye = merged_edges(m.power_indoor.edges(),
                               m.power_outdoor.edges());
  const auto ze = merged_edges(m.radius_indoor.edges(),
                               m.radius_outdoor.edges());
  double correct = 0.0;
  for (size_t i = 0; i + 1 < ye.size(); ++i) {
    const double yw = ye[i + 1] - ye[i];
    const double ym = 0.5 * (ye[i] + ye[i + 1]);
    // Zero outside a class's support: the data never lands there.
    auto mass_y = [&](const EmpiricalDistribution& d) {
      return (ym < d.lo() || ym > d.hi()) ? 0.0 : density(d, ym, 0.0) * yw;
    };
    const double yin = mass_y(m.power_indoor);
    const double yout = mass_y(m.power_outdoor);
    for (size_t j = 0; j + 1 < ze.size(); ++j) {
      const double zw = ze[j + 1] - ze[j];
      const double zm = 0.5 * (ze[j] + ze[j + 1]);
      auto mass_z = [&](const EmpiricalDistribution& d) {
        return (zm < d.lo() || zm > d.hi()) ? 0.0 : density(d, zm, 0.0) * zw;
      };
      const double in = yin * mass_z(m.radius_indoor);
      const double out = yout * mass_z(m.radius_outdoor);
      correct += 0.5 * std::max(in, out);
    }
  }
  return correct;
}

inline double lognormal_cdf(double x, double mu, double sigma) {
  if (x <= 0.0) return 0.0;
  return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::sqrt(2.0)));
}

}  // namespace iobba::oracle

#endif  // IOBBA_TESTS_ORACLES_H_
