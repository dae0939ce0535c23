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

#ifndef IOBBA_DETECTOR_H_
#define IOBBA_DETECTOR_H_

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iobba/random.h"
#include "iobba/trace.h"

namespace iobba {

enum class Observable { kPower = 0, kRadius = 1 };

std::string_view to_string(Observable observable);

class DetectorError : public std::runtime_error {
 public:
  enum class Kind {
    kInsufficientData,
    kDegenerateSupport,
    kFitDiverged,
    kInvalidDistribution,
    kMismatch,
    kMalformedModel,
  };

  DetectorError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(DetectorError::Kind kind);

// Density assigned outside a distribution's support and the minimum
// density of any fitted bin, per unit of the observable.
inline constexpr double kDefaultSmoothingFloor = 1e-6;

struct BinningPolicy {
  enum class Scale { kLinear, kLog };

  double lo = 0.0;
  double hi = 1.0;
  size_t bins = 10;
  Scale scale = Scale::kLinear;

  // 1 dBm bins over [-130, -40].
  static BinningPolicy power_default();
  // 48 logarithmic bins over [1, 200] m.
  static BinningPolicy radius_default();

  std::vector<double> edges() const;
};

// Piecewise-constant density over [edges.front(), edges.back()].
class EmpiricalDistribution {
 public:
  // Throws DetectorError(kInvalidDistribution) unless edges strictly
  // increase, there are >= 2 bins, densities are non-negative and the
  // total mass is 1 within 1e-9.
  EmpiricalDistribution(std::vector<double> edges,
                        std::vector<double> densities, CoverageState state,
                        Observable observable);

  const std::vector<double>& edges() const { return edges_; }
  const std::vector<double>& densities() const { return densities_; }
  CoverageState state() const { return state_; }
  Observable observable() const { return observable_; }
  size_t bin_count() const { return densities_.size(); }
  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }
  double bin_width(size_t i) const { return edges_[i + 1] - edges_[i]; }
  double bin_mass(size_t i) const { return densities_[i] * bin_width(i); }

  // Bin [e_i, e_{i+1}) containing value; the last bin is closed.
  std::optional<size_t> bin_of(double value) const;
  // Density at value, or `floor` outside the support or in a zero bin.
  double density_at(double value, double floor) const;
  double cdf(double value) const;

  // Draws from the piecewise-uniform density.
  double draw(Rng& rng) const;

  friend bool operator==(const EmpiricalDistribution&,
                         const EmpiricalDistribution&) = default;

 private:
  std::vector<double> edges_;
  std::vector<double> densities_;
  CoverageState state_;
  Observable observable_;
};

// Histogram density over `binning`, floored at `floor` and renormalized so
// floored bins hold exactly `floor`. Samples outside the binning range are
// not counted.
EmpiricalDistribution fit_empirical_pdf(std::span<const double> samples,
                                        CoverageState state,
                                        Observable observable,
                                        const BinningPolicy& binning,
                                        double floor = kDefaultSmoothingFloor);

struct LogNormalFit {
  double mu = 0.0;
  double sigma = 1.0;
  double rms_residual = 0.0;
  size_t points = 0;

  double cdf(double x) const;
};

// Least-squares fit of a log-normal CDF to the empirical CDF of quantized
// samples. Each empirical step is placed half a quantum above its level.
LogNormalFit fit_lognormal_cdf(std::span<const double> samples);

// Fits the log-normal CDF and discretizes its density onto `binning`.
EmpiricalDistribution fit_radius_model(
    std::span<const double> samples, CoverageState state,
    const BinningPolicy& binning = BinningPolicy::radius_default(),
    double floor = kDefaultSmoothingFloor);

struct Observation {
  double indoor = 0.5;
  double outdoor = 0.5;

  double weight(CoverageState s) const {
    return s == CoverageState::kIndoor ? indoor : outdoor;
  }
  static Observation uniform() { return {0.5, 0.5}; }
};

// Class likelihoods at `value` normalized across the two classes.
Observation observe(const EmpiricalDistribution& indoor,
                    const EmpiricalDistribution& outdoor, double value,
                    double floor = kDefaultSmoothingFloor);

struct DetectorModel {
  EmpiricalDistribution power_indoor;
  EmpiricalDistribution power_outdoor;
  EmpiricalDistribution radius_indoor;
  EmpiricalDistribution radius_outdoor;
  double smoothing_floor = kDefaultSmoothingFloor;

  // Throws DetectorError(kMismatch) if a slot holds the wrong class or
  // observable, or the floor is not positive.
  void validate() const;

  friend bool operator==(const DetectorModel&, const DetectorModel&) = default;
};

enum class FusionMode { kFused, kPowerOnly };

struct Classification {
  CoverageState state = CoverageState::kIndoor;
  double posterior = 0.5;
};

// MAP decision over the product of two observations; ties go to Indoor.
Classification fuse(const Observation& power, const Observation& radius);

Classification map_classify(const DetectorModel& model, double power_dbm,
                            double radius_m,
                            FusionMode mode = FusionMode::kFused);

struct Detection {
  double timestamp_s = 0.0;
  CoverageState state = CoverageState::kIndoor;

  friend bool operator==(const Detection&, const Detection&) = default;
};

std::vector<Detection> detect_series(const DetectorModel& model,
                                     const Trace& trace,
                                     FusionMode mode = FusionMode::kFused);

struct DetectorFitOptions {
  BinningPolicy power_binning = BinningPolicy::power_default();
  BinningPolicy radius_binning = BinningPolicy::radius_default();
  double smoothing_floor = kDefaultSmoothingFloor;
};

// Fits all four class-conditional distributions from labeled traces.
DetectorModel fit_detector(std::span<const Trace> traces,
                           const DetectorFitOptions& options = {});

class ConfusionMatrix {
 public:
  // counts[detected][truth]
  using Counts = std::array<std::array<size_t, 2>, 2>;

  explicit ConfusionMatrix(Counts counts) : counts_(counts) {}

  size_t count(CoverageState detected, CoverageState truth) const {
    return counts_[static_cast<size_t>(detected)][static_cast<size_t>(truth)];
  }
  size_t column_total(CoverageState truth) const;
  size_t total() const;
  // P(detected | truth); 0 for a truth class with no samples.
  double probability(CoverageState detected, CoverageState truth) const;
  double accuracy() const;

 private:
  Counts counts_;
};

ConfusionMatrix confusion_matrix(std::span<const CoverageState> predicted,
                                 std::span<const CoverageState> truth);

// Line-oriented text format; doubles use shortest round-trip form so a
// reloaded model compares equal to the original.
void write_detector_model(std::ostream& out, const DetectorModel& model);
DetectorModel read_detector_model(std::istream& in);
void save_detector_model(const std::string& path, const DetectorModel& model);
DetectorModel load_detector_model(const std::string& path);

}  // namespace iobba

#endif  // IOBBA_DETECTOR_H_
