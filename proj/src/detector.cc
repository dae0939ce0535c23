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

#include "iobba/detector.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "iobba/text.h"

namespace iobba {

namespace {

using Kind = DetectorError::Kind;

constexpr double kMassTolerance = 1e-9;
constexpr double kMaxFitRms = 0.1;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

std::optional<size_t> locate_bin(const std::vector<double>& edges,
                                 double value) {
  if (!(value >= edges.front() && value <= edges.back())) return std::nullopt;
  if (value == edges.back()) return edges.size() - 2;
  auto it = std::upper_bound(edges.begin(), edges.end(), value);
  return static_cast<size_t>(it - edges.begin()) - 1;
}

}  // namespace

std::string_view to_string(Observable observable) {
  return observable == Observable::kPower ? "power" : "radius";
}

std::string_view to_string(DetectorError::Kind kind) {
  switch (kind) {
    case Kind::kInsufficientData:
      return "InsufficientData";
    case Kind::kDegenerateSupport:
      return "DegenerateSupport";
    case Kind::kFitDiverged:
      return "FitDiverged";
    case Kind::kInvalidDistribution:
      return "InvalidDistribution";
    case Kind::kMismatch:
      return "Mismatch";
    case Kind::kMalformedModel:
      return "MalformedModel";
  }
  return "Unknown";
}

// ---------------------------------------------------------------------------
// BinningPolicy

BinningPolicy BinningPolicy::power_default() {
  return {-130.0, -40.0, 90, Scale::kLinear};
}

BinningPolicy BinningPolicy::radius_default() {
  return {1.0, 200.0, 48, Scale::kLog};
}

std::vector<double> BinningPolicy::edges() const {
  if (bins < 2 || !(hi > lo) || (scale == Scale::kLog && !(lo > 0.0))) {
    throw DetectorError(Kind::kInvalidDistribution, "invalid binning policy");
  }
  std::vector<double> out(bins + 1);
  for (size_t i = 0; i <= bins; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(bins);
    out[i] = scale == Scale::kLinear
                 ? lo + (hi - lo) * f
                 : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * f);
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------
// EmpiricalDistribution

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> edges,
                                             std::vector<double> densities,
                                             CoverageState state,
                                             Observable observable)
    : edges_(std::move(edges)),
      densities_(std::move(densities)),
      state_(state),
      observable_(observable) {
  if (densities_.size() < 2 || edges_.size() != densities_.size() + 1) {
    throw DetectorError(Kind::kInvalidDistribution,
                        "distribution needs >= 2 bins and bins+1 edges");
  }
  for (size_t i = 0; i < edges_.size(); ++i) {
    if (!std::isfinite(edges_[i]) || (i > 0 && !(edges_[i] > edges_[i - 1]))) {
      throw DetectorError(Kind::kInvalidDistribution,
                          "bin edges must strictly increase");
    }
  }
  double mass = 0.0;
  for (size_t i = 0; i < densities_.size(); ++i) {
    if (!(densities_[i] >= 0.0) || !std::isfinite(densities_[i])) {
      throw DetectorError(Kind::kInvalidDistribution,
                          "densities must be non-negative");
    }
    mass += bin_mass(i);
  }
  if (std::abs(mass - 1.0) > kMassTolerance) {
    throw DetectorError(Kind::kInvalidDistribution,
                        "densities integrate to " + text::format_double(mass));
  }
}

std::optional<size_t> EmpiricalDistribution::bin_of(double value) const {
  return locate_bin(edges_, value);
}

double EmpiricalDistribution::density_at(double value, double floor) const {
  const auto bin = bin_of(value);
  if (!bin) return floor;
  return std::max(densities_[*bin], floor);
}

double EmpiricalDistribution::cdf(double value) const {
  if (value <= lo()) return 0.0;
  if (value >= hi()) return 1.0;
  const size_t bin = *bin_of(value);
  double mass = 0.0;
  for (size_t i = 0; i < bin; ++i) mass += bin_mass(i);
  return mass + densities_[bin] * (value - edges_[bin]);
}

double EmpiricalDistribution::draw(Rng& rng) const {
  double u = rng.uniform();
  for (size_t i = 0; i < bin_count(); ++i) {
    const double m = bin_mass(i);
    if (u < m) return edges_[i] + bin_width(i) * (u / m);
    u -= m;
  }
  // Mass rounding left u in the tail; fall back to the last non-empty bin.
  for (size_t i = bin_count(); i-- > 0;) {
    if (densities_[i] > 0.0) return edges_[i] + bin_width(i) * rng.uniform();
  }
  return lo();
}

namespace {

// Raises bins below `floor` to exactly `floor` and rescales the remaining
// bins so total mass stays 1.
std::vector<double> apply_floor(std::vector<double> densities,
                                const std::vector<double>& edges,
                                double floor) {
  if (!(floor > 0.0)) {
    throw DetectorError(Kind::kInvalidDistribution,
                        "smoothing floor must be positive");
  }
  const size_t n = densities.size();
  std::vector<bool> floored(n, false);
  const std::vector<double> raw = densities;
  while (true) {
    double floor_mass = 0.0;
    double rest_mass = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double w = edges[i + 1] - edges[i];
      if (floored[i]) {
        floor_mass += floor * w;
      } else {
        rest_mass += raw[i] * w;
      }
    }
    if (floor_mass >= 1.0 || !(rest_mass > 0.0)) {
      throw DetectorError(Kind::kInvalidDistribution,
                          "smoothing floor exceeds the available mass");
    }
    const double scale = (1.0 - floor_mass) / rest_mass;
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      if (floored[i]) {
        densities[i] = floor;
      } else if (raw[i] * scale < floor) {
        floored[i] = true;
        changed = true;
      } else {
        densities[i] = raw[i] * scale;
      }
    }
    if (!changed) return densities;
  }
}

void require_finite(std::span<const double> samples) {
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw DetectorError(Kind::kInsufficientData, "non-finite sample");
    }
  }
}

}  // namespace

EmpiricalDistribution fit_empirical_pdf(std::span<const double> samples,
                                        CoverageState state,
                                        Observable observable,
                                        const BinningPolicy& binning,
                                        double floor) {
  if (samples.size() < 10) {
    throw DetectorError(Kind::kInsufficientData,
                        std::string(to_string(observable)) + "/" +
                            std::string(to_string(state)) + ": " +
                            std::to_string(samples.size()) +
                            " samples, need at least 10");
  }
  require_finite(samples);
  const auto [min_it, max_it] = std::minmax_element(samples.begin(),
                                                    samples.end());
  if (*min_it == *max_it) {
    throw DetectorError(Kind::kDegenerateSupport,
                        "all samples equal " + text::format_double(*min_it));
  }

  const std::vector<double> edges = binning.edges();
  std::vector<size_t> counts(binning.bins, 0);
  size_t in_range = 0;
  for (double v : samples) {
    if (const auto bin = locate_bin(edges, v)) {
      ++counts[*bin];
      ++in_range;
    }
  }
  if (in_range < 10) {
    throw DetectorError(Kind::kInsufficientData,
                        std::to_string(in_range) +
                            " samples inside the binning range, need 10");
  }
  std::vector<double> densities(binning.bins);
  for (size_t i = 0; i < binning.bins; ++i) {
    densities[i] = static_cast<double>(counts[i]) /
                   (static_cast<double>(in_range) * (edges[i + 1] - edges[i]));
  }
  return EmpiricalDistribution(edges, apply_floor(densities, edges, floor),
                               state, observable);
}

// ---------------------------------------------------------------------------
// Radius curve fitting

double LogNormalFit::cdf(double x) const {
  if (!(x > 0.0)) return 0.0;
  return normal_cdf((std::log(x) - mu) / sigma);
}

LogNormalFit fit_lognormal_cdf(std::span<const double> samples) {
  if (samples.size() < 10) {
    throw DetectorError(Kind::kInsufficientData,
                        std::to_string(samples.size()) +
                            " radius samples, need at least 10");
  }
  require_finite(samples);
  for (double v : samples) {
    if (!(v > 0.0)) {
      throw DetectorError(Kind::kInsufficientData,
                          "radius sample " + text::format_double(v) +
                              " is not positive");
    }
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw DetectorError(Kind::kDegenerateSupport,
                        "all radius samples equal " +
                            text::format_double(sorted.front()));
  }

  // Empirical CDF steps at distinct levels.
  std::vector<double> levels;
  std::vector<double> cum;
  const double n = static_cast<double>(sorted.size());
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 == sorted.size() || sorted[i + 1] != sorted[i]) {
      levels.push_back(sorted[i]);
      cum.push_back(static_cast<double>(i + 1) / n);
    }
  }
  double quantum = levels[1] - levels[0];
  for (size_t i = 2; i < levels.size(); ++i) {
    quantum = std::min(quantum, levels[i] - levels[i - 1]);
  }
  // A sample reported at level v stands for true values up to v + q/2.
  std::vector<double> log_x;
  std::vector<double> target;
  for (size_t i = 0; i + 1 < levels.size(); ++i) {
    log_x.push_back(std::log(levels[i] + 0.5 * quantum));
    target.push_back(cum[i]);
  }

  double mean_log = 0.0;
  for (double v : sorted) mean_log += std::log(v);
  mean_log /= n;
  double var_log = 0.0;
  for (double v : sorted) {
    const double d = std::log(v) - mean_log;
    var_log += d * d;
  }
  var_log /= n - 1.0;

  // Levenberg-Marquardt over (mu, log sigma).
  double mu = mean_log;
  double log_sigma = std::log(std::max(std::sqrt(var_log), 0.05));
  auto sse = [&](double m, double ls) {
    const double s = std::exp(ls);
    double acc = 0.0;
    for (size_t i = 0; i < log_x.size(); ++i) {
      const double r = normal_cdf((log_x[i] - m) / s) - target[i];
      acc += r * r;
    }
    return acc;
  };
  double cost = sse(mu, log_sigma);
  double lambda = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 200 && !converged; ++iter) {
    const double s = std::exp(log_sigma);
    double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
    for (size_t i = 0; i < log_x.size(); ++i) {
      const double z = (log_x[i] - mu) / s;
      const double r = normal_cdf(z) - target[i];
      const double phi = normal_pdf(z);
      const double d_mu = -phi / s;
      const double d_ls = -phi * z;
      jtj00 += d_mu * d_mu;
      jtj01 += d_mu * d_ls;
      jtj11 += d_ls * d_ls;
      jtr0 += d_mu * r;
      jtr1 += d_ls * r;
    }
    bool improved = false;
    while (lambda < 1e12) {
      const double a = jtj00 * (1.0 + lambda) + 1e-12;
      const double d = jtj11 * (1.0 + lambda) + 1e-12;
      const double det = a * d - jtj01 * jtj01;
      const double step_mu = -(d * jtr0 - jtj01 * jtr1) / det;
      const double step_ls = -(a * jtr1 - jtj01 * jtr0) / det;
      const double next_cost = sse(mu + step_mu, log_sigma + step_ls);
      if (std::isfinite(next_cost) && next_cost < cost) {
        mu += step_mu;
        log_sigma += step_ls;
        const double gain = cost - next_cost;
        cost = next_cost;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        converged = gain < 1e-15;
        break;
      }
      lambda *= 10.0;
    }
    converged = converged || !improved;
  }

  LogNormalFit fit;
  fit.mu = mu;
  fit.sigma = std::exp(log_sigma);
  fit.points = log_x.size();
  fit.rms_residual = std::sqrt(cost / static_cast<double>(log_x.size()));
  if (!std::isfinite(fit.mu) || !std::isfinite(fit.sigma) ||
      !(fit.sigma > 1e-4) || fit.rms_residual > kMaxFitRms) {
    throw DetectorError(Kind::kFitDiverged,
                        "log-normal fit residual " +
                            text::format_double(fit.rms_residual));
  }
  return fit;
}

EmpiricalDistribution fit_radius_model(std::span<const double> samples,
                                       CoverageState state,
                                       const BinningPolicy& binning,
                                       double floor) {
  const LogNormalFit fit = fit_lognormal_cdf(samples);
  const std::vector<double> edges = binning.edges();
  std::vector<double> cdf(edges.size());
  for (size_t i = 0; i < edges.size(); ++i) cdf[i] = fit.cdf(edges[i]);
  const double total = cdf.back() - cdf.front();
  if (!(total > 1e-9)) {
    throw DetectorError(Kind::kFitDiverged,
                        "fitted radius distribution has no mass on the grid");
  }
  std::vector<double> densities(binning.bins);
  for (size_t i = 0; i < binning.bins; ++i) {
    densities[i] = (cdf[i + 1] - cdf[i]) / (total * (edges[i + 1] - edges[i]));
  }
  return EmpiricalDistribution(edges, apply_floor(densities, edges, floor),
                               state, Observable::kRadius);
}

// ---------------------------------------------------------------------------
// Fusion

Observation observe(const EmpiricalDistribution& indoor,
                    const EmpiricalDistribution& outdoor, double value,
                    double floor) {
  const double p_in = indoor.density_at(value, floor);
  const double p_out = outdoor.density_at(value, floor);
  const double sum = p_in + p_out;
  return {p_in / sum, p_out / sum};
}

void DetectorModel::validate() const {
  auto check = [](const EmpiricalDistribution& d, CoverageState s,
                  Observable o) {
    if (d.state() != s || d.observable() != o) {
      throw DetectorError(Kind::kMismatch,
                          "model slot " + std::string(to_string(o)) + "/" +
                              std::string(to_string(s)) + " holds " +
                              std::string(to_string(d.observable())) + "/" +
                              std::string(to_string(d.state())));
    }
  };
  check(power_indoor, CoverageState::kIndoor, Observable::kPower);
  check(power_outdoor, CoverageState::kOutdoor, Observable::kPower);
  check(radius_indoor, CoverageState::kIndoor, Observable::kRadius);
  check(radius_outdoor, CoverageState::kOutdoor, Observable::kRadius);
  if (!(smoothing_floor > 0.0)) {
    throw DetectorError(Kind::kMismatch, "smoothing floor must be positive");
  }
}

Classification fuse(const Observation& power, const Observation& radius) {
  const double indoor = power.indoor * radius.indoor;
  const double outdoor = power.outdoor * radius.outdoor;
  const double sum = indoor + outdoor;
  if (indoor >= outdoor) {
    return {CoverageState::kIndoor, sum > 0.0 ? indoor / sum : 0.5};
  }
  return {CoverageState::kOutdoor, outdoor / sum};
}

Classification map_classify(const DetectorModel& model, double power_dbm,
                            double radius_m, FusionMode mode) {
  const Observation obs_power =
      observe(model.power_indoor, model.power_outdoor, power_dbm,
              model.smoothing_floor);
  const Observation obs_radius =
      mode == FusionMode::kFused
          ? observe(model.radius_indoor, model.radius_outdoor, radius_m,
                    model.smoothing_floor)
          : Observation::uniform();
  return fuse(obs_power, obs_radius);
}

std::vector<Detection> detect_series(const DetectorModel& model,
                                     const Trace& trace, FusionMode mode) {
  std::vector<Detection> out;
  out.reserve(trace.samples.size());
  for (const auto& s : trace.samples) {
    out.push_back({s.timestamp_s,
                   map_classify(model, s.power_dbm, s.confidence_radius_m,
                                mode)
                       .state});
  }
  return out;
}

DetectorModel fit_detector(std::span<const Trace> traces,
                           const DetectorFitOptions& options) {
  std::array<std::vector<double>, 2> power;
  std::array<std::vector<double>, 2> radius;
  for (const auto& trace : traces) {
    for (const auto& s : trace.samples) {
      const auto c = static_cast<size_t>(s.truth);
      power[c].push_back(s.power_dbm);
      radius[c].push_back(s.confidence_radius_m);
    }
  }
  for (auto state : {CoverageState::kIndoor, CoverageState::kOutdoor}) {
    const auto c = static_cast<size_t>(state);
    if (power[c].size() < 10) {
      throw DetectorError(Kind::kInsufficientData,
                          "traces hold " + std::to_string(power[c].size()) +
                              " " + std::string(to_string(state)) +
                              " samples, need at least 10");
    }
  }
  const double floor = options.smoothing_floor;
  DetectorModel model{
      fit_empirical_pdf(power[0], CoverageState::kIndoor, Observable::kPower,
                        options.power_binning, floor),
      fit_empirical_pdf(power[1], CoverageState::kOutdoor, Observable::kPower,
                        options.power_binning, floor),
      fit_radius_model(radius[0], CoverageState::kIndoor,
                       options.radius_binning, floor),
      fit_radius_model(radius[1], CoverageState::kOutdoor,
                       options.radius_binning, floor),
      floor};
  model.validate();
  return model;
}

// ---------------------------------------------------------------------------
// Confusion matrix

size_t ConfusionMatrix::column_total(CoverageState truth) const {
  const auto t = static_cast<size_t>(truth);
  return counts_[0][t] + counts_[1][t];
}

size_t ConfusionMatrix::total() const {
  return column_total(CoverageState::kIndoor) +
         column_total(CoverageState::kOutdoor);
}

double ConfusionMatrix::probability(CoverageState detected,
                                    CoverageState truth) const {
  const size_t col = column_total(truth);
  if (col == 0) return 0.0;
  return static_cast<double>(count(detected, truth)) /
         static_cast<double>(col);
}

double ConfusionMatrix::accuracy() const {
  const size_t n = total();
  if (n == 0) return 0.0;
  return static_cast<double>(counts_[0][0] + counts_[1][1]) /
         static_cast<double>(n);
}

ConfusionMatrix confusion_matrix(std::span<const CoverageState> predicted,
                                 std::span<const CoverageState> truth) {
  if (predicted.size() != truth.size()) {
    throw DetectorError(Kind::kMismatch,
                        "predicted and truth lengths differ (" +
                            std::to_string(predicted.size()) + " vs " +
                            std::to_string(truth.size()) + ")");
  }
  if (predicted.empty()) {
    throw DetectorError(Kind::kInsufficientData, "no samples to evaluate");
  }
  ConfusionMatrix::Counts counts{};
  for (size_t i = 0; i < predicted.size(); ++i) {
    ++counts[static_cast<size_t>(predicted[i])][static_cast<size_t>(truth[i])];
  }
  return ConfusionMatrix(counts);
}

// ---------------------------------------------------------------------------
// Model serialization
//
//   iobba-detector-model 1
//   smoothing_floor <x>
//   distribution <power|radius> <indoor|outdoor>
//   edges <n+1 values>
//   densities <n values>
//   ... (four distribution blocks)
//   end

namespace {

constexpr std::string_view kModelMagic = "iobba-detector-model";

void write_values(std::ostream& out, std::string_view key,
                  const std::vector<double>& values) {
  out << key;
  for (double v : values) out << ' ' << text::format_double(v);
  out << '\n';
}

std::vector<double> read_values(std::istringstream& in, size_t line_no) {
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    const auto v = text::parse_double(token);
    if (!v) {
      throw DetectorError(Kind::kMalformedModel,
                          "line " + std::to_string(line_no) +
                              ": bad number '" + token + "'");
    }
    values.push_back(*v);
  }
  return values;
}

}  // namespace

void write_detector_model(std::ostream& out, const DetectorModel& model) {
  out << kModelMagic << " 1\n";
  out << "smoothing_floor " << text::format_double(model.smoothing_floor)
      << '\n';
  for (const auto* d : {&model.power_indoor, &model.power_outdoor,
                        &model.radius_indoor, &model.radius_outdoor}) {
    out << "distribution " << to_string(d->observable()) << ' '
        << to_string(d->state()) << '\n';
    write_values(out, "edges", d->edges());
    write_values(out, "densities", d->densities());
  }
  out << "end\n";
}

DetectorModel read_detector_model(std::istream& in) {
  auto fail = [](size_t line_no, const std::string& what) {
    return DetectorError(Kind::kMalformedModel,
                         "line " + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  size_t line_no = 0;
  std::optional<double> floor;
  std::map<std::pair<Observable, CoverageState>, EmpiricalDistribution> dists;
  std::optional<std::pair<Observable, CoverageState>> current;
  std::vector<double> edges;
  bool saw_magic = false;
  bool saw_end = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream row(line);
    std::string key;
    if (!(row >> key)) continue;
    if (!saw_magic) {
      std::string version;
      row >> version;
      if (key != kModelMagic || version != "1") {
        throw fail(line_no, "not a version 1 detector model");
      }
      saw_magic = true;
    } else if (key == "smoothing_floor") {
      const auto values = read_values(row, line_no);
      if (values.size() != 1) throw fail(line_no, "smoothing_floor arity");
      floor = values[0];
    } else if (key == "distribution") {
      std::string obs, state;
      row >> obs >> state;
      if ((obs != "power" && obs != "radius") ||
          (state != "indoor" && state != "outdoor")) {
        throw fail(line_no, "bad distribution header");
      }
      current = {obs == "power" ? Observable::kPower : Observable::kRadius,
                 state == "indoor" ? CoverageState::kIndoor
                                   : CoverageState::kOutdoor};
      edges.clear();
    } else if (key == "edges") {
      if (!current) throw fail(line_no, "edges outside a distribution");
      edges = read_values(row, line_no);
    } else if (key == "densities") {
      if (!current || edges.empty()) {
        throw fail(line_no, "densities without edges");
      }
      try {
        dists.insert_or_assign(
            *current, EmpiricalDistribution(edges, read_values(row, line_no),
                                            current->second, current->first));
      } catch (const DetectorError& e) {
        throw fail(line_no, e.what());
      }
      current.reset();
    } else if (key == "end") {
      saw_end = true;
      break;
    } else {
      throw fail(line_no, "unknown key '" + key + "'");
    }
  }
  if (!saw_magic || !saw_end || !floor || dists.size() != 4) {
    throw DetectorError(Kind::kMalformedModel,
                        "incomplete detector model (need floor, four "
                        "distributions and 'end')");
  }
  auto take = [&](Observable o, CoverageState s) { return dists.at({o, s}); };
  DetectorModel model{take(Observable::kPower, CoverageState::kIndoor),
                      take(Observable::kPower, CoverageState::kOutdoor),
                      take(Observable::kRadius, CoverageState::kIndoor),
                      take(Observable::kRadius, CoverageState::kOutdoor),
                      *floor};
  model.validate();
  return model;
}

void save_detector_model(const std::string& path, const DetectorModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model '" + path + "'");
  write_detector_model(out, model);
}

DetectorModel load_detector_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model '" + path + "'");
  return read_detector_model(in);
}

}  // namespace iobba
