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

#include "iobba/trace.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "iobba/random.h"
#include "iobba/text.h"

namespace iobba {

std::string_view to_string(CoverageState state) {
  return state == CoverageState::kIndoor ? "indoor" : "outdoor";
}

std::string_view to_string(NetworkType network) {
  switch (network) {
    case NetworkType::k2G:
      return "2G";
    case NetworkType::k3G:
      return "3G";
    case NetworkType::k4G:
      return "4G";
  }
  return "?";
}

TraceError::TraceError(Kind kind, size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what),
      kind_(kind),
      line_(line) {}

namespace {

using Kind = TraceError::Kind;

void check_sample(const TraceSample& s, size_t line) {
  if (!std::isfinite(s.timestamp_s) || s.timestamp_s < 0.0) {
    throw TraceError(Kind::kOutOfRangeValue, line,
                     "timestamp must be finite and non-negative");
  }
  if (!(s.power_dbm >= kMinPowerDbm && s.power_dbm <= kMaxPowerDbm)) {
    throw TraceError(Kind::kOutOfRangeValue, line,
                     "power_dbm outside [-140, -20]");
  }
  if (!(s.confidence_radius_m > 0.0) || !std::isfinite(s.confidence_radius_m)) {
    throw TraceError(Kind::kOutOfRangeValue, line,
                     "confidence_radius_m must be positive");
  }
}

std::optional<NetworkType> parse_network(std::string_view field) {
  field = text::trim(field);
  if (field == "2G") return NetworkType::k2G;
  if (field == "3G") return NetworkType::k3G;
  if (field == "4G") return NetworkType::k4G;
  return std::nullopt;
}

std::optional<CoverageState> parse_state(std::string_view field) {
  field = text::trim(field);
  if (field == "indoor") return CoverageState::kIndoor;
  if (field == "outdoor") return CoverageState::kOutdoor;
  return std::nullopt;
}

}  // namespace

void validate_trace(const Trace& trace) {
  if (trace.samples.empty()) {
    throw TraceError(Kind::kEmptyTrace, 0, "trace '" + trace.id + "' is empty");
  }
  for (size_t i = 0; i < trace.samples.size(); ++i) {
    check_sample(trace.samples[i], 0);
    if (i > 0 &&
        !(trace.samples[i].timestamp_s > trace.samples[i - 1].timestamp_s)) {
      throw TraceError(Kind::kNonMonotonicTimestamp, 0,
                       "sample " + std::to_string(i) +
                           " does not advance the timestamp");
    }
  }
}

Trace parse_trace(std::istream& source, std::string id) {
  Trace trace;
  trace.id = std::move(id);
  std::string line;
  size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    const std::string_view row = text::trim(line);
    if (row.empty()) continue;
    if (!seen_header) {
      if (row != kTraceCsvHeader) {
        throw TraceError(Kind::kMalformedRow, line_no,
                         "expected header '" + std::string(kTraceCsvHeader) +
                             "'");
      }
      seen_header = true;
      continue;
    }
    const auto fields = text::split(row, ',');
    if (fields.size() != 5) {
      throw TraceError(Kind::kMalformedRow, line_no,
                       "expected 5 fields, got " +
                           std::to_string(fields.size()));
    }
    const auto timestamp = text::parse_double(fields[0]);
    const auto network = parse_network(fields[1]);
    const auto power = text::parse_double(fields[2]);
    const auto radius = text::parse_double(fields[3]);
    const auto truth = parse_state(fields[4]);
    if (!timestamp || !network || !power || !radius || !truth) {
      throw TraceError(Kind::kMalformedRow, line_no, "unparseable field");
    }
    TraceSample sample{*timestamp, *network, *power, *radius, *truth};
    check_sample(sample, line_no);
    if (!trace.samples.empty() &&
        !(sample.timestamp_s > trace.samples.back().timestamp_s)) {
      throw TraceError(Kind::kNonMonotonicTimestamp, line_no,
                       "timestamp does not increase");
    }
    trace.samples.push_back(sample);
  }
  if (!seen_header) {
    throw TraceError(Kind::kMalformedRow, line_no, "missing header");
  }
  if (trace.samples.empty()) {
    throw TraceError(Kind::kEmptyTrace, 0, "trace '" + trace.id + "' is empty");
  }
  return trace;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open trace file '" + path + "'");
  }
  std::string id = path;
  const size_t slash = id.find_last_of('/');
  if (slash != std::string::npos) id = id.substr(slash + 1);
  if (id.size() > 4 && id.ends_with(".csv")) id.resize(id.size() - 4);
  return parse_trace(in, id);
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& s : trace.samples) {
    out << text::format_double(s.timestamp_s) << ',' << to_string(s.network)
        << ',' << text::format_double(s.power_dbm) << ','
        << text::format_double(s.confidence_radius_m) << ','
        << to_string(s.truth) << '\n';
  }
}

void write_trace_file(const std::string& path, const Trace& trace) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write trace file '" + path + "'");
  }
  write_trace(out, trace);
}

// ---------------------------------------------------------------------------

ClassProfile default_indoor_profile() {
  return {NormalPower{-105.0, 5.0},
          QuantizedLogNormalRadius{std::log(30.0), 0.5, 1.0}};
}

ClassProfile default_outdoor_profile() {
  return {NormalPower{-85.0, 5.0},
          QuantizedLogNormalRadius{std::log(6.0), 0.45, 1.0}};
}

namespace {

void check_spec(const SynthesisSpec& spec) {
  if (spec.timeline.empty()) {
    throw TraceError(Kind::kInvalidSpec, 0, "timeline is empty");
  }
  if (!(spec.sample_period_s > 0.0) || !std::isfinite(spec.sample_period_s)) {
    throw TraceError(Kind::kInvalidSpec, 0, "sample period must be positive");
  }
  if (!(spec.shadowing_correlation_s >= 0.0)) {
    throw TraceError(Kind::kInvalidSpec, 0,
                     "shadowing correlation time must be non-negative");
  }
  for (const auto& phase : spec.timeline) {
    if (!(phase.duration_s > 0.0) || !std::isfinite(phase.duration_s)) {
      throw TraceError(Kind::kInvalidSpec, 0,
                       "timeline phase durations must be positive");
    }
  }
  auto check_profile = [](const ClassProfile& p) {
    if (const auto* n = std::get_if<NormalPower>(&p.power)) {
      if (!(n->stddev_db >= 0.0)) {
        throw TraceError(Kind::kInvalidSpec, 0, "negative power stddev");
      }
    } else {
      const auto& l = std::get<ReflectedLogNormalPower>(p.power);
      if (!(l.sigma >= 0.0)) {
        throw TraceError(Kind::kInvalidSpec, 0, "negative power sigma");
      }
    }
    if (const auto* d = std::get_if<DiscreteRadius>(&p.radius)) {
      if (d->levels_m.empty() || d->levels_m.size() != d->weights.size()) {
        throw TraceError(Kind::kInvalidSpec, 0,
                         "discrete radius needs matching levels and weights");
      }
      double total = 0.0;
      for (size_t i = 0; i < d->levels_m.size(); ++i) {
        if (!(d->levels_m[i] > 0.0) || !(d->weights[i] >= 0.0)) {
          throw TraceError(Kind::kInvalidSpec, 0,
                           "radius levels must be positive, weights >= 0");
        }
        total += d->weights[i];
      }
      if (!(total > 0.0)) {
        throw TraceError(Kind::kInvalidSpec, 0, "radius weights sum to zero");
      }
    } else {
      const auto& q = std::get<QuantizedLogNormalRadius>(p.radius);
      if (!(q.step_m > 0.0) || !(q.sigma >= 0.0)) {
        throw TraceError(Kind::kInvalidSpec, 0, "bad quantized radius");
      }
    }
  };
  check_profile(spec.indoor);
  check_profile(spec.outdoor);
}

// Maps a standard-normal latent onto the power distribution.
double power_from_latent(const PowerDistribution& dist, double z) {
  double value = 0.0;
  if (const auto* n = std::get_if<NormalPower>(&dist)) {
    value = n->mean_dbm + n->stddev_db * z;
  } else {
    const auto& l = std::get<ReflectedLogNormalPower>(dist);
    value = l.ceiling_dbm - std::exp(l.mu + l.sigma * z);
  }
  return std::clamp(value, kMinPowerDbm, kMaxPowerDbm);
}

double draw_radius(const RadiusDistribution& dist, Rng& rng) {
  if (const auto* d = std::get_if<DiscreteRadius>(&dist)) {
    double total = 0.0;
    for (double w : d->weights) total += w;
    double u = rng.uniform() * total;
    for (size_t i = 0; i < d->levels_m.size(); ++i) {
      if (u < d->weights[i]) return d->levels_m[i];
      u -= d->weights[i];
    }
    // Rounding left u past the last positive weight.
    for (size_t i = d->levels_m.size(); i-- > 0;) {
      if (d->weights[i] > 0.0) return d->levels_m[i];
    }
    return d->levels_m.back();
  }
  const auto& q = std::get<QuantizedLogNormalRadius>(dist);
  const double raw = std::exp(rng.normal(q.mu, q.sigma));
  return std::max(1.0, std::round(raw / q.step_m)) * q.step_m;
}

}  // namespace

Trace synthesize_trace(const SynthesisSpec& spec, uint64_t seed) {
  check_spec(spec);
  double total = 0.0;
  for (const auto& phase : spec.timeline) total += phase.duration_s;
  const auto count = static_cast<size_t>(
      std::ceil(total / spec.sample_period_s - 1e-9));

  const double rho = spec.shadowing_correlation_s > 0.0
                         ? std::exp(-spec.sample_period_s /
                                    spec.shadowing_correlation_s)
                         : 0.0;
  const double innovation = std::sqrt(1.0 - rho * rho);
  Rng rng(seed);
  double latent = rng.normal();
  Trace trace;
  trace.id = spec.id;
  trace.samples.reserve(count);
  size_t phase = 0;
  double phase_end = spec.timeline[0].duration_s;
  for (size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) * spec.sample_period_s;
    while (t >= phase_end && phase + 1 < spec.timeline.size()) {
      ++phase;
      phase_end += spec.timeline[phase].duration_s;
    }
    const CoverageState state = spec.timeline[phase].state;
    const ClassProfile& profile =
        state == CoverageState::kIndoor ? spec.indoor : spec.outdoor;
    TraceSample s;
    s.timestamp_s = t;
    s.network = spec.network;
    if (i > 0) latent = rho * latent + innovation * rng.normal();
    s.power_dbm = power_from_latent(profile.power, latent);
    s.confidence_radius_m = draw_radius(profile.radius, rng);
    s.truth = state;
    trace.samples.push_back(s);
  }
  return trace;
}

std::vector<SynthesisSpec> transition_corpus_specs(
    const TransitionCorpusOptions& options, uint64_t seed) {
  if (!(options.min_outdoor_s > 0.0 &&
        options.min_outdoor_s <= options.max_outdoor_s &&
        options.max_outdoor_s < options.duration_s)) {
    throw TraceError(Kind::kInvalidSpec, 0,
                     "outdoor lead-in must be positive and shorter than the "
                     "trace");
  }
  Rng rng(seed);
  std::vector<SynthesisSpec> specs;
  for (size_t i = 0; i < options.count; ++i) {
    SynthesisSpec spec;
    char id[32];
    std::snprintf(id, sizeof(id), "%s%03zu", options.id_prefix.c_str(), i);
    spec.id = id;
    spec.indoor = options.indoor;
    spec.outdoor = options.outdoor;
    spec.sample_period_s = options.sample_period_s;
    spec.network = options.network;
    spec.shadowing_correlation_s = options.shadowing_correlation_s;
    const double lead = rng.uniform(options.min_outdoor_s,
                                    options.max_outdoor_s);
    spec.timeline = {{lead, CoverageState::kOutdoor},
                     {options.duration_s - lead, CoverageState::kIndoor}};
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::vector<Trace> transition_corpus(const TransitionCorpusOptions& options,
                                     uint64_t seed) {
  std::vector<Trace> traces;
  Rng seeds(seed ^ 0x9e3779b97f4a7c15ULL);
  for (const auto& spec : transition_corpus_specs(options, seed)) {
    traces.push_back(synthesize_trace(spec, seeds.next()));
  }
  return traces;
}

}  // namespace iobba
