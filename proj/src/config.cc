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

#include "iobba/config.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace iobba {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& field) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

template <typename T>
void read_optional(const json& j, const std::string& key, T& target) {
  if (j.contains(key)) target = get_field<T>(j, key, key);
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  if (base_dir.empty() || path.empty() || fs::path(path).is_absolute()) {
    return path;
  }
  return (fs::path(base_dir) / path).lexically_normal().string();
}

std::optional<NetworkType> network_from_string(const std::string& s) {
  if (s == "2G") return NetworkType::k2G;
  if (s == "3G") return NetworkType::k3G;
  if (s == "4G") return NetworkType::k4G;
  return std::nullopt;
}

std::vector<RepresentationSpec> standard_ladder_specs() {
  std::vector<RepresentationSpec> out;
  const Ladder standard = Ladder::standard();
  for (const auto& rep : standard.representations()) {
    out.push_back({rep.resolution, rep.max_encoding_rate_bps});
  }
  return out;
}

}  // namespace

Ladder ExperimentConfig::build_ladder() const {
  try {
    return Ladder(ladder, segment_duration_s);
  } catch (const PolicyError& e) {
    throw ConfigError("ladder", e.what());
  }
}

SessionConfig ExperimentConfig::base_session() const {
  SessionConfig s;
  s.b_max_s = b_max_s.front();
  s.startup_threshold_s = startup_threshold_s;
  s.k_users = k_users.front();
  s.video_duration_s = video_duration_s;
  s.ladder = build_ladder();
  s.network = network;
  return s;
}

std::vector<PolicyVariant> ExperimentConfig::policy_variants() const {
  std::vector<PolicyVariant> out;
  for (const auto& name : policies) {
    PolicyVariant v;
    try {
      v = policy_by_name(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("policies", e.what());
    }
    v.config.m = m;
    v.config.indoor_r_lower_fraction = indoor_r_lower_fraction;
    v.config.r_upper_fraction = r_upper_fraction;
    v.config.reservoir_min_fraction = reservoir_min_fraction;
    v.config.reservoir_max_fraction = reservoir_max_fraction;
    out.push_back(v);
  }
  return out;
}

bool ExperimentConfig::needs_detector() const {
  return std::find(policies.begin(), policies.end(), "iobba-detected") !=
         policies.end();
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig c;
  c.ladder = standard_ladder_specs();
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
  if (!j.is_object()) throw ConfigError("config", "top level must be object");

  ExperimentConfig c = default_experiment_config();
  c.traces = get_field<std::vector<std::string>>(j, "traces", "traces");
  for (auto& p : c.traces) p = resolve(base_dir, p);
  read_optional(j, "training_traces", c.training_traces);
  for (auto& p : c.training_traces) p = resolve(base_dir, p);

  if (j.contains("ladder")) {
    const json& l = j.at("ladder");
    read_optional(l, "segment_duration_s", c.segment_duration_s);
    if (l.contains("representations")) {
      c.ladder.clear();
      for (const auto& r : l.at("representations")) {
        RepresentationSpec spec;
        spec.resolution = r.value("resolution", "");
        spec.max_encoding_rate_bps =
            get_field<double>(r, "rate_kbps", "ladder.representations") * 1e3;
        c.ladder.push_back(spec);
      }
    }
  }
  read_optional(j, "bmax_s", c.b_max_s);
  read_optional(j, "k_users", c.k_users);
  read_optional(j, "policies", c.policies);
  read_optional(j, "detector_model", c.detector_model);
  c.detector_model = resolve(base_dir, c.detector_model);
  read_optional(j, "fit_detector", c.fit_detector);
  read_optional(j, "out_dir", c.out_dir);
  c.out_dir = resolve(base_dir, c.out_dir);
  read_optional(j, "seed", c.seed);
  read_optional(j, "video_duration_s", c.video_duration_s);
  read_optional(j, "startup_threshold_s", c.startup_threshold_s);
  read_optional(j, "m", c.m);
  read_optional(j, "indoor_r_lower_fraction", c.indoor_r_lower_fraction);
  read_optional(j, "r_upper_fraction", c.r_upper_fraction);
  if (j.contains("reservoir_fraction")) {
    const auto r = get_field<std::vector<double>>(j, "reservoir_fraction",
                                                  "reservoir_fraction");
    if (r.size() != 2) {
      throw ConfigError("reservoir_fraction", "expected [min, max]");
    }
    c.reservoir_min_fraction = r[0];
    c.reservoir_max_fraction = r[1];
  }
  read_optional(j, "threads", c.threads);
  if (j.contains("network")) {
    for (const auto& [name, params] : j.at("network").items()) {
      const auto type = network_from_string(name);
      if (!type) throw ConfigError("network", "unknown RAT '" + name + "'");
      NetworkParams p = c.network[*type];
      read_optional(params, "measured_bandwidth_hz", p.measured_bandwidth_hz);
      read_optional(params, "data_bandwidth_hz", p.data_bandwidth_hz);
      read_optional(params, "sensitivity_dbm", p.sensitivity_dbm);
      try {
        c.network.set(*type, p);
      } catch (const std::invalid_argument& e) {
        throw ConfigError("network." + name, e.what());
      }
    }
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str(),
                                 fs::path(path).parent_path().string());
}

void validate_experiment_config(const ExperimentConfig& c) {
  if (c.traces.empty()) throw ConfigError("traces", "list is empty");
  if (c.b_max_s.empty()) throw ConfigError("bmax_s", "list is empty");
  if (c.k_users.empty()) throw ConfigError("k_users", "list is empty");
  if (c.policies.empty()) throw ConfigError("policies", "list is empty");
  for (int k : c.k_users) {
    if (k < 1 || k > kMaxUsers) {
      throw ConfigError("k_users", "value " + std::to_string(k) +
                                       " outside [1, 8]");
    }
  }
  const Ladder ladder = c.build_ladder();
  for (double b : c.b_max_s) {
    if (!(b >= ladder.segment_duration_s())) {
      throw ConfigError("bmax_s", "must hold at least one segment");
    }
  }
  if (c.m < 1) throw ConfigError("m", "must be >= 1");
  const auto variants = c.policy_variants();
  for (const auto& v : variants) {
    try {
      validate_policy_config(v.config);
    } catch (const PolicyError& e) {
      throw ConfigError("policy thresholds", e.what());
    }
  }
  if (c.needs_detector() && c.detector_model.empty() && !c.fit_detector) {
    throw ConfigError("detector_model",
                      "iobba-detected needs a model path or fit_detector");
  }
  SessionConfig s = c.base_session();
  try {
    validate_session_config(s, nullptr);
  } catch (const ConfigInvalid& e) {
    throw ConfigError("session", e.what());
  }
  for (const auto& p : c.traces) {
    if (!fs::exists(p)) throw ConfigError("traces", "'" + p + "' not found");
  }
  for (const auto& p : c.training_traces) {
    if (!fs::exists(p)) {
      throw ConfigError("training_traces", "'" + p + "' not found");
    }
  }
  if (!c.detector_model.empty() && !c.fit_detector &&
      !fs::exists(c.detector_model)) {
    throw ConfigError("detector_model",
                      "'" + c.detector_model + "' not found");
  }
}

std::vector<std::string> expand_trace_paths(
    const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
          files.push_back(entry.path().string());
        }
      }
      std::sort(files.begin(), files.end());
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

ClassProfile parse_profile(const json& j, const std::string& field,
                           ClassProfile profile) {
  if (j.contains("power")) {
    const json& p = j.at("power");
    const auto family = p.value("family", "normal");
    if (family == "normal") {
      NormalPower n;
      read_optional(p, "mean_dbm", n.mean_dbm);
      read_optional(p, "stddev_db", n.stddev_db);
      profile.power = n;
    } else if (family == "reflected_lognormal") {
      ReflectedLogNormalPower r;
      read_optional(p, "ceiling_dbm", r.ceiling_dbm);
      read_optional(p, "mu", r.mu);
      read_optional(p, "sigma", r.sigma);
      profile.power = r;
    } else {
      throw ConfigError(field + ".power.family", "unknown '" + family + "'");
    }
  }
  if (j.contains("radius")) {
    const json& r = j.at("radius");
    const auto family = r.value("family", "quantized_lognormal");
    if (family == "quantized_lognormal") {
      QuantizedLogNormalRadius q;
      read_optional(r, "mu", q.mu);
      read_optional(r, "sigma", q.sigma);
      read_optional(r, "step_m", q.step_m);
      profile.radius = q;
    } else if (family == "discrete") {
      DiscreteRadius d;
      d.levels_m = get_field<std::vector<double>>(r, "levels_m",
                                                  field + ".radius.levels_m");
      d.weights = get_field<std::vector<double>>(r, "weights",
                                                 field + ".radius.weights");
      profile.radius = d;
    } else {
      throw ConfigError(field + ".radius.family", "unknown '" + family + "'");
    }
  }
  return profile;
}

}  // namespace

SynthesisSpec parse_synthesis_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("spec", e.what());
  }
  SynthesisSpec spec;
  spec.indoor = default_indoor_profile();
  spec.outdoor = default_outdoor_profile();
  read_optional(j, "id", spec.id);
  read_optional(j, "sample_period_s", spec.sample_period_s);
  read_optional(j, "shadowing_correlation_s", spec.shadowing_correlation_s);
  if (j.contains("network")) {
    const auto type = network_from_string(get_field<std::string>(
        j, "network", "network"));
    if (!type) throw ConfigError("network", "expected 2G, 3G or 4G");
    spec.network = *type;
  }
  if (!j.contains("timeline")) throw ConfigError("timeline", "missing");
  for (const auto& phase : j.at("timeline")) {
    const auto state = get_field<std::string>(phase, "state", "timeline");
    if (state != "indoor" && state != "outdoor") {
      throw ConfigError("timeline", "state must be indoor or outdoor");
    }
    spec.timeline.push_back(
        {get_field<double>(phase, "duration_s", "timeline"),
         state == "indoor" ? CoverageState::kIndoor : CoverageState::kOutdoor});
  }
  if (j.contains("indoor")) {
    spec.indoor = parse_profile(j.at("indoor"), "indoor", spec.indoor);
  }
  if (j.contains("outdoor")) {
    spec.outdoor = parse_profile(j.at("outdoor"), "outdoor", spec.outdoor);
  }
  return spec;
}

}  // namespace iobba
