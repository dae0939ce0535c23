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

#include "iobba/cli.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "iobba/config.h"
#include "iobba/detector.h"
#include "iobba/qoe.h"
#include "iobba/random.h"
#include "iobba/simulator.h"
#include "iobba/text.h"
#include "iobba/trace.h"

namespace iobba {

namespace fs = std::filesystem;

namespace {

// A user-facing failure that is reported without a stack of context.
class CliFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> config_path;
};

struct SynthOptions {
  std::string preset = "transition";
  std::string spec_path;
  std::optional<size_t> count;
  std::optional<double> duration_s;
  std::string prefix;
};

struct FitOptions {
  std::vector<std::string> traces;
  std::string model_path;
};

struct EvalOptions {
  std::vector<std::string> traces;
  std::string model_path;
  bool power_only = false;
};

struct SimulateOptions {
  std::vector<double> b_max_s;
  std::vector<int> k_users;
  std::vector<std::string> policies;
  std::string model_path;
  bool fit_detector = false;
  std::optional<unsigned> threads;
};

// Resolved view of the global flags and the optional config file.
struct Context {
  std::optional<ExperimentConfig> config;
  std::string out_dir = "out";
  uint64_t seed = 1;
};

Context make_context(const GlobalOptions& g) {
  Context ctx;
  if (g.config_path) {
    ctx.config = load_experiment_config(*g.config_path);
    ctx.out_dir = ctx.config->out_dir;
    ctx.seed = ctx.config->seed;
  }
  if (g.out_dir) ctx.out_dir = *g.out_dir;
  if (g.seed) ctx.seed = *g.seed;
  return ctx;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliFailure("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw CliFailure("cannot write '" + path.string() + "'");
  return out;
}

std::vector<Trace> load_traces(const std::vector<std::string>& paths) {
  std::vector<Trace> traces;
  for (const auto& path : expand_trace_paths(paths)) {
    try {
      traces.push_back(read_trace_file(path));
    } catch (const TraceError& e) {
      throw CliFailure(path + ": " + e.what());
    }
  }
  if (traces.empty()) throw CliFailure("no trace files found");
  return traces;
}

size_t sample_count(std::span<const Trace> traces) {
  size_t n = 0;
  for (const auto& t : traces) n += t.samples.size();
  return n;
}

std::string default_model_path(const Context& ctx) {
  if (ctx.config && !ctx.config->detector_model.empty()) {
    return ctx.config->detector_model;
  }
  return (fs::path(ctx.out_dir) / "detector.model").string();
}

// ---------------------------------------------------------------------------

int cmd_synth(const Context& ctx, const SynthOptions& opt, std::ostream& out) {
  std::vector<Trace> traces;
  if (!opt.spec_path.empty()) {
    const SynthesisSpec spec = parse_synthesis_spec(read_text(opt.spec_path));
    const size_t count = opt.count.value_or(1);
    Rng seeds(ctx.seed);
    for (size_t i = 0; i < count; ++i) {
      SynthesisSpec s = spec;
      if (!opt.prefix.empty()) s.id = opt.prefix;
      if (count > 1) {
        char suffix[32];
        std::snprintf(suffix, sizeof(suffix), "_%03zu", i);
        s.id += suffix;
      }
      traces.push_back(synthesize_trace(s, seeds.next()));
    }
  } else if (opt.preset == "transition") {
    TransitionCorpusOptions options;
    if (opt.count) options.count = *opt.count;
    if (opt.duration_s) options.duration_s = *opt.duration_s;
    if (!opt.prefix.empty()) options.id_prefix = opt.prefix;
    traces = transition_corpus(options, ctx.seed);
  } else {
    throw CliFailure("unknown preset '" + opt.preset + "'");
  }
  for (const auto& trace : traces) {
    const fs::path path = fs::path(ctx.out_dir) / (trace.id + ".csv");
    auto file = open_output(path);
    write_trace(file, trace);
  }
  out << "wrote " << traces.size() << " trace(s) to " << ctx.out_dir << '\n';
  return kExitOk;
}

int cmd_fit(const Context& ctx, const FitOptions& opt, std::ostream& out) {
  std::vector<std::string> paths = opt.traces;
  if (paths.empty() && ctx.config) {
    paths = ctx.config->training_traces.empty() ? ctx.config->traces
                                                : ctx.config->training_traces;
  }
  if (paths.empty()) throw CliFailure("fit needs --traces or a config");
  const auto traces = load_traces(paths);
  const DetectorModel model = fit_detector(traces);
  const std::string model_path =
      opt.model_path.empty() ? default_model_path(ctx) : opt.model_path;
  {
    auto file = open_output(model_path);
    write_detector_model(file, model);
  }
  out << "fitted detector on " << traces.size() << " trace(s), "
      << sample_count(traces) << " samples -> " << model_path << '\n';
  return kExitOk;
}

int cmd_detect_eval(const Context& ctx, const EvalOptions& opt,
                    std::ostream& out) {
  std::vector<std::string> paths = opt.traces;
  if (paths.empty() && ctx.config) paths = ctx.config->traces;
  if (paths.empty()) throw CliFailure("detect-eval needs --traces or a config");
  const std::string model_path =
      opt.model_path.empty() ? default_model_path(ctx) : opt.model_path;
  const DetectorModel model = load_detector_model(model_path);
  const auto traces = load_traces(paths);
  const FusionMode mode =
      opt.power_only ? FusionMode::kPowerOnly : FusionMode::kFused;

  std::vector<CoverageState> predicted;
  std::vector<CoverageState> truth;
  for (const auto& trace : traces) {
    for (const auto& d : detect_series(model, trace, mode)) {
      predicted.push_back(d.state);
    }
    for (const auto& s : trace.samples) truth.push_back(s.truth);
  }
  const ConfusionMatrix cm = confusion_matrix(predicted, truth);

  constexpr CoverageState kStates[] = {CoverageState::kIndoor,
                                       CoverageState::kOutdoor};
  char line[128];
  out << (opt.power_only ? "power-only" : "fused") << " detector, "
      << cm.total() << " samples\n";
  out << "detected\\truth    indoor   outdoor\n";
  for (auto detected : kStates) {
    std::snprintf(line, sizeof(line), "%-14s %9.4f %9.4f\n",
                  std::string(to_string(detected)).c_str(),
                  cm.probability(detected, CoverageState::kIndoor),
                  cm.probability(detected, CoverageState::kOutdoor));
    out << line;
  }
  std::snprintf(line, sizeof(line), "accuracy %.4f\n", cm.accuracy());
  out << line;

  auto file = open_output(fs::path(ctx.out_dir) / "confusion.csv");
  file << "detected,truth,count,probability\n";
  for (auto detected : kStates) {
    for (auto t : kStates) {
      file << to_string(detected) << ',' << to_string(t) << ','
           << cm.count(detected, t) << ','
           << text::format_double(cm.probability(detected, t)) << '\n';
    }
  }
  file << "all,all," << cm.total() << ','
       << text::format_double(cm.accuracy()) << '\n';
  return kExitOk;
}

std::string log_file_name(const SessionTag& tag) {
  return tag.trace_id + "__" + tag.policy + "__k" +
         std::to_string(tag.k_users) + "__b" +
         text::format_double(tag.b_max_s) + ".csv";
}

int cmd_simulate(Context ctx, const GlobalOptions& global,
                 const SimulateOptions& opt, std::ostream& out) {
  if (!ctx.config) throw CliFailure("simulate needs --config");
  ExperimentConfig& c = *ctx.config;
  if (global.out_dir) c.out_dir = *global.out_dir;
  if (global.seed) c.seed = *global.seed;
  if (!opt.b_max_s.empty()) c.b_max_s = opt.b_max_s;
  if (!opt.k_users.empty()) c.k_users = opt.k_users;
  if (!opt.policies.empty()) c.policies = opt.policies;
  if (!opt.model_path.empty()) {
    c.detector_model = opt.model_path;
    c.fit_detector = false;
  }
  if (opt.fit_detector) c.fit_detector = true;
  if (opt.threads) c.threads = *opt.threads;
  validate_experiment_config(c);

  const auto traces = load_traces(c.traces);
  const auto variants = c.policy_variants();
  std::optional<DetectorModel> model;
  if (c.needs_detector()) {
    if (c.fit_detector) {
      const auto training = c.training_traces.empty()
                                ? traces
                                : load_traces(c.training_traces);
      model = fit_detector(training);
      auto file = open_output(fs::path(c.out_dir) / "detector.model");
      write_detector_model(file, *model);
    } else {
      model = load_detector_model(c.detector_model);
    }
  }

  const auto logs =
      run_experiment(traces, {c.k_users, c.b_max_s}, variants,
                     c.base_session(), model ? &*model : nullptr, c.threads);

  const fs::path out_dir(c.out_dir);
  std::vector<QoeReport> reports;
  reports.reserve(logs.size());
  for (const auto& log : logs) {
    auto file = open_output(out_dir / "logs" / log_file_name(log.tag));
    write_session_log(file, log);
    reports.push_back(qoe_from_log(log));
  }
  {
    auto file = open_output(out_dir / "qoe.csv");
    write_report_csv(file, reports);
  }
  const auto rows = aggregate(reports);
  {
    auto file = open_output(out_dir / "aggregate.csv");
    write_aggregate_csv(file, rows);
  }

  out << logs.size() << " session(s) over " << traces.size()
      << " trace(s) -> " << c.out_dir << '\n';
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %3s %6s %22s %20s %20s\n",
                "policy", "k", "bmax", "bitrate kbps (ci95)",
                "rebuf /s (ci95)", "adapt /s (ci95)");
  out << line;
  for (size_t i = 0; i + 2 < rows.size(); i += 3) {
    const auto& g = rows[i].group;
    std::snprintf(line, sizeof(line),
                  "%-16s %3d %6s %12.1f (%7.1f) %10.5f (%7.5f) %10.5f "
                  "(%7.5f)\n",
                  g.policy.c_str(), g.k_users,
                  text::format_double(g.b_max_s).c_str(),
                  rows[i].stat.mean / 1e3,
                  rows[i].stat.ci95_halfwidth / 1e3, rows[i + 1].stat.mean,
                  rows[i + 1].stat.ci95_halfwidth, rows[i + 2].stat.mean,
                  rows[i + 2].stat.ci95_halfwidth);
    out << line;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Indoor/outdoor aware adaptive streaming simulator", "iobba"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed (default 1)");
  app.add_option("--out-dir", global.out_dir, "Output directory");
  app.add_option("--config", global.config_path, "Experiment config (JSON)");

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic traces");
  synth_cmd->add_option("--preset", synth.preset,
                        "Built-in corpus: transition")
      ->capture_default_str();
  synth_cmd->add_option("--spec", synth.spec_path,
                        "Synthesis spec (JSON); overrides --preset");
  synth_cmd->add_option("--count", synth.count, "Number of traces");
  synth_cmd->add_option("--duration", synth.duration_s,
                        "Trace length in seconds (preset only)");
  synth_cmd->add_option("--prefix", synth.prefix, "Trace id prefix");

  FitOptions fit;
  auto* fit_cmd =
      app.add_subcommand("fit", "Fit the indoor/outdoor detector");
  fit_cmd->add_option("--traces", fit.traces, "Trace files or directories");
  fit_cmd->add_option("--model", fit.model_path,
                      "Output model (default <out-dir>/detector.model)");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand(
      "detect-eval", "Confusion matrix of a detector on labeled traces");
  eval_cmd->add_option("--traces", eval.traces, "Trace files or directories");
  eval_cmd->add_option("--model", eval.model_path,
                       "Detector model (default <out-dir>/detector.model)");
  eval_cmd->add_flag("--power-only", eval.power_only,
                     "Classify on received power alone");

  SimulateOptions sim;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Run the streaming experiment grid");
  sim_cmd->add_option("--bmax", sim.b_max_s, "Buffer sizes in seconds")
      ->delimiter(',');
  sim_cmd->add_option("--k", sim.k_users, "Users sharing the cell")
      ->delimiter(',');
  sim_cmd->add_option("--policies", sim.policies,
                      "baseline, iobba-true, iobba-detected")
      ->delimiter(',');
  sim_cmd->add_option("--model", sim.model_path, "Detector model");
  sim_cmd->add_flag("--fit-detector", sim.fit_detector,
                    "Fit the detector from the training traces");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = auto)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const Context ctx = make_context(global);
    if (*synth_cmd) return cmd_synth(ctx, synth, out);
    if (*fit_cmd) return cmd_fit(ctx, fit, out);
    if (*eval_cmd) return cmd_detect_eval(ctx, eval, out);
    if (*sim_cmd) return cmd_simulate(ctx, global, sim, out);
  } catch (const ConfigError& e) {
    err << "error: config " << e.what() << '\n';
    return kExitUsage;
  } catch (const DetectorError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace iobba
