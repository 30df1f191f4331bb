// Copyright 2026 The nmrpulse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nmrpulse/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmrpulse/config.hpp"
#include "nmrpulse/errors.hpp"
#include "nmrpulse/io.hpp"
#include "nmrpulse/parallel.hpp"
#include "nmrpulse/pipeline.hpp"

namespace nmrpulse::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct LoadedModel {
  io::Checkpoint checkpoint;
  std::string hash;
};

LoadedModel load_model(const std::string& path) {
  const std::string text = io::read_file(path);
  return {io::parse_checkpoint(text), config::fnv1a_hex(text)};
}

config::RunConfig load_config_or_defaults(const std::string& path) {
  if (path.empty()) {
    config::RunConfig cfg;
    cfg.validate();
    return cfg;
  }
  return config::load_run_config(path);
}

fs::path sibling(const fs::path& base, const std::string& suffix_and_ext) {
  fs::path out = base;
  out.replace_filename(base.stem().string() + suffix_and_ext);
  return out;
}

void require_workers(int workers) {
  if (workers < 1) throw ConfigError("--workers must be at least 1");
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config;
  std::string stage = "nominal";
  std::uint64_t seed = 0;
  std::string init;
  std::string out;
  std::string curve;
  int workers = 0;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  require_workers(a.workers);
  const auto stage = pipeline::stage_from_string(a.stage);
  if (stage == pipeline::Stage::kRobust && a.init.empty()) {
    throw ConfigError("robust stage requires --init <checkpoint>");
  }
  const config::RunConfig run = config::load_run_config(a.config);
  const auto cfg = pipeline::TrainConfig::from_run(run, stage, a.seed, a.workers);

  pipeline::TrainResult result;
  if (stage == pipeline::Stage::kNominal) {
    result = pipeline::train_nominal(cfg);
  } else {
    result = pipeline::train_robust(cfg, load_model(a.init).checkpoint.params);
  }

  const fs::path ck_path = a.out.empty() ? fs::path(a.stage + ".json") : fs::path(a.out);
  const fs::path curve_path = a.curve.empty() ? sibling(ck_path, "_curve.csv") : fs::path(a.curve);
  io::Checkpoint ck;
  ck.params = result.params;
  ck.optimizer = result.optimizer;
  ck.seed = a.seed;
  ck.stage = a.stage;
  ck.config_hash = config::config_hash(run);
  io::write_file(ck_path, io::serialize_checkpoint(ck));
  io::write_file(curve_path, io::curve_csv(result.curve));

  out << "stage " << a.stage << ", " << cfg.epochs << " epochs\n";
  if (!result.curve.empty()) {
    out << "final objective " << io::format_double(result.curve.back().objective) << "\n";
  }
  if (result.best_epoch > 0) {
    out << "best validation fidelity " << io::format_double(result.best_validation_fidelity)
        << " at epoch " << result.best_epoch << "\n";
  }
  out << "wrote " << ck_path.string() << " and " << curve_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- compile

struct CompileArgs {
  double gamma_deg = 0.0;
  double theta_deg = 0.0;
  double alpha_deg = 0.0;
  std::string model;
  std::string config;
  std::string out = "pulse.json";
};

int cmd_compile(const CompileArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  const auto run = load_config_or_defaults(a.config);
  const auto plant = pipeline::Plant::from_config(run.system);
  const auto gate = physics::GateSpec::from_degrees(a.gamma_deg, a.theta_deg, a.alpha_deg);
  const auto compiled = pipeline::compile_gate(model.checkpoint.params, gate, plant);
  const auto pf = io::make_pulse_file(a.gamma_deg, a.theta_deg, a.alpha_deg, compiled, model.hash,
                                      model.checkpoint.seed);
  const fs::path json_path(a.out);
  const fs::path csv_path = sibling(json_path, ".csv");
  io::write_file(json_path, io::serialize_pulse_file(pf));
  io::write_file(csv_path, io::pulse_csv(pf));
  out << "nominal fidelity " << io::format_double(compiled.fidelity) << "\n";
  out << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string model;
  std::string config;
  double mesh_deg = 9.0;
  double degmax_deg = 0.0;
  std::string out = "eval";
  int workers = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  require_workers(a.workers);
  const auto model = load_model(a.model);
  const auto run = load_config_or_defaults(a.config);
  const double degmax = a.degmax_deg > 0.0 ? a.degmax_deg : run.network.degmax_deg;
  const auto plant = pipeline::Plant::from_config(run.system);
  auto report = pipeline::eval_grid(model.checkpoint.params, plant, a.mesh_deg, degmax, a.workers);
  report.config_hash = config::config_hash(run);
  report.seed = model.checkpoint.seed;
  const fs::path csv_path = a.out + ".csv";
  const fs::path json_path = a.out + ".json";
  io::write_file(csv_path, io::eval_csv(report));
  io::write_file(json_path, io::eval_summary_json(report, a.mesh_deg, degmax, model.hash));
  out << report.gates.size() << " gates: mean " << io::format_double(report.summary.mean)
      << " median " << io::format_double(report.summary.median) << " min "
      << io::format_double(report.summary.min) << " max "
      << io::format_double(report.summary.max) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::vector<std::string> channels;
  std::string grid;
  std::vector<std::string> models;
  std::string config;
  std::uint64_t seed = 0;
  std::string out = "sweep.csv";
  int workers = 0;
};

std::vector<std::string> split_commas(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream in(item);
    std::string part;
    while (std::getline(in, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  require_workers(a.workers);
  const auto run = load_config_or_defaults(a.config);

  std::vector<uncertainty::SweepChannel> channels;
  for (const auto& name : split_commas(a.channels)) {
    channels.push_back(uncertainty::channel_from_string(name));
  }
  if (channels.empty()) throw ConfigError("--channel is required");
  const std::vector<double> user_grid = parse_grid(a.grid);

  std::vector<pipeline::NamedModel> models;
  std::vector<std::string> names;
  nlohmann::json model_hashes = nlohmann::json::object();
  for (const auto& pair : split_commas(a.models)) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) {
      throw ConfigError("model spec '" + pair + "' must be name=path");
    }
    const std::string name = pair.substr(0, eq);
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw ConfigError("duplicate model name '" + name + "'");
    }
    auto model = load_model(pair.substr(eq + 1));
    model_hashes[name] = model.hash;
    names.push_back(name);
    models.push_back({name, std::move(model.checkpoint.params)});
  }
  if (models.empty()) throw ConfigError("--models needs at least one name=path pair");

  auto plant = pipeline::Plant::from_config(run.system);
  plant.params.coupling_model = run.sweep.coupling_model;
  pipeline::SweepStudyOptions opts;
  opts.gate_set_size = run.sweep.gate_set_size;
  opts.degmax_deg = run.sweep.degmax_deg;
  opts.repeats = run.sweep.repeats;
  opts.seed = a.seed;
  opts.workers = a.workers;

  std::vector<pipeline::SweepRow> rows;
  for (const auto channel : channels) {
    std::vector<double> grid = user_grid;
    if (uncertainty::is_angular(channel)) {
      for (double& v : grid) v *= kDeg;
    }
    const uncertainty::SweepChannel one[] = {channel};
    auto part = pipeline::sweep_study(models, one, grid, plant, opts);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  // Reorder to channel-major so each table block holds every model.
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    return static_cast<int>(x.channel) < static_cast<int>(y.channel);
  });

  const fs::path csv_path(a.out);
  const fs::path json_path = sibling(csv_path, ".json");
  io::write_file(csv_path, io::sweep_csv(rows, names));
  nlohmann::json meta;
  meta["config_hash"] = config::config_hash(run);
  meta["seed"] = a.seed;
  meta["revision"] = pipeline::kRevision;
  meta["models"] = model_hashes;
  meta["gate_set_size"] = opts.gate_set_size;
  meta["repeats"] = opts.repeats;
  meta["coupling_model"] = physics::to_string(plant.params.coupling_model);
  io::write_file(json_path, meta.dump(2) + "\n");
  out << "wrote " << csv_path.string() << " (" << rows.size() << " model/value rows)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- inspect

int cmd_inspect(const std::string& path, std::ostream& out) {
  const std::string text = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + " is not JSON: " + e.what());
  }
  if (j.is_object() && j.contains("layer_dims")) {
    const auto ck = io::parse_checkpoint(text);
    out << "checkpoint " << path << "\n";
    out << "  schema_version " << ck.schema_version << "\n";
    out << "  stage " << ck.stage << "\n";
    out << "  seed " << ck.seed << "\n";
    out << "  layer_dims";
    for (auto d : ck.params.layer_dims) out << " " << d;
    out << "\n  parameters " << ck.params.parameter_count() << "\n";
    out << "  optimizer_step " << (ck.optimizer ? ck.optimizer->step : 0) << "\n";
    out << "  config_hash " << ck.config_hash << "\n";
    out << "  model_hash " << config::fnv1a_hex(text) << "\n";
    return kExitOk;
  }
  if (j.is_object() && j.contains("phases_rad")) {
    const auto pf = io::parse_pulse_file(text);
    out << "pulse " << path << "\n";
    out << "  gate_deg " << io::format_double(pf.gamma_deg) << " " << io::format_double(pf.theta_deg)
        << " " << io::format_double(pf.alpha_deg) << "\n";
    out << "  t_slices " << pf.t_slices << "\n";
    out << "  dt_ms " << io::format_double(pf.dt_ms) << "\n";
    out << "  amplitude_khz " << io::format_double(pf.amplitude_khz) << "\n";
    out << "  nominal_fidelity " << io::format_double(pf.nominal_fidelity) << "\n";
    out << "  model_hash " << pf.model_hash << "\n";
    out << "  seed " << pf.seed << "\n";
    return kExitOk;
  }
  throw IoError(path + " is neither a checkpoint nor a pulse file");
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  double start = 0.0;
  double stop = 0.0;
  long long count = 0;
  char c1 = 0;
  char c2 = 0;
  std::istringstream in(spec);
  in.imbue(std::locale::classic());
  if (!(in >> start >> c1 >> stop >> c2 >> count) || c1 != ':' || c2 != ':' ||
      !(in >> std::ws).eof()) {
    throw ConfigError("grid '" + spec + "' must look like start:stop:count");
  }
  if (count < 1 || !std::isfinite(start) || !std::isfinite(stop)) {
    throw ConfigError("grid count must be positive and bounds finite");
  }
  if (count == 1) {
    if (start != stop) throw ConfigError("a one-point grid needs start == stop");
    return {start};
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (long long i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = start + step * static_cast<double>(i);
  grid.back() = stop;
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pulse compiler and robustness analyzer for a three-spin NMR register"};
  app.name("nmrpulse");
  app.require_subcommand(1);

  const int default_workers = nmrpulse::default_workers();

  TrainArgs train;
  train.workers = default_workers;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint + curve");
  train_cmd->add_option("--config", train.config, "Run config JSON")->required();
  train_cmd->add_option("--stage", train.stage, "nominal | robust");
  train_cmd->add_option("--seed", train.seed, "Master seed")->required();
  train_cmd->add_option("--init", train.init, "Starting checkpoint (robust stage)");
  train_cmd->add_option("--out", train.out, "Checkpoint path (default <stage>.json)");
  train_cmd->add_option("--curve", train.curve, "Curve CSV path (default <out>_curve.csv)");
  train_cmd->add_option("--workers", train.workers, "Worker threads");

  CompileArgs compile;
  auto* compile_cmd = app.add_subcommand("compile", "Compile one gate to a pulse file");
  compile_cmd->add_option("gamma", compile.gamma_deg, "Rotation angle (deg)")->required();
  compile_cmd->add_option("theta", compile.theta_deg, "Axis polar angle (deg)")->required();
  compile_cmd->add_option("alpha", compile.alpha_deg, "Axis azimuth (deg)")->required();
  compile_cmd->add_option("--model", compile.model, "Checkpoint")->required();
  compile_cmd->add_option("--config", compile.config, "Run config JSON");
  compile_cmd->add_option("--out", compile.out, "Pulse JSON path; CSV goes alongside");

  EvalArgs eval;
  eval.workers = default_workers;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate fidelity on a gate mesh");
  eval_cmd->add_option("--model", eval.model, "Checkpoint")->required();
  eval_cmd->add_option("--config", eval.config, "Run config JSON");
  eval_cmd->add_option("--mesh-deg", eval.mesh_deg, "Mesh spacing (deg)");
  eval_cmd->add_option("--degmax-deg", eval.degmax_deg, "Mesh extent (deg)");
  eval_cmd->add_option("--out", eval.out, "Output prefix for .csv and .json");
  eval_cmd->add_option("--workers", eval.workers, "Worker threads");

  SweepArgs sweep;
  sweep.workers = default_workers;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one perturbation channel across models");
  sweep_cmd->add_option("--channel", sweep.channels, "Channel name(s)")->required();
  sweep_cmd->add_option("--grid", sweep.grid, "start:stop:count (angles in deg)")->required();
  sweep_cmd->add_option("--models,--model", sweep.models, "name=path[,name=path...]")->required();
  sweep_cmd->add_option("--config", sweep.config, "Run config JSON");
  sweep_cmd->add_option("--seed", sweep.seed, "Seed for the gate set and jitter")->required();
  sweep_cmd->add_option("--out", sweep.out, "Comparison CSV path");
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print checkpoint or pulse metadata");
  inspect_cmd->add_option("path", inspect_path, "File to inspect")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*compile_cmd) return cmd_compile(compile, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*inspect_cmd) return cmd_inspect(inspect_path, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace nmrpulse::cli
