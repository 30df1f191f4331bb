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

// Training, evaluation and sweep workflows.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nmrpulse/config.hpp"
#include "nmrpulse/neuralnet.hpp"
#include "nmrpulse/physics.hpp"
#include "nmrpulse/risk.hpp"
#include "nmrpulse/rng.hpp"
#include "nmrpulse/uncertainty.hpp"

namespace nmrpulse::pipeline {

inline constexpr const char* kRevision = "nmrpulse-0.1.0";

enum class Stage { kNominal, kRobust };
std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);

/// Nominal hardware: drift parameters plus the constant drive settings.
struct Plant {
  physics::SystemParams params = physics::SystemParams::nmr_defaults();
  double amplitude_khz = physics::kDefaultAmplitudeKhz;
  double dt_ms = physics::kDefaultDtMs;
  std::size_t t_slices = physics::kDefaultSlices;

  static Plant from_config(const config::SystemConfig& s);
  physics::PulseSequence pulse(std::vector<double> phases) const;
};

struct TrainConfig {
  Stage stage = Stage::kNominal;
  std::uint64_t seed = 0;
  Plant plant;
  std::size_t width = 256;
  std::size_t hidden_layers = 5;
  double dropout = 0.5;
  std::size_t n_gates = 512;
  std::size_t batch_size = 512;
  std::size_t epochs = 500;
  double lr = 5e-4;
  double weight_decay = 1e-3;
  double degmax_deg = 90.0;
  std::size_t scenarios_per_example = 1;
  risk::RiskConfig risk;
  uncertainty::NoiseConfig noise;
  std::size_t validation_gates = 64;
  std::size_t validate_every = 0;
  int workers = 1;

  std::vector<std::size_t> layer_dims() const;
  /// Throws ConfigError.
  void validate() const;
  /// Stage-specific view of a run config. The robust stage swaps in the
  /// robust optimizer settings and coupling model.
  static TrainConfig from_run(const config::RunConfig& run, Stage stage, std::uint64_t seed,
                              int workers);
};

struct EpochRecord {
  std::size_t epoch = 0;
  /// Mean over mini-batches of the optimized objective.
  double objective = 0.0;
  /// Mean over all evaluated (example, scenario) losses.
  double mean_loss = 0.0;
  /// Mean nominal fidelity on the validation gates, NaN when not evaluated.
  double validation_fidelity = 0.0;
};

struct TrainResult {
  nn::MlpParams params;
  nn::AdamWState optimizer;
  std::vector<EpochRecord> curve;
  /// Best logged validation epoch (1-based), 0 when none was logged.
  std::size_t best_epoch = 0;
  double best_validation_fidelity = 0.0;
};

/// Called after every optimizer step with the 1-based step count.
using StepCallback = std::function<void(std::size_t, const nn::MlpParams&)>;

/// γ, θ, α independent uniform on [0, degmax]; gate i reads child(i).
std::vector<physics::GateSpec> sample_gates(std::size_t n, double degmax_deg,
                                            const rng::RngStream& rng);

TrainResult train_nominal(const TrainConfig& cfg, const StepCallback& on_step = {});
TrainResult train_robust(const TrainConfig& cfg, const nn::MlpParams& init,
                         const StepCallback& on_step = {});

struct CompiledGate {
  physics::PulseSequence pulse;
  double fidelity = 0.0;
};

CompiledGate compile_gate(const nn::MlpParams& params, const physics::GateSpec& g,
                          const Plant& plant);

/// Inference-mode nominal fidelity of every gate, in gate order.
std::vector<double> evaluate_gates(const nn::MlpParams& params, const Plant& plant,
                                   std::span<const physics::GateSpec> gates, int workers);

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Throws EmptyInput.
Summary summarize(std::span<const double> values);

struct EvalReport {
  std::vector<physics::GateSpec> gates;
  std::vector<double> fidelities;
  Summary summary;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string revision = kRevision;
};

/// Every point of the (γ, θ, α) mesh on [0, degmax]³, both ends included,
/// γ outermost. Throws ConfigError unless mesh_deg divides degmax_deg.
std::vector<physics::GateSpec> mesh_gates(double mesh_deg, double degmax_deg);
EvalReport eval_grid(const nn::MlpParams& params, const Plant& plant, double mesh_deg,
                     double degmax_deg, int workers);

struct NamedModel {
  std::string name;
  nn::MlpParams params;
};

struct SweepRow {
  std::string model;
  uncertainty::SweepChannel channel;
  /// Internal units (radians for angular channels).
  double value = 0.0;
  Summary summary;
};

struct SweepStudyOptions {
  std::size_t gate_set_size = 128;
  double degmax_deg = 90.0;
  int repeats = 16;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// The fixed gate set shared by all models in a sweep study.
std::vector<physics::GateSpec> sweep_gate_set(const SweepStudyOptions& opts);

/// Rows ordered model, channel, value.
std::vector<SweepRow> sweep_study(std::span<const NamedModel> models,
                                  std::span<const uncertainty::SweepChannel> channels,
                                  std::span<const double> grid, const Plant& plant,
                                  const SweepStudyOptions& opts);

}  // namespace nmrpulse::pipeline
