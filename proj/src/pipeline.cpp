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

#include "nmrpulse/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "nmrpulse/adjoint.hpp"
#include "nmrpulse/errors.hpp"
#include "nmrpulse/parallel.hpp"

namespace nmrpulse::pipeline {

using physics::GateSpec;
using physics::PulseSequence;
using rng::Domain;
using rng::RngStream;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
// Examples back-propagated per reduction round; bounds peak gradient memory.
constexpr std::size_t kBackwardChunk = 32;

std::uint64_t domain(Domain d) { return static_cast<std::uint64_t>(d); }

std::vector<std::size_t> shuffled(std::size_t n, const RngStream& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i-- > 1;) {
    const auto j = static_cast<std::size_t>(rng.uniform(i) * static_cast<double>(i + 1));
    std::swap(perm[i], perm[std::min(j, i)]);
  }
  return perm;
}

std::vector<physics::ComplexMatrix> lifted_targets(std::span<const GateSpec> gates, int n_qubits) {
  std::vector<physics::ComplexMatrix> out;
  out.reserve(gates.size());
  for (const auto& g : gates) out.push_back(physics::lift_target(physics::target_su2(g), n_qubits));
  return out;
}

std::vector<double> infer_phases(const nn::MlpParams& params, const GateSpec& g) {
  const auto x = nn::encode_features(g);
  return nn::mlp_forward(params, x).outputs;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Per-example state carried from the loss pass to the backward pass.
struct ExampleWork {
  nn::ForwardCache cache;
  std::vector<double> phases;
  std::vector<double> losses;
  std::vector<std::vector<double>> phase_grads;
};

TrainResult run_training(const TrainConfig& cfg, nn::MlpParams params,
                         const StepCallback& on_step) {
  const bool robust = cfg.stage == Stage::kRobust;
  const auto dims = cfg.layer_dims();
  const std::size_t scenarios = robust ? cfg.scenarios_per_example : 1;
  const std::size_t t_slices = cfg.plant.t_slices;

  const auto gates = sample_gates(cfg.n_gates, cfg.degmax_deg, RngStream(cfg.seed, domain(Domain::kGates)));
  const auto targets = lifted_targets(gates, cfg.plant.params.n_qubits);
  std::vector<std::array<double, nn::kFeatureDim>> features;
  for (const auto& g : gates) features.push_back(nn::encode_features(g));

  std::vector<GateSpec> validation;
  if (cfg.validate_every > 0 && cfg.validation_gates > 0) {
    validation = sample_gates(cfg.validation_gates, cfg.degmax_deg,
                              RngStream(cfg.seed, domain(Domain::kValidationGates)));
  }

  TrainResult out;
  out.optimizer = nn::AdamWState::create(params, cfg.lr, cfg.weight_decay);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = shuffled(cfg.n_gates, RngStream(cfg.seed, domain(Domain::kShuffle), epoch));
    double objective_sum = 0.0;
    double loss_sum = 0.0;
    std::size_t n_batches = 0;

    for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
      const std::size_t nb = std::min(cfg.batch_size, perm.size() - start);
      std::vector<ExampleWork> work(nb);

      parallel_for(nb, cfg.workers, [&](std::size_t i) {
        const std::size_t g = perm[start + i];
        std::optional<nn::DropoutMask> mask;
        if (cfg.dropout > 0.0) {
          mask = nn::DropoutMask::sample(dims, cfg.dropout,
                                         RngStream(cfg.seed, domain(Domain::kDropout), epoch, g));
        }
        auto fwd = nn::mlp_forward(params, features[g], mask ? &*mask : nullptr);
        ExampleWork& w = work[i];
        w.cache = std::move(fwd.cache);
        w.phases = fwd.outputs;
        const PulseSequence pulse = cfg.plant.pulse(std::move(fwd.outputs));
        if (!robust) {
          auto pg = adjoint::loss_and_phase_gradient(cfg.plant.params, pulse, targets[g]);
          w.losses.push_back(pg.loss);
          w.phase_grads.push_back(std::move(pg.grad));
          return;
        }
        const RngStream scen(cfg.seed, domain(Domain::kScenario), epoch, g);
        for (std::size_t s = 0; s < scenarios; ++s) {
          const auto sc = uncertainty::sample_scenario(cfg.noise, t_slices, scen.child(s));
          auto pg = adjoint::loss_and_phase_gradient_scenario(cfg.plant.params, pulse, targets[g], sc);
          w.losses.push_back(pg.loss);
          w.phase_grads.push_back(std::move(pg.grad));
        }
      });

      std::vector<double> losses;
      losses.reserve(nb * scenarios);
      for (const auto& w : work) losses.insert(losses.end(), w.losses.begin(), w.losses.end());
      const risk::LossBatch batch(nb, scenarios, losses);

      std::vector<double> weights;
      double objective = 0.0;
      if (robust) {
        weights = risk::aggregate_gradient(batch, cfg.risk);
        std::vector<std::vector<double>> phases;
        for (const auto& w : work) phases.push_back(w.phases);
        objective = risk::objective(batch, phases, cfg.risk);
      } else {
        weights.assign(nb, 1.0 / static_cast<double>(nb));
        objective = mean_of(losses);
      }
      const double reg_scale = 1.0 / static_cast<double>(nb);

      nn::MlpGradients total = nn::MlpParams::zeros(dims);
      for (std::size_t c = 0; c < nb; c += kBackwardChunk) {
        const std::size_t m = std::min(kBackwardChunk, nb - c);
        std::vector<nn::MlpGradients> slots(m);
        parallel_for(m, cfg.workers, [&](std::size_t j) {
          const std::size_t i = c + j;
          const ExampleWork& w = work[i];
          std::vector<double> grad_out(t_slices, 0.0);
          for (std::size_t s = 0; s < scenarios; ++s) {
            const double wt = weights[i * scenarios + s];
            if (wt == 0.0) continue;
            for (std::size_t t = 0; t < t_slices; ++t) grad_out[t] += wt * w.phase_grads[s][t];
          }
          if (robust && cfg.risk.lambda_tv != 0.0) {
            const auto tv = risk::tv_penalty_gradient(w.phases);
            for (std::size_t t = 0; t < t_slices; ++t) grad_out[t] += cfg.risk.lambda_tv * reg_scale * tv[t];
          }
          if (robust && cfg.risk.lambda_spec != 0.0) {
            const auto sp = risk::spectral_penalty_gradient(w.phases, cfg.risk.spec_cutoff_fraction);
            for (std::size_t t = 0; t < t_slices; ++t) grad_out[t] += cfg.risk.lambda_spec * reg_scale * sp[t];
          }
          slots[j] = nn::mlp_backward(params, w.cache, grad_out);
        });
        for (const auto& g : slots) nn::accumulate(total, g);
      }

      nn::adamw_step(params, total, out.optimizer);
      ++step;
      if (on_step) on_step(step, params);

      objective_sum += objective;
      loss_sum += std::accumulate(losses.begin(), losses.end(), 0.0);
      ++n_batches;
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.objective = objective_sum / static_cast<double>(n_batches);
    rec.mean_loss = loss_sum / static_cast<double>(cfg.n_gates * scenarios);
    rec.validation_fidelity = std::numeric_limits<double>::quiet_NaN();
    if (!validation.empty() && (rec.epoch % cfg.validate_every == 0 || rec.epoch == cfg.epochs)) {
      const auto f = evaluate_gates(params, cfg.plant, validation, cfg.workers);
      rec.validation_fidelity = mean_of(f);
      if (out.best_epoch == 0 || rec.validation_fidelity > out.best_validation_fidelity) {
        out.best_epoch = rec.epoch;
        out.best_validation_fidelity = rec.validation_fidelity;
      }
    }
    out.curve.push_back(rec);
  }
  out.params = std::move(params);
  return out;
}

}  // namespace

std::string to_string(Stage stage) { return stage == Stage::kNominal ? "nominal" : "robust"; }

Stage stage_from_string(const std::string& name) {
  if (name == "nominal") return Stage::kNominal;
  if (name == "robust") return Stage::kRobust;
  throw ConfigError("unknown stage '" + name + "' (expected nominal|robust)");
}

Plant Plant::from_config(const config::SystemConfig& s) {
  Plant p;
  p.params = s.params;
  p.amplitude_khz = s.amplitude_khz;
  p.dt_ms = s.dt_ms;
  p.t_slices = s.t_slices;
  return p;
}

PulseSequence Plant::pulse(std::vector<double> phases) const {
  PulseSequence seq;
  seq.phases = std::move(phases);
  seq.amplitude = amplitude_khz;
  seq.dt = dt_ms;
  return seq;
}

std::vector<std::size_t> TrainConfig::layer_dims() const {
  return nn::make_layer_dims(plant.t_slices, width, hidden_layers);
}

void TrainConfig::validate() const {
  plant.params.validate();
  if (!(plant.amplitude_khz > 0.0) || !(plant.dt_ms > 0.0) || plant.t_slices < 2) {
    throw ConfigError("plant needs positive amplitude, dt and at least two slices");
  }
  if (width == 0 || hidden_layers == 0) throw ConfigError("network dims must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (n_gates == 0 || batch_size == 0) throw ConfigError("n_gates and batch_size must be positive");
  if (!(lr > 0.0) || !(weight_decay >= 0.0)) throw ConfigError("optimizer rates out of range");
  if (!(degmax_deg > 0.0 && degmax_deg <= 180.0)) throw ConfigError("degmax must lie in (0, 180]");
  if (stage == Stage::kRobust) {
    if (scenarios_per_example == 0) throw ConfigError("scenarios_per_example must be positive");
    risk.validate();
    noise.validate();
  }
}

TrainConfig TrainConfig::from_run(const config::RunConfig& run, Stage stage, std::uint64_t seed,
                                  int workers) {
  TrainConfig c;
  c.stage = stage;
  c.seed = seed;
  c.workers = workers;
  c.plant = Plant::from_config(run.system);
  c.width = run.network.width;
  c.hidden_layers = run.network.hidden_layers;
  c.dropout = run.network.dropout;
  c.n_gates = run.network.n_gates;
  c.degmax_deg = run.network.degmax_deg;
  c.validation_gates = run.network.validation_gates;
  c.validate_every = run.network.validate_every;
  c.noise = run.noise;
  c.risk = run.robust.risk;
  if (stage == Stage::kNominal) {
    c.batch_size = run.network.batch_size;
    c.epochs = run.network.epochs;
    c.lr = run.network.lr;
    c.weight_decay = run.network.weight_decay;
    c.scenarios_per_example = 1;
  } else {
    c.plant.params.coupling_model = run.robust.coupling_model;
    c.batch_size = run.robust.batch_size;
    c.epochs = run.robust.epochs;
    c.lr = run.robust.lr;
    c.weight_decay = run.robust.weight_decay;
    c.scenarios_per_example = run.robust.scenarios_per_example;
  }
  return c;
}

std::vector<GateSpec> sample_gates(std::size_t n, double degmax_deg, const RngStream& rng) {
  const double span = degmax_deg * kDeg;
  std::vector<GateSpec> gates(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = rng.child(i);
    gates[i] = {s.uniform(0) * span, s.uniform(1) * span, s.uniform(2) * span};
  }
  return gates;
}

TrainResult train_nominal(const TrainConfig& cfg, const StepCallback& on_step) {
  if (cfg.stage != Stage::kNominal) throw ConfigError("train_nominal needs stage nominal");
  cfg.validate();
  return run_training(cfg, nn::init_params(cfg.seed, cfg.layer_dims()), on_step);
}

TrainResult train_robust(const TrainConfig& cfg, const nn::MlpParams& init,
                         const StepCallback& on_step) {
  if (cfg.stage != Stage::kRobust) throw ConfigError("train_robust needs stage robust");
  cfg.validate();
  init.validate();
  if (init.layer_dims != cfg.layer_dims()) {
    throw ConfigError("initial checkpoint layer dims do not match the configured network");
  }
  return run_training(cfg, init, on_step);
}

CompiledGate compile_gate(const nn::MlpParams& params, const GateSpec& g, const Plant& plant) {
  CompiledGate out;
  out.pulse = plant.pulse(infer_phases(params, g));
  if (out.pulse.t_slices() != plant.t_slices) {
    throw ConfigError("model output length does not match the plant slice count");
  }
  const auto target = physics::lift_target(physics::target_su2(g), plant.params.n_qubits);
  out.fidelity = physics::fidelity(target, physics::propagate(plant.params, out.pulse));
  return out;
}

std::vector<double> evaluate_gates(const nn::MlpParams& params, const Plant& plant,
                                   std::span<const GateSpec> gates, int workers) {
  std::vector<double> f(gates.size());
  parallel_for(gates.size(), workers,
               [&](std::size_t i) { f[i] = compile_gate(params, gates[i], plant).fidelity; });
  return f;
}

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw EmptyInput("summarize: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  Summary s;
  s.mean = mean_of(values);
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

std::vector<GateSpec> mesh_gates(double mesh_deg, double degmax_deg) {
  if (!(mesh_deg > 0.0) || !(degmax_deg > 0.0)) throw ConfigError("mesh and degmax must be positive");
  const double ratio = degmax_deg / mesh_deg;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("mesh spacing must divide degmax");
  }
  const auto n = static_cast<std::size_t>(steps);
  std::vector<double> axis(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    axis[i] = degmax_deg * static_cast<double>(i) / static_cast<double>(n) * kDeg;
  }
  std::vector<GateSpec> gates;
  gates.reserve(axis.size() * axis.size() * axis.size());
  for (double gamma : axis) {
    for (double theta : axis) {
      for (double alpha : axis) gates.push_back({gamma, theta, alpha});
    }
  }
  return gates;
}

EvalReport eval_grid(const nn::MlpParams& params, const Plant& plant, double mesh_deg,
                     double degmax_deg, int workers) {
  EvalReport r;
  r.gates = mesh_gates(mesh_deg, degmax_deg);
  r.fidelities = evaluate_gates(params, plant, r.gates, workers);
  r.summary = summarize(r.fidelities);
  return r;
}

std::vector<GateSpec> sweep_gate_set(const SweepStudyOptions& opts) {
  return sample_gates(opts.gate_set_size, opts.degmax_deg,
                      RngStream(opts.seed, domain(Domain::kSweepGates)));
}

std::vector<SweepRow> sweep_study(std::span<const NamedModel> models,
                                  std::span<const uncertainty::SweepChannel> channels,
                                  std::span<const double> grid, const Plant& plant,
                                  const SweepStudyOptions& opts) {
  const auto gates = sweep_gate_set(opts);
  const uncertainty::SweepOptions sweep_opts{opts.repeats, opts.seed, opts.workers};
  std::vector<SweepRow> rows;
  for (const auto& model : models) {
    std::vector<PulseSequence> pulses(gates.size());
    parallel_for(gates.size(), opts.workers, [&](std::size_t i) {
      pulses[i] = plant.pulse(infer_phases(model.params, gates[i]));
    });
    for (const auto channel : channels) {
      for (const double value : grid) {
        const auto f = uncertainty::sweep_channel_fidelities(plant.params, gates, pulses, channel,
                                                             value, sweep_opts);
        rows.push_back({model.name, channel, value, summarize(f)});
      }
    }
  }
  return rows;
}

}  // namespace nmrpulse::pipeline
