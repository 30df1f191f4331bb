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

#include "nmrpulse/uncertainty.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nmrpulse/errors.hpp"
#include "nmrpulse/parallel.hpp"

namespace nmrpulse::uncertainty {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMaxResampleAttempts = 1000;

rng::RngStream knob_stream(const rng::RngStream& rng, Knob knob) {
  return rng.child(static_cast<std::uint64_t>(knob));
}

bool durations_positive(const Scenario& sc) {
  for (double jit : sc.dt_jit) {
    if (!(sc.beta_dt + jit > 0.0)) return false;
  }
  return !sc.dt_jit.empty() || sc.beta_dt > 0.0;
}

}  // namespace

NoiseConfig NoiseConfig::table_defaults() {
  NoiseConfig c;
  c.sigma_v = 0.002;
  c.sigma_j = 0.005;
  c.sigma_a_bias = 0.03;
  c.sigma_a_jit = 0.02;
  c.sigma_phi0 = 2.0 * kDeg;
  c.sigma_phi_jit = 0.5 * kDeg;
  c.sigma_dt = 0.005;
  c.sigma_dt_jit = 0.002;
  return c;
}

void NoiseConfig::validate() const {
  for (double s : {sigma_v, sigma_j, sigma_a_bias, sigma_a_jit, sigma_phi0, sigma_phi_jit,
                   sigma_dt, sigma_dt_jit}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("noise sigmas must be finite and >= 0");
  }
}

Scenario Scenario::nominal(std::size_t t_slices) {
  Scenario sc;
  sc.alpha_j.assign(t_slices, 1.0);
  sc.phi_j.assign(t_slices, 0.0);
  sc.dt_jit.assign(t_slices, 0.0);
  return sc;
}

void Scenario::validate(std::size_t t_slices) const {
  if (alpha_j.size() != t_slices || phi_j.size() != t_slices || dt_jit.size() != t_slices) {
    throw ShapeMismatch("scenario per-slice sequences must have length " +
                        std::to_string(t_slices));
  }
}

Scenario sample_scenario(const NoiseConfig& cfg, std::size_t t_slices, const rng::RngStream& rng) {
  cfg.validate();
  for (int attempt = 0; attempt < kMaxResampleAttempts; ++attempt) {
    const rng::RngStream base = attempt == 0 ? rng : rng.child(0xA77E0000ULL + attempt);
    Scenario sc = Scenario::nominal(t_slices);
    sc.dv = cfg.sigma_v * knob_stream(base, Knob::kV).normal(0);
    sc.dj = cfg.sigma_j * knob_stream(base, Knob::kJ).normal(0);
    sc.alpha_g = 1.0 + cfg.sigma_a_bias * knob_stream(base, Knob::kAmpBias).normal(0);
    sc.phi0 = cfg.sigma_phi0 * knob_stream(base, Knob::kPhaseOffset).normal(0);
    sc.beta_dt = 1.0 + cfg.sigma_dt * knob_stream(base, Knob::kDtScale).normal(0);
    const auto amp_jit = knob_stream(base, Knob::kAmpJitter);
    const auto phase_jit = knob_stream(base, Knob::kPhaseJitter);
    const auto dt_jit = knob_stream(base, Knob::kDtJitter);
    for (std::size_t t = 0; t < t_slices; ++t) {
      sc.alpha_j[t] = 1.0 + cfg.sigma_a_jit * amp_jit.normal(t);
      sc.phi_j[t] = cfg.sigma_phi_jit * phase_jit.normal(t);
      sc.dt_jit[t] = cfg.sigma_dt_jit * dt_jit.normal(t);
    }
    if (durations_positive(sc)) return sc;
  }
  throw NegativeDuration("could not draw a scenario with positive slice durations");
}

EffectiveSystem apply_scenario(const SystemParams& p, const PulseSequence& pulse, const Scenario& sc) {
  const std::size_t t_slices = pulse.t_slices();
  sc.validate(t_slices);
  EffectiveSystem out;
  out.params = p;
  for (double& v : out.params.v_khz) v *= 1.0 + sc.dv;
  for (auto& [pair, j] : out.params.j_khz) j *= 1.0 + sc.dj;

  SliceControls& c = out.controls;
  c.amplitudes.resize(t_slices);
  c.phases.resize(t_slices);
  c.dts.resize(t_slices);
  for (std::size_t t = 0; t < t_slices; ++t) {
    c.phases[t] = pulse.phases[t] + sc.phi0 + sc.phi_j[t];
    c.amplitudes[t] = pulse.amplitude * sc.alpha_g * sc.alpha_j[t];
    c.dts[t] = pulse.dt * (sc.beta_dt + sc.dt_jit[t]);
    if (!(c.dts[t] > 0.0)) {
      throw NegativeDuration("effective slice duration <= 0 at slice " + std::to_string(t));
    }
  }
  return out;
}

ComplexMatrix propagate_scenario(const SystemParams& p, const PulseSequence& pulse, const Scenario& sc) {
  const EffectiveSystem eff = apply_scenario(p, pulse, sc);
  return physics::propagate(physics::build_drift(eff.params), eff.controls, p.n_qubits);
}

namespace {

struct ChannelInfo {
  SweepChannel channel;
  const char* name;
  bool stochastic;
  bool angular;
};

constexpr std::array<ChannelInfo, 8> kChannels{{
    {SweepChannel::kAlphaG, "alpha_g", false, false},
    {SweepChannel::kPhi0, "phi0", false, true},
    {SweepChannel::kVScale, "v_scale", false, false},
    {SweepChannel::kJScale, "j_scale", false, false},
    {SweepChannel::kDtScale, "dt_scale", false, false},
    {SweepChannel::kAmpJitterStd, "a_jit_std", true, false},
    {SweepChannel::kPhaseJitterStd, "phi_jit_std", true, true},
    {SweepChannel::kDtJitterStd, "dt_jit_std", true, false},
}};

const ChannelInfo& info(SweepChannel channel) {
  for (const auto& c : kChannels) {
    if (c.channel == channel) return c;
  }
  throw UnknownChannel("unknown sweep channel");
}

constexpr std::array<SweepChannel, 8> kAllChannels{
    SweepChannel::kAlphaG,       SweepChannel::kPhi0,           SweepChannel::kVScale,
    SweepChannel::kJScale,       SweepChannel::kDtScale,        SweepChannel::kAmpJitterStd,
    SweepChannel::kPhaseJitterStd, SweepChannel::kDtJitterStd,
};

}  // namespace

std::string to_string(SweepChannel channel) { return info(channel).name; }

SweepChannel channel_from_string(const std::string& name) {
  for (const auto& c : kChannels) {
    if (name == c.name) return c.channel;
  }
  throw UnknownChannel("unknown sweep channel '" + name + "'");
}

std::span<const SweepChannel> all_channels() { return kAllChannels; }
bool is_stochastic(SweepChannel channel) { return info(channel).stochastic; }
bool is_angular(SweepChannel channel) { return info(channel).angular; }

Scenario channel_scenario(SweepChannel channel, double value, std::size_t t_slices,
                          const rng::RngStream& rng) {
  Scenario sc = Scenario::nominal(t_slices);
  switch (channel) {
    case SweepChannel::kAlphaG:
      sc.alpha_g = value;
      break;
    case SweepChannel::kPhi0:
      sc.phi0 = value;
      break;
    case SweepChannel::kVScale:
      sc.dv = value - 1.0;
      break;
    case SweepChannel::kJScale:
      sc.dj = value - 1.0;
      break;
    case SweepChannel::kDtScale:
      sc.beta_dt = value;
      break;
    case SweepChannel::kAmpJitterStd: {
      const auto s = knob_stream(rng, Knob::kAmpJitter);
      for (std::size_t t = 0; t < t_slices; ++t) sc.alpha_j[t] = 1.0 + value * s.normal(t);
      break;
    }
    case SweepChannel::kPhaseJitterStd: {
      const auto s = knob_stream(rng, Knob::kPhaseJitter);
      for (std::size_t t = 0; t < t_slices; ++t) sc.phi_j[t] = value * s.normal(t);
      break;
    }
    case SweepChannel::kDtJitterStd: {
      const auto s = knob_stream(rng, Knob::kDtJitter);
      for (std::size_t t = 0; t < t_slices; ++t) sc.dt_jit[t] = value * s.normal(t);
      break;
    }
  }
  return sc;
}

std::vector<double> sweep_channel_fidelities(const SystemParams& p,
                                             std::span<const physics::GateSpec> gates,
                                             std::span<const PulseSequence> pulses,
                                             SweepChannel channel, double value,
                                             const SweepOptions& opts) {
  if (gates.size() != pulses.size()) {
    throw ShapeMismatch("sweep_channel: one pulse per gate required");
  }
  const bool stochastic = is_stochastic(channel);
  const int repeats = stochastic ? std::max(opts.repeats, 1) : 1;
  const std::uint64_t value_key = std::bit_cast<std::uint64_t>(value);
  std::vector<double> fidelities(gates.size());
  parallel_for(gates.size(), opts.workers, [&](std::size_t g) {
    const ComplexMatrix target = physics::lift_target(physics::target_su2(gates[g]), p.n_qubits);
    const PulseSequence& pulse = pulses[g];
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const rng::RngStream stream(opts.seed, static_cast<std::uint64_t>(rng::Domain::kSweep), g,
                                  value_key, static_cast<std::uint64_t>(r));
      Scenario sc = channel_scenario(channel, value, pulse.t_slices(), stream);
      sum += physics::fidelity(target, propagate_scenario(p, pulse, sc));
    }
    fidelities[g] = sum / repeats;
  });
  return fidelities;
}

double sweep_channel(const SystemParams& p, std::span<const physics::GateSpec> gates,
                     std::span<const PulseSequence> pulses, SweepChannel channel, double value,
                     const SweepOptions& opts) {
  const auto f = sweep_channel_fidelities(p, gates, pulses, channel, value, opts);
  if (f.empty()) throw EmptyInput("sweep_channel: empty gate set");
  return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

}  // namespace nmrpulse::uncertainty
