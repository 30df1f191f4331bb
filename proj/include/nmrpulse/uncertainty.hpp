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

// Prescribed uncertainty set: two quasi-static Hamiltonian knobs and six
// control/timing knobs, their sampling, and the effective dynamics they
// induce.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nmrpulse/physics.hpp"
#include "nmrpulse/rng.hpp"

namespace nmrpulse::uncertainty {

using physics::ComplexMatrix;
using physics::PulseSequence;
using physics::SliceControls;
using physics::SystemParams;

/// Standard deviations of the eight knobs. Relative knobs are fractions;
/// the two phase knobs are radians.
struct NoiseConfig {
  double sigma_v = 0.0;
  double sigma_j = 0.0;
  double sigma_a_bias = 0.0;
  double sigma_a_jit = 0.0;
  double sigma_phi0 = 0.0;
  double sigma_phi_jit = 0.0;
  double sigma_dt = 0.0;
  double sigma_dt_jit = 0.0;

  /// σ_v 0.002, σ_J 0.005, σ_A,bias 0.03, σ_A,jit 0.02, σ_φ0 2°,
  /// σ_φ,jit 0.5°, σ_dt 0.005, σ_dt,jit 0.002.
  static NoiseConfig table_defaults();
  void validate() const;
};

/// One joint realization of the knobs for a T-slice pulse.
struct Scenario {
  double dv = 0.0;
  double dj = 0.0;
  double alpha_g = 1.0;
  std::vector<double> alpha_j;  // multiplicative, nominal 1
  double phi0 = 0.0;
  std::vector<double> phi_j;
  double beta_dt = 1.0;
  std::vector<double> dt_jit;  // additive to beta_dt, nominal 0

  static Scenario nominal(std::size_t t_slices);
  std::size_t t_slices() const noexcept { return phi_j.size(); }
  /// Throws ShapeMismatch unless every per-slice sequence has length t_slices.
  void validate(std::size_t t_slices) const;
};

enum class Knob : std::uint64_t {
  kV = 0,
  kJ = 1,
  kAmpBias = 2,
  kAmpJitter = 3,
  kPhaseOffset = 4,
  kPhaseJitter = 5,
  kDtScale = 6,
  kDtJitter = 7,
};

/// Draws every knob from its Gaussian. Each knob reads its own child stream
/// (rng.child(knob)) at counter = slice index, so draws are fixed by path.
/// Scenarios with a non-positive effective slice duration are redrawn from a
/// fresh attempt stream.
Scenario sample_scenario(const NoiseConfig& cfg, std::size_t t_slices, const rng::RngStream& rng);

struct EffectiveSystem {
  SystemParams params;
  SliceControls controls;
};

/// v → (1+δv)v, J → (1+δJ)J, φ_eff = φ + φ0 + φ_j(t), A_eff = A·α_g·α_j(t),
/// dt_eff = dt·(β_dt + δ_dt,jit(t)). Keeps p's coupling model. Throws
/// NegativeDuration if any dt_eff ≤ 0.
EffectiveSystem apply_scenario(const SystemParams& p, const PulseSequence& pulse, const Scenario& sc);

ComplexMatrix propagate_scenario(const SystemParams& p, const PulseSequence& pulse, const Scenario& sc);

enum class SweepChannel {
  kAlphaG,
  kPhi0,
  kVScale,
  kJScale,
  kDtScale,
  kAmpJitterStd,
  kPhaseJitterStd,
  kDtJitterStd,
};

std::string to_string(SweepChannel channel);
/// Throws UnknownChannel.
SweepChannel channel_from_string(const std::string& name);
std::span<const SweepChannel> all_channels();
bool is_stochastic(SweepChannel channel);
/// Whether user-facing values for this channel are degrees.
bool is_angular(SweepChannel channel);

struct SweepOptions {
  int repeats = 16;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Scenario with only `channel` set to `value` (radians for phase channels);
/// stochastic channels draw their per-slice jitter with std `value` from rng.
Scenario channel_scenario(SweepChannel channel, double value, std::size_t t_slices,
                          const rng::RngStream& rng);

/// Per-gate fidelity with only `channel` perturbed; stochastic channels
/// average `repeats` realizations keyed by (gate, value, repeat).
std::vector<double> sweep_channel_fidelities(const SystemParams& p,
                                             std::span<const physics::GateSpec> gates,
                                             std::span<const PulseSequence> pulses,
                                             SweepChannel channel, double value,
                                             const SweepOptions& opts);

/// Mean of sweep_channel_fidelities over the gate set.
double sweep_channel(const SystemParams& p, std::span<const physics::GateSpec> gates,
                     std::span<const PulseSequence> pulses, SweepChannel channel, double value,
                     const SweepOptions& opts);

}  // namespace nmrpulse::uncertainty
