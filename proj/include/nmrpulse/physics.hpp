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

// Spin register model: drift and RF control Hamiltonians, axis–angle
// target gates, the piecewise-constant propagator, and gate fidelity.
//
// Units: chemical shifts v and couplings J in kHz, RF amplitude A in kHz,
// slice duration dt in milliseconds, so (kHz)·(ms) is a dimensionless phase.
// The drift carries the π prefactors: H0 = π Σ v_i Z_i + π Σ J_ij (coupling).

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nmrpulse/linalg.hpp"

namespace nmrpulse::physics {

using linalg::ComplexMatrix;

enum class CouplingModel { kHeisenberg, kZZ };

std::string to_string(CouplingModel model);
CouplingModel coupling_model_from_string(const std::string& name);

/// Nominal RF amplitude (kHz) used when a config does not override it.
inline constexpr double kDefaultAmplitudeKhz = 2.0;
/// Slice duration (ms) and slice count of the register's pulse grid.
inline constexpr double kDefaultDtMs = 0.035;
inline constexpr std::size_t kDefaultSlices = 300;

struct SystemParams {
  int n_qubits = 3;
  std::vector<double> v_khz;
  /// Keyed by zero-based qubit pairs (i, j) with i < j.
  std::map<std::pair<int, int>, double> j_khz;
  CouplingModel coupling_model = CouplingModel::kHeisenberg;

  /// Three-spin register: v = (-0.921, 0.04075, 0.7) kHz,
  /// J12 = -0.064, J13 = 0.0244, J23 = 0.0341 kHz.
  static SystemParams nmr_defaults();

  /// Throws ConfigError on non-finite values, wrong lengths or bad pairs.
  void validate() const;
  std::size_t dim() const { return std::size_t{1} << n_qubits; }
};

/// Axis–angle gate: rotation by gamma about n = (sinθcosα, sinθsinα, cosθ).
struct GateSpec {
  double gamma = 0.0;
  double theta = 0.0;
  double alpha = 0.0;

  static GateSpec from_degrees(double gamma_deg, double theta_deg, double alpha_deg);
};

/// Phase-modulated, constant-amplitude pulse.
struct PulseSequence {
  std::vector<double> phases;  // radians, one per slice
  double amplitude = kDefaultAmplitudeKhz;
  double dt = kDefaultDtMs;

  std::size_t t_slices() const noexcept { return phases.size(); }
  void validate() const;
};

/// Per-slice amplitude, phase and duration actually reaching the plant.
struct SliceControls {
  std::vector<double> amplitudes;
  std::vector<double> phases;
  std::vector<double> dts;

  std::size_t size() const noexcept { return phases.size(); }
  static SliceControls from_pulse(const PulseSequence& pulse);
};

/// Pauli operator `op` acting on `qubit` (0 = most significant factor).
ComplexMatrix embed_single(const ComplexMatrix& op, int qubit, int n_qubits);

/// Σ_i σ_x^(i) and Σ_i σ_y^(i).
ComplexMatrix collective_x(int n_qubits);
ComplexMatrix collective_y(int n_qubits);

ComplexMatrix build_drift(const SystemParams& p);

/// amplitude·(cosφ·H_x + sinφ·H_y).
ComplexMatrix build_control(double phase, double amplitude, int n_qubits);

/// U(T) = U_T ⋯ U_1 with U_t = exp(-i·dt·(H0 + H_c(t))); slice 1 acts first.
ComplexMatrix propagate(const SystemParams& p, const PulseSequence& pulse);
ComplexMatrix propagate(const ComplexMatrix& drift, const SliceControls& controls, int n_qubits);

ComplexMatrix target_su2(const GateSpec& g);

/// u2 ⊗ I ⊗ … ⊗ I. Throws DimensionMismatch unless u2 is 2×2.
ComplexMatrix lift_target(const ComplexMatrix& u2, int n_qubits);

/// |Tr(U_t† U)|² / d², d the matrix dimension.
double fidelity(const ComplexMatrix& u_target, const ComplexMatrix& u);

}  // namespace nmrpulse::physics
