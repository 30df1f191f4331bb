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

// Exact gradients of the gate-fidelity loss with respect to per-slice
// controls, by differentiating the time-ordered product slice by slice:
//   ∂U/∂φ_t = U_{T:t+1} · ∂U_t/∂φ_t · U_{t-1:1},
// with ∂U_t/∂φ_t the Fréchet derivative of exp at -i·dt·H(t) in direction
// -i·dt·∂H/∂φ_t, and ∂H/∂φ_t = A(-sinφ_t H_x + cosφ_t H_y).

#pragma once

#include <vector>

#include "nmrpulse/linalg.hpp"
#include "nmrpulse/physics.hpp"
#include "nmrpulse/uncertainty.hpp"

namespace nmrpulse::adjoint {

using linalg::ComplexMatrix;
using physics::PulseSequence;
using physics::SliceControls;
using physics::SystemParams;

/// Forward-pass record. Slices are zero-based; for every t
/// suffix_products[t] · slice_unitaries[t] · prefix_products[t] == final_propagator.
struct GradientTape {
  std::vector<ComplexMatrix> slice_unitaries;
  /// prefix_products[t] = U_{t-1} ⋯ U_0 (identity for t = 0).
  std::vector<ComplexMatrix> prefix_products;
  /// suffix_products[t] = U_{T-1} ⋯ U_{t+1} (identity for t = T-1).
  std::vector<ComplexMatrix> suffix_products;
  ComplexMatrix final_propagator;
  /// Eigensystem of each slice Hamiltonian, reused by the backward sweep.
  std::vector<linalg::HermitianEigen> slice_eigen;
};

GradientTape forward_with_tape(const SystemParams& p, const PulseSequence& pulse);
GradientTape forward_with_tape(const ComplexMatrix& drift, const SliceControls& controls,
                               int n_qubits);

struct PhaseGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// loss = 1 − F(u_target, U(T)) and ∂loss/∂φ_t.
PhaseGradient loss_and_phase_gradient(const SystemParams& p, const PulseSequence& pulse,
                                      const ComplexMatrix& u_target);

/// Same under the effective controls and drift of scenario `sc`. Since
/// ∂φ_eff/∂φ_t = 1 the returned gradient is with respect to the commanded phases.
PhaseGradient loss_and_phase_gradient_scenario(const SystemParams& p, const PulseSequence& pulse,
                                               const ComplexMatrix& u_target,
                                               const uncertainty::Scenario& sc);

struct ControlGradient {
  double loss = 0.0;
  std::vector<double> phase_grad;
  /// ∂loss/∂A_t per slice; empty unless requested.
  std::vector<double> amplitude_grad;
};

/// General entry point on explicit per-slice controls.
ControlGradient loss_and_control_gradient(const ComplexMatrix& drift,
                                          const SliceControls& controls, int n_qubits,
                                          const ComplexMatrix& u_target, bool with_amplitude);

/// ∂loss/∂A for the constant-amplitude pulse class (sum of per-slice terms).
double amplitude_gradient(const SystemParams& p, const PulseSequence& pulse,
                          const ComplexMatrix& u_target);

}  // namespace nmrpulse::adjoint
