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

#include "nmrpulse/adjoint.hpp"

#include <cmath>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::adjoint {

using linalg::Complex;

namespace {

// Σ_ij a(i,j)·w(j,i)·b(j,i) = Tr(a · (w ∘ b)).
Complex trace_weighted(const ComplexMatrix& a, const ComplexMatrix& w, const ComplexMatrix& b) {
  const std::size_t n = a.dim();
  Complex sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sum += a(i, j) * w(j, i) * b(j, i);
  }
  return sum;
}

}  // namespace

GradientTape forward_with_tape(const SystemParams& p, const PulseSequence& pulse) {
  pulse.validate();
  return forward_with_tape(physics::build_drift(p), SliceControls::from_pulse(pulse), p.n_qubits);
}

GradientTape forward_with_tape(const ComplexMatrix& drift, const SliceControls& controls,
                               int n_qubits) {
  const ComplexMatrix hx = physics::collective_x(n_qubits);
  const ComplexMatrix hy = physics::collective_y(n_qubits);
  if (drift.dim() != hx.dim()) throw DimensionMismatch("forward_with_tape: drift dimension");
  const std::size_t t_slices = controls.size();
  const std::size_t d = drift.dim();

  GradientTape tape;
  tape.slice_unitaries.reserve(t_slices);
  tape.slice_eigen.reserve(t_slices);
  tape.prefix_products.reserve(t_slices);
  ComplexMatrix running = ComplexMatrix::identity(d);
  for (std::size_t t = 0; t < t_slices; ++t) {
    const double a = controls.amplitudes[t];
    const ComplexMatrix h = drift + Complex{a * std::cos(controls.phases[t])} * hx +
                            Complex{a * std::sin(controls.phases[t])} * hy;
    tape.slice_eigen.push_back(linalg::herm_eig(h));
    tape.slice_unitaries.push_back(linalg::expm_antiherm(tape.slice_eigen.back(), controls.dts[t]));
    tape.prefix_products.push_back(running);
    running = tape.slice_unitaries.back() * running;
  }
  tape.final_propagator = running;

  tape.suffix_products.assign(t_slices, ComplexMatrix());
  ComplexMatrix suffix = ComplexMatrix::identity(d);
  for (std::size_t t = t_slices; t-- > 0;) {
    tape.suffix_products[t] = suffix;
    suffix = suffix * tape.slice_unitaries[t];
  }
  return tape;
}

ControlGradient loss_and_control_gradient(const ComplexMatrix& drift,
                                          const SliceControls& controls, int n_qubits,
                                          const ComplexMatrix& u_target, bool with_amplitude) {
  if (u_target.dim() != drift.dim()) {
    throw DimensionMismatch("loss_and_control_gradient: target dimension");
  }
  const GradientTape tape = forward_with_tape(drift, controls, n_qubits);
  const ComplexMatrix hx = physics::collective_x(n_qubits);
  const ComplexMatrix hy = physics::collective_y(n_qubits);
  const ComplexMatrix target_adj = u_target.adjoint();
  const double d = static_cast<double>(drift.dim());

  const Complex overlap = linalg::trace_of_product(target_adj, tape.final_propagator);
  ControlGradient out;
  out.loss = 1.0 - std::norm(overlap) / (d * d);

  // dF = (2/d²)·Re(conj(Tr(U_F†U))·Tr(U_F† dU)) and loss = 1 − F.
  const Complex chain = std::conj(overlap) * (-2.0 / (d * d));
  const std::size_t t_slices = controls.size();
  out.phase_grad.resize(t_slices);
  if (with_amplitude) out.amplitude_grad.resize(t_slices);
  for (std::size_t t = 0; t < t_slices; ++t) {
    const auto& eig = tape.slice_eigen[t];
    const ComplexMatrix& v = eig.eigenvectors;
    const ComplexMatrix vh = v.adjoint();
    // Tr(U_F† S_t dU_t P_t) = Tr(M_t dU_t), M_t = P_t U_F† S_t; with
    // dU_t = V (DD ∘ V†∂H V) V† this is Tr((V†M_tV)(DD ∘ V†∂H V)).
    const ComplexMatrix m = tape.prefix_products[t] * (target_adj * tape.suffix_products[t]);
    const ComplexMatrix m_eig = vh * m * v;
    const ComplexMatrix dd = linalg::exp_divided_differences(eig.eigenvalues, controls.dts[t]);

    const double a = controls.amplitudes[t];
    const double c = std::cos(controls.phases[t]);
    const double s = std::sin(controls.phases[t]);
    const ComplexMatrix dh_phase = Complex{-a * s} * hx + Complex{a * c} * hy;
    const Complex dtrace = trace_weighted(m_eig, dd, vh * dh_phase * v);
    out.phase_grad[t] = (chain * dtrace).real();
    if (with_amplitude) {
      const ComplexMatrix dh_amp = Complex{c} * hx + Complex{s} * hy;
      out.amplitude_grad[t] = (chain * trace_weighted(m_eig, dd, vh * dh_amp * v)).real();
    }
  }
  return out;
}

PhaseGradient loss_and_phase_gradient(const SystemParams& p, const PulseSequence& pulse,
                                      const ComplexMatrix& u_target) {
  pulse.validate();
  auto g = loss_and_control_gradient(physics::build_drift(p), SliceControls::from_pulse(pulse),
                                     p.n_qubits, u_target, false);
  return {g.loss, std::move(g.phase_grad)};
}

PhaseGradient loss_and_phase_gradient_scenario(const SystemParams& p, const PulseSequence& pulse,
                                               const ComplexMatrix& u_target,
                                               const uncertainty::Scenario& sc) {
  pulse.validate();
  const auto eff = uncertainty::apply_scenario(p, pulse, sc);
  auto g = loss_and_control_gradient(physics::build_drift(eff.params), eff.controls, p.n_qubits,
                                     u_target, false);
  return {g.loss, std::move(g.phase_grad)};
}

double amplitude_gradient(const SystemParams& p, const PulseSequence& pulse,
                          const ComplexMatrix& u_target) {
  pulse.validate();
  const auto g = loss_and_control_gradient(physics::build_drift(p), SliceControls::from_pulse(pulse),
                                           p.n_qubits, u_target, true);
  double sum = 0.0;
  for (double x : g.amplitude_grad) sum += x;
  return sum;
}

}  // namespace nmrpulse::adjoint
