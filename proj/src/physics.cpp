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

#include "nmrpulse/physics.hpp"

#include <cmath>
#include <numbers>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::physics {

using linalg::Complex;
namespace pauli = linalg::pauli;

std::string to_string(CouplingModel model) {
  return model == CouplingModel::kZZ ? "zz" : "heisenberg";
}

CouplingModel coupling_model_from_string(const std::string& name) {
  if (name == "heisenberg") return CouplingModel::kHeisenberg;
  if (name == "zz") return CouplingModel::kZZ;
  throw ConfigError("unknown coupling model '" + name + "' (expected heisenberg|zz)");
}

SystemParams SystemParams::nmr_defaults() {
  SystemParams p;
  p.n_qubits = 3;
  p.v_khz = {-0.921, 0.04075, 0.7};
  p.j_khz = {{{0, 1}, -0.064}, {{0, 2}, 0.0244}, {{1, 2}, 0.0341}};
  return p;
}

void SystemParams::validate() const {
  if (n_qubits < 1 || n_qubits > 10) throw ConfigError("n_qubits must be in [1, 10]");
  if (static_cast<int>(v_khz.size()) != n_qubits) {
    throw ConfigError("v must have one entry per qubit");
  }
  for (double v : v_khz) {
    if (!std::isfinite(v)) throw ConfigError("v entries must be finite");
  }
  for (const auto& [pair, j] : j_khz) {
    if (pair.first < 0 || pair.first >= pair.second || pair.second >= n_qubits) {
      throw ConfigError("coupling pairs must satisfy 0 <= i < j < n_qubits");
    }
    if (!std::isfinite(j)) throw ConfigError("J entries must be finite");
  }
}

GateSpec GateSpec::from_degrees(double gamma_deg, double theta_deg, double alpha_deg) {
  constexpr double kRad = std::numbers::pi / 180.0;
  return {gamma_deg * kRad, theta_deg * kRad, alpha_deg * kRad};
}

void PulseSequence::validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw ConfigError("pulse amplitude must be finite and >= 0");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("pulse dt must be finite and > 0");
}

SliceControls SliceControls::from_pulse(const PulseSequence& pulse) {
  SliceControls c;
  c.phases = pulse.phases;
  c.amplitudes.assign(pulse.t_slices(), pulse.amplitude);
  c.dts.assign(pulse.t_slices(), pulse.dt);
  return c;
}

ComplexMatrix embed_single(const ComplexMatrix& op, int qubit, int n_qubits) {
  ComplexMatrix out = qubit == 0 ? op : pauli::identity2();
  for (int k = 1; k < n_qubits; ++k) out = kron(out, k == qubit ? op : pauli::identity2());
  return out;
}

ComplexMatrix collective_x(int n_qubits) {
  ComplexMatrix sum(std::size_t{1} << n_qubits);
  for (int i = 0; i < n_qubits; ++i) sum += embed_single(pauli::sigma_x(), i, n_qubits);
  return sum;
}

ComplexMatrix collective_y(int n_qubits) {
  ComplexMatrix sum(std::size_t{1} << n_qubits);
  for (int i = 0; i < n_qubits; ++i) sum += embed_single(pauli::sigma_y(), i, n_qubits);
  return sum;
}

ComplexMatrix build_drift(const SystemParams& p) {
  p.validate();
  const int n = p.n_qubits;
  constexpr double pi = std::numbers::pi;
  ComplexMatrix h(p.dim());
  for (int i = 0; i < n; ++i) {
    if (p.v_khz[i] != 0.0) h += Complex{pi * p.v_khz[i]} * embed_single(pauli::sigma_z(), i, n);
  }
  for (const auto& [pair, j] : p.j_khz) {
    if (j == 0.0) continue;
    const auto [a, b] = pair;
    ComplexMatrix coupling = embed_single(pauli::sigma_z(), a, n) * embed_single(pauli::sigma_z(), b, n);
    if (p.coupling_model == CouplingModel::kHeisenberg) {
      coupling += embed_single(pauli::sigma_x(), a, n) * embed_single(pauli::sigma_x(), b, n);
      coupling += embed_single(pauli::sigma_y(), a, n) * embed_single(pauli::sigma_y(), b, n);
    }
    h += Complex{pi * j} * coupling;
  }
  return h;
}

ComplexMatrix build_control(double phase, double amplitude, int n_qubits) {
  if (amplitude < 0.0) throw ConfigError("control amplitude must be >= 0");
  return Complex{amplitude * std::cos(phase)} * collective_x(n_qubits) +
         Complex{amplitude * std::sin(phase)} * collective_y(n_qubits);
}

ComplexMatrix propagate(const SystemParams& p, const PulseSequence& pulse) {
  pulse.validate();
  return propagate(build_drift(p), SliceControls::from_pulse(pulse), p.n_qubits);
}

ComplexMatrix propagate(const ComplexMatrix& drift, const SliceControls& controls, int n_qubits) {
  const ComplexMatrix hx = collective_x(n_qubits);
  const ComplexMatrix hy = collective_y(n_qubits);
  if (drift.dim() != hx.dim()) throw DimensionMismatch("propagate: drift dimension");
  ComplexMatrix u = ComplexMatrix::identity(drift.dim());
  for (std::size_t t = 0; t < controls.size(); ++t) {
    const double a = controls.amplitudes[t];
    const ComplexMatrix h = drift + Complex{a * std::cos(controls.phases[t])} * hx +
                            Complex{a * std::sin(controls.phases[t])} * hy;
    u = linalg::expm_antiherm(h, controls.dts[t]) * u;
  }
  return u;
}

ComplexMatrix target_su2(const GateSpec& g) {
  const double nx = std::sin(g.theta) * std::cos(g.alpha);
  const double ny = std::sin(g.theta) * std::sin(g.alpha);
  const double nz = std::cos(g.theta);
  const double c = std::cos(0.5 * g.gamma);
  const double s = std::sin(0.5 * g.gamma);
  // cos(γ/2)·I − i·sin(γ/2)·(n·σ)
  return ComplexMatrix(2, {Complex{c, -s * nz}, Complex{-s * ny, -s * nx},
                           Complex{s * ny, -s * nx}, Complex{c, s * nz}});
}

ComplexMatrix lift_target(const ComplexMatrix& u2, int n_qubits) {
  if (u2.dim() != 2) throw DimensionMismatch("lift_target: expected a 2x2 operator");
  ComplexMatrix out = u2;
  for (int k = 1; k < n_qubits; ++k) out = kron(out, pauli::identity2());
  return out;
}

double fidelity(const ComplexMatrix& u_target, const ComplexMatrix& u) {
  if (u_target.dim() != u.dim()) throw DimensionMismatch("fidelity: operand dimensions differ");
  const double d = static_cast<double>(u.dim());
  return std::norm(linalg::trace_of_product(u_target.adjoint(), u)) / (d * d);
}

}  // namespace nmrpulse::physics
