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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nmrpulse/adjoint.hpp"
#include "nmrpulse/errors.hpp"
#include "nmrpulse/uncertainty.hpp"
#include "test_support.hpp"

namespace {

using namespace nmrpulse;
using adjoint::forward_with_tape;
using adjoint::loss_and_phase_gradient;
using adjoint::loss_and_phase_gradient_scenario;
using linalg::ComplexMatrix;
using linalg::frobenius_distance;
using physics::PulseSequence;
using physics::SystemParams;

constexpr double kDelta = 1e-6;

PulseSequence random_pulse(std::size_t t, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  PulseSequence p;
  p.amplitude = 2.0;
  p.dt = 0.2;
  for (std::size_t i = 0; i < t; ++i) p.phases.push_back(phase(gen));
  return p;
}

// max_t |a_t − fd_t| / max_t |fd_t|
double max_relative_error(const std::vector<double>& a, const std::vector<double>& fd) {
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, std::abs(a[i] - fd[i]));
    scale = std::max(scale, std::abs(fd[i]));
  }
  return err / scale;
}

template <typename LossFn>
std::vector<double> central_difference(const PulseSequence& pulse, LossFn loss) {
  std::vector<double> fd(pulse.t_slices());
  for (std::size_t t = 0; t < fd.size(); ++t) {
    PulseSequence plus = pulse;
    PulseSequence minus = pulse;
    plus.phases[t] += kDelta;
    minus.phases[t] -= kDelta;
    fd[t] = (loss(plus) - loss(minus)) / (2.0 * kDelta);
  }
  return fd;
}

TEST(Tape, SingleSlice) {
  std::mt19937_64 gen(1);
  const auto pulse = random_pulse(1, gen);
  const auto tape = forward_with_tape(SystemParams::nmr_defaults(), pulse);
  EXPECT_LT(frobenius_distance(tape.prefix_products[0], ComplexMatrix::identity(8)), 1e-15);
  EXPECT_LT(frobenius_distance(tape.suffix_products[0], ComplexMatrix::identity(8)), 1e-15);
  EXPECT_LT(frobenius_distance(tape.final_propagator, tape.slice_unitaries[0]), 1e-15);
}

TEST(Tape, SpliceIdentityAndPropagatorAgree) {
  std::mt19937_64 gen(2);
  const auto p = SystemParams::nmr_defaults();
  for (std::size_t t_slices : {3u, 8u}) {
    const auto pulse = random_pulse(t_slices, gen);
    const auto tape = forward_with_tape(p, pulse);
    EXPECT_LT(frobenius_distance(tape.final_propagator, physics::propagate(p, pulse)), 1e-12);
    for (std::size_t t = 0; t < t_slices; ++t) {
      const auto spliced = tape.suffix_products[t] * tape.slice_unitaries[t] * tape.prefix_products[t];
      EXPECT_LT(frobenius_distance(spliced, tape.final_propagator), 1e-9);
    }
  }
}

TEST(Tape, ZeroHamiltonian) {
  SystemParams p;
  p.n_qubits = 3;
  p.v_khz = {0.0, 0.0, 0.0};
  const PulseSequence pulse{{0.1, 0.2, 0.3}, 0.0, 0.1};
  const auto tape = forward_with_tape(p, pulse);
  for (const auto& u : tape.slice_unitaries) EXPECT_LT(frobenius_distance(u, ComplexMatrix::identity(8)), 1e-15);
  EXPECT_LT(frobenius_distance(tape.final_propagator, ComplexMatrix::identity(8)), 1e-15);
}

TEST(PhaseGradient, ZeroAmplitudeGivesZero) {
  std::mt19937_64 gen(3);
  auto pulse = random_pulse(6, gen);
  pulse.amplitude = 0.0;
  const auto target = nmrpulse::testing::random_unitary(8, gen);
  const auto g = loss_and_phase_gradient(SystemParams::nmr_defaults(), pulse, target);
  for (double x : g.grad) EXPECT_EQ(x, 0.0);
}

TEST(PhaseGradient, StationaryAtOwnPropagator) {
  std::mt19937_64 gen(4);
  const auto p = SystemParams::nmr_defaults();
  const auto pulse = random_pulse(8, gen);
  const auto g = loss_and_phase_gradient(p, pulse, physics::propagate(p, pulse));
  EXPECT_NEAR(g.loss, 0.0, 1e-10);
  for (double x : g.grad) EXPECT_NEAR(x, 0.0, 1e-10);
}

TEST(PhaseGradient, MatchesCentralDifference) {
  std::mt19937_64 gen(5);
  const auto p = SystemParams::nmr_defaults();
  for (int trial = 0; trial < 20; ++trial) {
    const auto pulse = random_pulse(trial % 2 == 0 ? 4 : 8, gen);
    const auto target = nmrpulse::testing::random_unitary(8, gen);
    const auto g = loss_and_phase_gradient(p, pulse, target);
    EXPECT_NEAR(g.loss, 1.0 - physics::fidelity(target, physics::propagate(p, pulse)), 1e-14);
    const auto fd = central_difference(pulse, [&](const PulseSequence& q) {
      return 1.0 - physics::fidelity(target, physics::propagate(p, q));
    });
    EXPECT_LT(max_relative_error(g.grad, fd), 1e-6);
  }
}

TEST(PhaseGradient, RejectsMismatchedTarget) {
  std::mt19937_64 gen(6);
  EXPECT_THROW(loss_and_phase_gradient(SystemParams::nmr_defaults(), random_pulse(3, gen),
                                       ComplexMatrix::identity(4)),
               nmrpulse::DimensionMismatch);
}

TEST(ScenarioGradient, NominalScenarioReduces) {
  std::mt19937_64 gen(7);
  const auto p = SystemParams::nmr_defaults();
  const auto pulse = random_pulse(8, gen);
  const auto target = nmrpulse::testing::random_unitary(8, gen);
  const auto a = loss_and_phase_gradient(p, pulse, target);
  const auto b = loss_and_phase_gradient_scenario(p, pulse, target, uncertainty::Scenario::nominal(8));
  EXPECT_NEAR(a.loss, b.loss, 1e-14);
  for (std::size_t t = 0; t < 8; ++t) EXPECT_NEAR(a.grad[t], b.grad[t], 1e-14);
}

TEST(ScenarioGradient, PhaseOffsetIsShiftedNominal) {
  std::mt19937_64 gen(8);
  const auto p = SystemParams::nmr_defaults();
  const auto pulse = random_pulse(8, gen);
  const auto target = nmrpulse::testing::random_unitary(8, gen);
  auto sc = uncertainty::Scenario::nominal(8);
  sc.phi0 = 0.37;
  PulseSequence shifted = pulse;
  for (double& ph : shifted.phases) ph += sc.phi0;
  const auto a = loss_and_phase_gradient(p, shifted, target);
  const auto b = loss_and_phase_gradient_scenario(p, pulse, target, sc);
  EXPECT_NEAR(a.loss, b.loss, 1e-13);
  for (std::size_t t = 0; t < 8; ++t) EXPECT_NEAR(a.grad[t], b.grad[t], 1e-13);
}

TEST(ScenarioGradient, MatchesCentralDifference) {
  std::mt19937_64 gen(9);
  SystemParams p = SystemParams::nmr_defaults();
  const auto noise = uncertainty::NoiseConfig::table_defaults();
  for (int trial = 0; trial < 20; ++trial) {
    p.coupling_model = trial % 2 == 0 ? physics::CouplingModel::kZZ : physics::CouplingModel::kHeisenberg;
    const std::size_t t_slices = trial % 3 == 0 ? 6 : (trial % 2 == 0 ? 4 : 8);
    const auto pulse = random_pulse(t_slices, gen);
    const auto target = nmrpulse::testing::random_unitary(8, gen);
    const auto sc = uncertainty::sample_scenario(noise, t_slices, rng::RngStream(77, static_cast<std::uint64_t>(trial)));
    const auto g = loss_and_phase_gradient_scenario(p, pulse, target, sc);
    const auto fd = central_difference(pulse, [&](const PulseSequence& q) {
      return 1.0 - physics::fidelity(target, uncertainty::propagate_scenario(p, q, sc));
    });
    EXPECT_LT(max_relative_error(g.grad, fd), 1e-6);
  }
}

TEST(AmplitudeGradient, MatchesCentralDifference) {
  std::mt19937_64 gen(10);
  const auto p = SystemParams::nmr_defaults();
  const auto pulse = random_pulse(8, gen);
  const auto target = nmrpulse::testing::random_unitary(8, gen);
  auto loss = [&](double a) {
    PulseSequence q = pulse;
    q.amplitude = a;
    return 1.0 - physics::fidelity(target, physics::propagate(p, q));
  };
  const double fd = (loss(pulse.amplitude + kDelta) - loss(pulse.amplitude - kDelta)) / (2.0 * kDelta);
  EXPECT_NEAR(adjoint::amplitude_gradient(p, pulse, target), fd, 1e-6 * std::abs(fd));
}

TEST(ControlGradient, PerSliceAmplitudeMatchesCentralDifference) {
  std::mt19937_64 gen(11);
  const auto p = SystemParams::nmr_defaults();
  const auto drift = physics::build_drift(p);
  const auto target = nmrpulse::testing::random_unitary(8, gen);
  auto controls = physics::SliceControls::from_pulse(random_pulse(5, gen));
  const auto g = adjoint::loss_and_control_gradient(drift, controls, 3, target, true);
  std::vector<double> fd(5);
  for (std::size_t t = 0; t < 5; ++t) {
    auto plus = controls;
    auto minus = controls;
    plus.amplitudes[t] += kDelta;
    minus.amplitudes[t] -= kDelta;
    fd[t] = (physics::fidelity(target, physics::propagate(drift, minus, 3)) -
             physics::fidelity(target, physics::propagate(drift, plus, 3))) /
            (2.0 * kDelta);
  }
  EXPECT_LT(max_relative_error(g.amplitude_grad, fd), 1e-6);
}

}  // namespace
