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

// The compiler network: trigonometric gate features → per-slice phases.
// Fully connected layers with exact (erf) GELU after every hidden layer,
// optional inverted dropout on hidden activations, and a linear output read
// directly as radians.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nmrpulse/physics.hpp"
#include "nmrpulse/rng.hpp"

namespace nmrpulse::nn {

inline constexpr std::size_t kFeatureDim = 6;

/// Layer l maps layer_dims[l] → layer_dims[l+1]; its weight matrix is
/// stored row-major with shape (layer_dims[l+1], layer_dims[l]).
struct MlpParams {
  std::vector<std::size_t> layer_dims;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::size_t num_layers() const noexcept { return weights.size(); }
  std::size_t output_dim() const noexcept { return layer_dims.empty() ? 0 : layer_dims.back(); }
  std::size_t parameter_count() const noexcept;
  /// Throws ShapeMismatch.
  void validate() const;
  static MlpParams zeros(std::span<const std::size_t> layer_dims);
};

/// Gradients share the parameter layout.
using MlpGradients = MlpParams;

/// dims = {6, width × hidden_layers, t_slices}.
std::vector<std::size_t> make_layer_dims(std::size_t t_slices, std::size_t width = 256,
                                         std::size_t hidden_layers = 5);

/// Per-hidden-layer masks with entries in {0, 1/(1−p)}.
struct DropoutMask {
  double p = 0.0;
  std::vector<std::vector<double>> masks;

  static DropoutMask sample(std::span<const std::size_t> layer_dims, double p,
                            const rng::RngStream& rng);
};

struct ForwardCache {
  /// inputs[l] is what layer l consumed (after activation and dropout).
  std::vector<std::vector<double>> inputs;
  /// Pre-activations of each hidden layer.
  std::vector<std::vector<double>> pre_activations;
  /// Dropout masks as applied; empty in inference mode.
  std::vector<std::vector<double>> masks;
};

struct ForwardResult {
  std::vector<double> outputs;
  ForwardCache cache;
};

/// (cosγ, sinγ, cosθ, sinθ, cosα, sinα).
std::array<double, kFeatureDim> encode_features(const physics::GateSpec& g);

/// x·Φ(x) with Φ the standard normal CDF.
double gelu(double x);
double gelu_derivative(double x);

ForwardResult mlp_forward(const MlpParams& params, std::span<const double> x,
                          const DropoutMask* mask = nullptr);

/// Gradients of Σ_t grad_out[t]·output[t] with respect to every parameter.
MlpGradients mlp_backward(const MlpParams& params, const ForwardCache& cache,
                          std::span<const double> grad_out);

/// into += scale·g.
void accumulate(MlpGradients& into, const MlpGradients& g, double scale = 1.0);

struct AdamWState {
  std::uint64_t step = 0;
  MlpParams m;
  MlpParams v;
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;

  static AdamWState create(const MlpParams& params, double lr, double weight_decay);
  void validate() const;
};

/// Bias-corrected moments, then θ ← θ − lr·(m̂/(√v̂ + eps) + weight_decay·θ).
void adamw_step(MlpParams& params, const MlpGradients& grads, AdamWState& state);

/// Weights uniform in ±sqrt(6/(fan_in + fan_out)), zero biases. Pure function
/// of (seed, layer_dims).
MlpParams init_params(std::uint64_t seed, std::span<const std::size_t> layer_dims);

}  // namespace nmrpulse::nn
