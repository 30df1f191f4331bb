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

#include "nmrpulse/neuralnet.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::nn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ShapeMismatch(what);
}

void require_same_shape(const MlpParams& a, const MlpParams& b, const char* what) {
  require(a.layer_dims == b.layer_dims, std::string(what) + ": layer dims differ");
}

}  // namespace

std::size_t MlpParams::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& w : weights) n += w.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

void MlpParams::validate() const {
  require(layer_dims.size() >= 2, "MlpParams: need at least input and output dims");
  require(weights.size() == layer_dims.size() - 1 && biases.size() == weights.size(),
          "MlpParams: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(weights[l].size() == layer_dims[l] * layer_dims[l + 1],
            "MlpParams: weight shape mismatch at layer " + std::to_string(l));
    require(biases[l].size() == layer_dims[l + 1],
            "MlpParams: bias shape mismatch at layer " + std::to_string(l));
  }
}

MlpParams MlpParams::zeros(std::span<const std::size_t> layer_dims) {
  MlpParams p;
  p.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  require(p.layer_dims.size() >= 2, "MlpParams: need at least input and output dims");
  for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
    p.weights.emplace_back(p.layer_dims[l] * p.layer_dims[l + 1], 0.0);
    p.biases.emplace_back(p.layer_dims[l + 1], 0.0);
  }
  return p;
}

std::vector<std::size_t> make_layer_dims(std::size_t t_slices, std::size_t width,
                                         std::size_t hidden_layers) {
  std::vector<std::size_t> dims{kFeatureDim};
  dims.insert(dims.end(), hidden_layers, width);
  dims.push_back(t_slices);
  return dims;
}

DropoutMask DropoutMask::sample(std::span<const std::size_t> layer_dims, double p,
                                const rng::RngStream& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout p must be in [0, 1)");
  DropoutMask mask;
  mask.p = p;
  const double keep_scale = 1.0 / (1.0 - p);
  for (std::size_t l = 1; l + 1 < layer_dims.size(); ++l) {
    const auto stream = rng.child(l);
    std::vector<double> m(layer_dims[l]);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = stream.uniform(i) < p ? 0.0 : keep_scale;
    mask.masks.push_back(std::move(m));
  }
  return mask;
}

std::array<double, kFeatureDim> encode_features(const physics::GateSpec& g) {
  return {std::cos(g.gamma), std::sin(g.gamma), std::cos(g.theta),
          std::sin(g.theta), std::cos(g.alpha), std::sin(g.alpha)};
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

ForwardResult mlp_forward(const MlpParams& params, std::span<const double> x,
                          const DropoutMask* mask) {
  params.validate();
  require(x.size() == params.layer_dims.front(), "mlp_forward: input dimension mismatch");
  const std::size_t n_layers = params.num_layers();
  if (mask != nullptr) {
    require(mask->masks.size() == n_layers - 1, "mlp_forward: dropout mask layer count");
    for (std::size_t l = 0; l + 1 < n_layers; ++l) {
      require(mask->masks[l].size() == params.layer_dims[l + 1], "mlp_forward: dropout mask width");
    }
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in_dim = params.layer_dims[l];
    const std::size_t out_dim = params.layer_dims[l + 1];
    const std::vector<double>& in = cache.inputs.back();
    const std::vector<double>& w = params.weights[l];
    std::vector<double> z(params.biases[l]);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* row = w.data() + o * in_dim;
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * in[i];
      z[o] += acc;
    }
    if (l + 1 == n_layers) {
      result.outputs = std::move(z);
      break;
    }
    std::vector<double> h(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) h[o] = gelu(z[o]);
    if (mask != nullptr) {
      const auto& m = mask->masks[l];
      for (std::size_t o = 0; o < out_dim; ++o) h[o] *= m[o];
      cache.masks.push_back(m);
    }
    cache.pre_activations.push_back(std::move(z));
    cache.inputs.push_back(std::move(h));
  }
  return result;
}

MlpGradients mlp_backward(const MlpParams& params, const ForwardCache& cache,
                          std::span<const double> grad_out) {
  params.validate();
  const std::size_t n_layers = params.num_layers();
  require(grad_out.size() == params.output_dim(), "mlp_backward: output gradient dimension");
  require(cache.inputs.size() == n_layers && cache.pre_activations.size() == n_layers - 1,
          "mlp_backward: cache does not match network depth");
  const bool masked = !cache.masks.empty();

  MlpGradients grads = MlpParams::zeros(params.layer_dims);
  std::vector<double> delta(grad_out.begin(), grad_out.end());
  for (std::size_t l = n_layers; l-- > 0;) {
    const std::size_t in_dim = params.layer_dims[l];
    const std::size_t out_dim = params.layer_dims[l + 1];
    const std::vector<double>& in = cache.inputs[l];
    std::vector<double>& gw = grads.weights[l];
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double d = delta[o];
      grads.biases[l][o] = d;
      if (d == 0.0) continue;
      double* row = gw.data() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) row[i] = d * in[i];
    }
    if (l == 0) break;
    const std::vector<double>& w = params.weights[l];
    std::vector<double> prev(in_dim, 0.0);
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double* row = w.data() + o * in_dim;
      for (std::size_t i = 0; i < in_dim; ++i) prev[i] += row[i] * d;
    }
    const std::vector<double>& z = cache.pre_activations[l - 1];
    for (std::size_t i = 0; i < in_dim; ++i) {
      prev[i] *= gelu_derivative(z[i]);
      if (masked) prev[i] *= cache.masks[l - 1][i];
    }
    delta = std::move(prev);
  }
  return grads;
}

void accumulate(MlpGradients& into, const MlpGradients& g, double scale) {
  require_same_shape(into, g, "accumulate");
  for (std::size_t l = 0; l < into.weights.size(); ++l) {
    for (std::size_t k = 0; k < into.weights[l].size(); ++k) into.weights[l][k] += scale * g.weights[l][k];
    for (std::size_t k = 0; k < into.biases[l].size(); ++k) into.biases[l][k] += scale * g.biases[l][k];
  }
}

AdamWState AdamWState::create(const MlpParams& params, double lr, double weight_decay) {
  AdamWState s;
  s.m = MlpParams::zeros(params.layer_dims);
  s.v = MlpParams::zeros(params.layer_dims);
  s.lr = lr;
  s.weight_decay = weight_decay;
  return s;
}

void AdamWState::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("AdamW betas must lie in [0, 1)");
  }
  if (!(lr >= 0.0) || !(eps > 0.0) || !(weight_decay >= 0.0)) {
    throw ConfigError("AdamW lr, eps and weight decay must be non-negative (eps > 0)");
  }
}

void adamw_step(MlpParams& params, const MlpGradients& grads, AdamWState& state) {
  state.validate();
  require_same_shape(params, grads, "adamw_step");
  require_same_shape(params, state.m, "adamw_step");
  require_same_shape(params, state.v, "adamw_step");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto update = [&](std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
                    std::vector<double>& v) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= state.lr * (m_hat / (std::sqrt(v_hat) + state.eps) + state.weight_decay * p[k]);
    }
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

MlpParams init_params(std::uint64_t seed, std::span<const std::size_t> layer_dims) {
  MlpParams p = MlpParams::zeros(layer_dims);
  const rng::RngStream base(seed, static_cast<std::uint64_t>(rng::Domain::kInit));
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(p.layer_dims[l] + p.layer_dims[l + 1]));
    const auto stream = base.child(l);
    for (std::size_t k = 0; k < p.weights[l].size(); ++k) {
      p.weights[l][k] = limit * (2.0 * stream.uniform(k) - 1.0);
    }
  }
  return p;
}

}  // namespace nmrpulse::nn
