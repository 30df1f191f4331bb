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

#include "nmrpulse/risk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::risk {

namespace {

void require_nonempty(const LossBatch& batch, const char* what) {
  if (batch.losses.empty()) throw EmptyInput(std::string(what) + ": empty loss batch");
}

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("risk alpha must lie in (0, 1]");
}

void require_length(std::span<const double> phases, const char* what) {
  if (phases.size() < 2) throw TooShort(std::string(what) + ": need at least two slices");
}

// DFT bins k in (cutoff·T/2, T/2].
struct Band {
  std::size_t first;
  std::size_t last;
};

Band high_band(std::size_t n, double cutoff_fraction) {
  if (!(cutoff_fraction > 0.0 && cutoff_fraction < 1.0)) {
    throw ConfigError("spectral cutoff fraction must lie in (0, 1)");
  }
  const double threshold = cutoff_fraction * (static_cast<double>(n) / 2.0);
  return {static_cast<std::size_t>(std::floor(threshold)) + 1, n / 2};
}

// Interior bins stand for a conjugate pair; the Nyquist bin is its own partner.
double multiplicity(std::size_t k, std::size_t n) { return 2 * k == n ? 1.0 : 2.0; }

double twiddle_angle(std::size_t k, std::size_t t, std::size_t n) {
  return 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
}

// Σ_t φ_t e^{-2πi kt/n} as (re, im).
std::pair<double, double> dft_bin(std::span<const double> phases, std::size_t k) {
  const std::size_t n = phases.size();
  double re = 0.0;
  double im = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double angle = twiddle_angle(k, t, n);
    re += phases[t] * std::cos(angle);
    im -= phases[t] * std::sin(angle);
  }
  return {re, im};
}

}  // namespace

std::string to_string(RiskKind kind) {
  switch (kind) {
    case RiskKind::kMean:
      return "mean";
    case RiskKind::kWorst:
      return "worst";
    case RiskKind::kRuCvar:
      break;
  }
  return "rucvar";
}

RiskKind risk_kind_from_string(const std::string& name) {
  if (name == "mean") return RiskKind::kMean;
  if (name == "worst") return RiskKind::kWorst;
  if (name == "rucvar") return RiskKind::kRuCvar;
  throw ConfigError("unknown risk kind '" + name + "' (expected mean|worst|rucvar)");
}

void RiskConfig::validate() const {
  require_alpha(alpha);
  if (!(lambda_tv >= 0.0) || !(lambda_spec >= 0.0)) {
    throw ConfigError("regularizer weights must be >= 0");
  }
  if (!(spec_cutoff_fraction > 0.0 && spec_cutoff_fraction < 1.0)) {
    throw ConfigError("spectral cutoff fraction must lie in (0, 1)");
  }
}

LossBatch::LossBatch(std::size_t batch_, std::size_t scenarios_, std::vector<double> losses_)
    : batch(batch_), scenarios(scenarios_), losses(std::move(losses_)) {
  if (losses.size() != batch * scenarios) throw ShapeMismatch("LossBatch: size != B*S");
  // 1 − F may round a hair outside [0, 1].
  for (double l : losses) {
    if (!(l >= -1e-9 && l <= 1.0 + 1e-9)) throw Error("LossBatch: loss outside [0, 1]");
  }
}

LossBatch LossBatch::flat(std::vector<double> losses) {
  const std::size_t n = losses.size();
  return LossBatch(1, n, std::move(losses));
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw EmptyInput("quantile: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

RuCvarResult rucvar(const LossBatch& batch, double alpha) {
  require_alpha(alpha);
  require_nonempty(batch, "rucvar");
  RuCvarResult out;
  out.t = quantile(batch.losses, 1.0 - alpha);
  out.tail_mask.resize(batch.size());
  double excess = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double l = batch.losses[k];
    out.tail_mask[k] = l > out.t;
    excess += std::max(0.0, l - out.t);
  }
  out.rho = out.t + excess / (alpha * static_cast<double>(batch.size()));
  return out;
}

std::vector<double> rucvar_loss_gradient(const LossBatch& batch, double alpha) {
  const RuCvarResult r = rucvar(batch, alpha);
  const double weight = 1.0 / (alpha * static_cast<double>(batch.size()));
  std::vector<double> grad(batch.size(), 0.0);
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (r.tail_mask[k]) grad[k] = weight;
  }
  return grad;
}

double aggregate(const LossBatch& batch, const RiskConfig& cfg) {
  require_nonempty(batch, "aggregate");
  switch (cfg.kind) {
    case RiskKind::kMean:
      return std::accumulate(batch.losses.begin(), batch.losses.end(), 0.0) /
             static_cast<double>(batch.size());
    case RiskKind::kWorst:
      return *std::max_element(batch.losses.begin(), batch.losses.end());
    case RiskKind::kRuCvar:
      break;
  }
  return rucvar(batch, cfg.alpha).rho;
}

std::vector<double> aggregate_gradient(const LossBatch& batch, const RiskConfig& cfg) {
  require_nonempty(batch, "aggregate_gradient");
  const double n = static_cast<double>(batch.size());
  switch (cfg.kind) {
    case RiskKind::kMean:
      return std::vector<double>(batch.size(), 1.0 / n);
    case RiskKind::kWorst: {
      std::vector<double> grad(batch.size(), 0.0);
      const auto it = std::max_element(batch.losses.begin(), batch.losses.end());
      grad[static_cast<std::size_t>(it - batch.losses.begin())] = 1.0;
      return grad;
    }
    case RiskKind::kRuCvar:
      break;
  }
  if (cfg.alpha == 1.0) return std::vector<double>(batch.size(), 1.0 / n);
  return rucvar_loss_gradient(batch, cfg.alpha);
}

double tv_penalty(std::span<const double> phases) {
  require_length(phases, "tv_penalty");
  double sum = 0.0;
  for (std::size_t t = 0; t + 1 < phases.size(); ++t) sum += std::abs(phases[t + 1] - phases[t]);
  return sum / static_cast<double>(phases.size() - 1);
}

std::vector<double> tv_penalty_gradient(std::span<const double> phases) {
  require_length(phases, "tv_penalty_gradient");
  const double scale = 1.0 / static_cast<double>(phases.size() - 1);
  std::vector<double> grad(phases.size(), 0.0);
  for (std::size_t t = 0; t + 1 < phases.size(); ++t) {
    const double diff = phases[t + 1] - phases[t];
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    grad[t + 1] += sign * scale;
    grad[t] -= sign * scale;
  }
  return grad;
}

double spectral_penalty(std::span<const double> phases, double cutoff_fraction) {
  require_length(phases, "spectral_penalty");
  const std::size_t n = phases.size();
  const Band band = high_band(n, cutoff_fraction);
  double energy = 0.0;
  for (std::size_t k = band.first; k <= band.last; ++k) {
    const auto [re, im] = dft_bin(phases, k);
    energy += multiplicity(k, n) * (re * re + im * im);
  }
  return energy / (static_cast<double>(n) * static_cast<double>(n));
}

std::vector<double> spectral_penalty_gradient(std::span<const double> phases,
                                              double cutoff_fraction) {
  require_length(phases, "spectral_penalty_gradient");
  const std::size_t n = phases.size();
  const Band band = high_band(n, cutoff_fraction);
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<double> grad(n, 0.0);
  // ∂|X_k|²/∂φ_t = 2·Re(conj(X_k)·e^{-2πi kt/n})
  for (std::size_t k = band.first; k <= band.last; ++k) {
    const auto [re, im] = dft_bin(phases, k);
    const double w = 2.0 * multiplicity(k, n) * norm;
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = twiddle_angle(k, t, n);
      grad[t] += w * (re * std::cos(angle) - im * std::sin(angle));
    }
  }
  return grad;
}

double objective(const LossBatch& batch, std::span<const std::vector<double>> phases_per_example,
                 const RiskConfig& cfg) {
  cfg.validate();
  double value = aggregate(batch, cfg);
  if (phases_per_example.empty()) return value;
  const double inv = 1.0 / static_cast<double>(phases_per_example.size());
  for (const auto& phases : phases_per_example) {
    if (cfg.lambda_tv != 0.0) value += cfg.lambda_tv * inv * tv_penalty(phases);
    if (cfg.lambda_spec != 0.0) {
      value += cfg.lambda_spec * inv * spectral_penalty(phases, cfg.spec_cutoff_fraction);
    }
  }
  return value;
}

}  // namespace nmrpulse::risk
