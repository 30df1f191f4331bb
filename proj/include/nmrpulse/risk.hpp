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

// Scenario-loss aggregation and pulse regularizers.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nmrpulse::risk {

enum class RiskKind { kMean, kWorst, kRuCvar };

std::string to_string(RiskKind kind);
RiskKind risk_kind_from_string(const std::string& name);

struct RiskConfig {
  RiskKind kind = RiskKind::kRuCvar;
  double alpha = 0.5;
  double lambda_tv = 2e-4;
  double lambda_spec = 1e-6;
  double spec_cutoff_fraction = 0.2;

  void validate() const;
};

/// B×S scenario losses in [0, 1], row-major (example b, scenario s).
struct LossBatch {
  std::size_t batch = 0;
  std::size_t scenarios = 0;
  std::vector<double> losses;

  LossBatch() = default;
  LossBatch(std::size_t batch, std::size_t scenarios, std::vector<double> losses);
  /// A 1×n batch.
  static LossBatch flat(std::vector<double> losses);

  double at(std::size_t b, std::size_t s) const { return losses[b * scenarios + s]; }
  std::size_t size() const noexcept { return losses.size(); }
};

/// Linear interpolation between order statistics at position q·(n−1).
/// Throws EmptyInput.
double quantile(std::span<const double> values, double q);

struct RuCvarResult {
  double rho = 0.0;
  /// tail_mask[k] = losses[k] > t.
  std::vector<bool> tail_mask;
  double t = 0.0;
};

/// ρ = t + (1/α)·mean(max(0, ℓ − t)) with t the (1−α)-quantile.
RuCvarResult rucvar(const LossBatch& batch, double alpha);

/// ∂ρ/∂ℓ with t held fixed: 1/(α·n) where ℓ > t, else 0.
std::vector<double> rucvar_loss_gradient(const LossBatch& batch, double alpha);

double aggregate(const LossBatch& batch, const RiskConfig& cfg);

/// Gradient of `aggregate` with respect to each loss. For RU-CVaR at α = 1
/// the aggregate is identically the mean, so the exact 1/n weights are
/// returned; otherwise the stop-gradient mask is used.
std::vector<double> aggregate_gradient(const LossBatch& batch, const RiskConfig& cfg);

/// (1/(T−1))·Σ|φ_{t+1} − φ_t|. Throws TooShort when T < 2.
double tv_penalty(std::span<const double> phases);
/// Subgradient with sign(0) = 0.
std::vector<double> tv_penalty_gradient(std::span<const double> phases);

/// Energy of the DFT X_k/T over bins cutoff_fraction·(T/2) < k ≤ T/2, with
/// interior bins doubled for their conjugate partner. Throws TooShort when T < 2.
double spectral_penalty(std::span<const double> phases, double cutoff_fraction);
std::vector<double> spectral_penalty_gradient(std::span<const double> phases,
                                              double cutoff_fraction);

/// aggregate + λ_TV·mean_b(tv) + λ_spec·mean_b(spectral).
double objective(const LossBatch& batch, std::span<const std::vector<double>> phases_per_example,
                 const RiskConfig& cfg);

}  // namespace nmrpulse::risk
