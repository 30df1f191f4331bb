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

// Run configuration: JSON schema, defaults and validation.
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "nmrpulse/physics.hpp"
#include "nmrpulse/risk.hpp"
#include "nmrpulse/uncertainty.hpp"

namespace nmrpulse::config {

struct SystemConfig {
  physics::SystemParams params = physics::SystemParams::nmr_defaults();
  double amplitude_khz = physics::kDefaultAmplitudeKhz;
  double dt_ms = physics::kDefaultDtMs;
  std::size_t t_slices = physics::kDefaultSlices;
};

struct NetworkConfig {
  std::size_t width = 256;
  std::size_t hidden_layers = 5;
  double dropout = 0.5;
  std::size_t n_gates = 512;
  std::size_t batch_size = 512;
  std::size_t epochs = 500;
  double lr = 5e-4;
  double weight_decay = 1e-3;
  double degmax_deg = 90.0;
  std::size_t validation_gates = 64;
  /// 0 disables validation logging.
  std::size_t validate_every = 10;
};

struct RobustConfig {
  double lr = 1e-3;
  double weight_decay = 1e-3;
  std::size_t epochs = 500;
  std::size_t batch_size = 128;
  std::size_t scenarios_per_example = 32;
  risk::RiskConfig risk;
  physics::CouplingModel coupling_model = physics::CouplingModel::kZZ;
};

struct SweepConfig {
  std::size_t gate_set_size = 128;
  double degmax_deg = 90.0;
  int repeats = 16;
  physics::CouplingModel coupling_model = physics::CouplingModel::kZZ;
};

struct RunConfig {
  SystemConfig system;
  NetworkConfig network;
  RobustConfig robust;
  uncertainty::NoiseConfig noise = uncertainty::NoiseConfig::table_defaults();
  SweepConfig sweep;

  /// Throws ConfigError.
  void validate() const;
};

/// Missing keys take their defaults; unknown keys are rejected.
/// Throws ConfigError on malformed JSON or invalid values.
RunConfig parse_run_config(const std::string& json_text);
/// Throws IoError when the file cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);
/// Canonical JSON (sorted keys, shortest round-trip numbers, degrees for angles).
std::string dump_run_config(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over the canonical dump.
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(const std::string& bytes);

}  // namespace nmrpulse::config
