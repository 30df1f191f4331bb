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

// Checkpoint, pulse and report serialization.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmrpulse/neuralnet.hpp"
#include "nmrpulse/pipeline.hpp"

namespace nmrpulse::io {

inline constexpr int kCheckpointSchema = 1;
inline constexpr int kPulseSchema = 1;

struct Checkpoint {
  nn::MlpParams params;
  std::optional<nn::AdamWState> optimizer;
  std::uint64_t seed = 0;
  int schema_version = kCheckpointSchema;
  std::string stage = "nominal";
  std::string config_hash;
};

std::string serialize_checkpoint(const Checkpoint& ck);
/// Throws IoError on malformed input.
Checkpoint parse_checkpoint(const std::string& text);

struct PulseFile {
  int schema_version = kPulseSchema;
  double gamma_deg = 0.0;
  double theta_deg = 0.0;
  double alpha_deg = 0.0;
  std::size_t t_slices = 0;
  double dt_ms = 0.0;
  double amplitude_khz = 0.0;
  std::vector<double> phases_rad;
  std::vector<double> phases_deg;
  double nominal_fidelity = 0.0;
  std::string model_hash;
  std::uint64_t seed = 0;
};

PulseFile make_pulse_file(double gamma_deg, double theta_deg, double alpha_deg,
                          const pipeline::CompiledGate& compiled, const std::string& model_hash,
                          std::uint64_t seed);
std::string serialize_pulse_file(const PulseFile& pf);
/// Throws IoError on malformed input or inconsistent arrays.
PulseFile parse_pulse_file(const std::string& text);
/// slice_index,phase_rad
std::string pulse_csv(const PulseFile& pf);

std::string curve_csv(std::span<const pipeline::EpochRecord> curve);

/// gamma_deg,theta_deg,alpha_deg,fidelity
std::string eval_csv(const pipeline::EvalReport& report);
std::string eval_summary_json(const pipeline::EvalReport& report, double mesh_deg,
                              double degmax_deg, const std::string& model_hash);

/// channel,value,statistic,<one column per model>; angular values in degrees.
std::string sweep_csv(std::span<const pipeline::SweepRow> rows,
                      std::span<const std::string> model_names);

/// Shortest decimal that parses back to the same double.
std::string format_double(double x);

/// Throws IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace nmrpulse::io
