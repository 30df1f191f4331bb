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

#include "nmrpulse/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "nmrpulse/errors.hpp"
#include "nmrpulse/uncertainty.hpp"

namespace nmrpulse::io {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

json matrix_rows(const std::vector<double>& w, std::size_t rows, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    out.push_back(std::vector<double>(w.begin() + static_cast<std::ptrdiff_t>(r * cols),
                                      w.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)));
  }
  return out;
}

json tensors_to_json(const nn::MlpParams& p) {
  json weights = json::array();
  for (std::size_t l = 0; l < p.num_layers(); ++l) {
    weights.push_back(matrix_rows(p.weights[l], p.layer_dims[l + 1], p.layer_dims[l]));
  }
  return {{"weights", weights}, {"biases", p.biases}};
}

void tensors_from_json(const json& j, nn::MlpParams& p) {
  const auto& weights = j.at("weights");
  p.weights.clear();
  for (const auto& layer : weights) {
    std::vector<double> flat;
    for (const auto& row : layer) {
      for (const auto& x : row) flat.push_back(x.get<double>());
    }
    p.weights.push_back(std::move(flat));
  }
  p.biases = j.at("biases").get<std::vector<std::vector<double>>>();
  // Out-of-range literals such as 1e999 parse to inf.
  auto finite = [](const std::vector<std::vector<double>>& t) {
    for (const auto& v : t) {
      for (double x : v) {
        if (!std::isfinite(x)) return false;
      }
    }
    return true;
  };
  if (!finite(p.weights) || !finite(p.biases)) throw IoError("non-finite parameter");
}

template <typename F>
auto guarded(const char* what, F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string serialize_checkpoint(const Checkpoint& ck) {
  json j = tensors_to_json(ck.params);
  j["layer_dims"] = ck.params.layer_dims;
  j["seed"] = ck.seed;
  j["schema_version"] = ck.schema_version;
  j["stage"] = ck.stage;
  j["config_hash"] = ck.config_hash;
  if (ck.optimizer) {
    const nn::AdamWState& s = *ck.optimizer;
    j["optimizer_state"] = {{"step", s.step},
                            {"lr", s.lr},
                            {"beta1", s.beta1},
                            {"beta2", s.beta2},
                            {"eps", s.eps},
                            {"weight_decay", s.weight_decay},
                            {"m", tensors_to_json(s.m)},
                            {"v", tensors_to_json(s.v)}};
  } else {
    j["optimizer_state"] = nullptr;
  }
  return dump(j);
}

Checkpoint parse_checkpoint(const std::string& text) {
  return guarded("checkpoint", [&] {
    const json j = json::parse(text);
    Checkpoint ck;
    ck.schema_version = j.at("schema_version").get<int>();
    if (ck.schema_version != kCheckpointSchema) {
      throw IoError("unsupported checkpoint schema_version " + std::to_string(ck.schema_version));
    }
    ck.params.layer_dims = j.at("layer_dims").get<std::vector<std::size_t>>();
    tensors_from_json(j, ck.params);
    ck.params.validate();
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.stage = j.value("stage", std::string("nominal"));
    ck.config_hash = j.value("config_hash", std::string());
    const json& opt = j.at("optimizer_state");
    if (!opt.is_null()) {
      nn::AdamWState s;
      s.step = opt.at("step").get<std::uint64_t>();
      s.lr = opt.at("lr").get<double>();
      s.beta1 = opt.at("beta1").get<double>();
      s.beta2 = opt.at("beta2").get<double>();
      s.eps = opt.at("eps").get<double>();
      s.weight_decay = opt.at("weight_decay").get<double>();
      s.m.layer_dims = ck.params.layer_dims;
      s.v.layer_dims = ck.params.layer_dims;
      tensors_from_json(opt.at("m"), s.m);
      tensors_from_json(opt.at("v"), s.v);
      s.validate();
      ck.optimizer = std::move(s);
    }
    return ck;
  });
}

PulseFile make_pulse_file(double gamma_deg, double theta_deg, double alpha_deg,
                          const pipeline::CompiledGate& compiled, const std::string& model_hash,
                          std::uint64_t seed) {
  PulseFile pf;
  pf.gamma_deg = gamma_deg;
  pf.theta_deg = theta_deg;
  pf.alpha_deg = alpha_deg;
  pf.t_slices = compiled.pulse.t_slices();
  pf.dt_ms = compiled.pulse.dt;
  pf.amplitude_khz = compiled.pulse.amplitude;
  pf.phases_rad = compiled.pulse.phases;
  for (double p : pf.phases_rad) pf.phases_deg.push_back(p / kDeg);
  pf.nominal_fidelity = compiled.fidelity;
  pf.model_hash = model_hash;
  pf.seed = seed;
  return pf;
}

std::string serialize_pulse_file(const PulseFile& pf) {
  json j;
  j["schema_version"] = pf.schema_version;
  j["gate"] = {{"gamma_deg", pf.gamma_deg}, {"theta_deg", pf.theta_deg}, {"alpha_deg", pf.alpha_deg}};
  j["t_slices"] = pf.t_slices;
  j["dt_ms"] = pf.dt_ms;
  j["amplitude_khz"] = pf.amplitude_khz;
  j["phases_rad"] = pf.phases_rad;
  j["phases_deg"] = pf.phases_deg;
  j["nominal_fidelity"] = pf.nominal_fidelity;
  j["model_hash"] = pf.model_hash;
  j["seed"] = pf.seed;
  return dump(j);
}

PulseFile parse_pulse_file(const std::string& text) {
  return guarded("pulse file", [&] {
    const json j = json::parse(text);
    PulseFile pf;
    pf.schema_version = j.at("schema_version").get<int>();
    if (pf.schema_version != kPulseSchema) throw IoError("unsupported pulse schema_version");
    const json& g = j.at("gate");
    pf.gamma_deg = g.at("gamma_deg").get<double>();
    pf.theta_deg = g.at("theta_deg").get<double>();
    pf.alpha_deg = g.at("alpha_deg").get<double>();
    pf.t_slices = j.at("t_slices").get<std::size_t>();
    pf.dt_ms = j.at("dt_ms").get<double>();
    pf.amplitude_khz = j.at("amplitude_khz").get<double>();
    pf.phases_rad = j.at("phases_rad").get<std::vector<double>>();
    pf.phases_deg = j.at("phases_deg").get<std::vector<double>>();
    pf.nominal_fidelity = j.at("nominal_fidelity").get<double>();
    pf.model_hash = j.at("model_hash").get<std::string>();
    pf.seed = j.at("seed").get<std::uint64_t>();
    if (pf.phases_rad.size() != pf.t_slices || pf.phases_deg.size() != pf.t_slices) {
      throw IoError("pulse arrays must have t_slices entries");
    }
    for (std::size_t t = 0; t < pf.t_slices; ++t) {
      if (std::abs(pf.phases_rad[t] / kDeg - pf.phases_deg[t]) > 1e-9 * std::max(1.0, std::abs(pf.phases_deg[t]))) {
        throw IoError("phases_rad and phases_deg disagree at slice " + std::to_string(t));
      }
    }
    return pf;
  });
}

std::string pulse_csv(const PulseFile& pf) {
  std::string out = "slice_index,phase_rad\n";
  for (std::size_t t = 0; t < pf.phases_rad.size(); ++t) {
    out += std::to_string(t) + "," + format_double(pf.phases_rad[t]) + "\n";
  }
  return out;
}

std::string curve_csv(std::span<const pipeline::EpochRecord> curve) {
  std::string out = "epoch,objective,mean_loss,validation_fidelity\n";
  for (const auto& r : curve) {
    out += std::to_string(r.epoch) + "," + format_double(r.objective) + "," +
           format_double(r.mean_loss) + "," +
           (std::isnan(r.validation_fidelity) ? std::string() : format_double(r.validation_fidelity)) +
           "\n";
  }
  return out;
}

std::string eval_csv(const pipeline::EvalReport& report) {
  std::string out = "gamma_deg,theta_deg,alpha_deg,fidelity\n";
  for (std::size_t i = 0; i < report.gates.size(); ++i) {
    const auto& g = report.gates[i];
    out += format_double(g.gamma / kDeg) + "," + format_double(g.theta / kDeg) + "," +
           format_double(g.alpha / kDeg) + "," + format_double(report.fidelities[i]) + "\n";
  }
  return out;
}

std::string eval_summary_json(const pipeline::EvalReport& report, double mesh_deg,
                              double degmax_deg, const std::string& model_hash) {
  json j;
  j["summary"] = {{"mean", report.summary.mean},
                  {"median", report.summary.median},
                  {"min", report.summary.min},
                  {"max", report.summary.max}};
  j["n_gates"] = report.gates.size();
  j["mesh_deg"] = mesh_deg;
  j["degmax_deg"] = degmax_deg;
  j["config_hash"] = report.config_hash;
  j["model_hash"] = model_hash;
  j["seed"] = report.seed;
  j["revision"] = report.revision;
  return dump(j);
}

std::string sweep_csv(std::span<const pipeline::SweepRow> rows,
                      std::span<const std::string> model_names) {
  // (channel, value) keeps first-seen order; each model fills its own column.
  struct Cell {
    uncertainty::SweepChannel channel;
    double value;
    std::map<std::string, pipeline::Summary> by_model;
  };
  std::vector<Cell> cells;
  for (const auto& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) {
      return c.channel == r.channel && c.value == r.value;
    });
    if (it == cells.end()) {
      cells.push_back({r.channel, r.value, {}});
      it = cells.end() - 1;
    }
    it->by_model[r.model] = r.summary;
  }
  std::string out = "channel,value,statistic";
  for (const auto& name : model_names) out += "," + name;
  out += "\n";
  static constexpr const char* kStats[] = {"Mean", "Median", "Min", "Max"};
  for (const auto& c : cells) {
    const double shown = uncertainty::is_angular(c.channel) ? c.value / kDeg : c.value;
    for (int s = 0; s < 4; ++s) {
      out += uncertainty::to_string(c.channel) + "," + format_double(shown) + "," + kStats[s];
      for (const auto& name : model_names) {
        const auto it = c.by_model.find(name);
        if (it == c.by_model.end()) {
          out += ",";
          continue;
        }
        const pipeline::Summary& m = it->second;
        const double v = s == 0 ? m.mean : s == 1 ? m.median : s == 2 ? m.min : m.max;
        out += "," + format_double(v);
      }
      out += "\n";
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace nmrpulse::io
