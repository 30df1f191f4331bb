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

#include "nmrpulse/config.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nmrpulse/errors.hpp"

namespace nmrpulse::config {

using nlohmann::json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Block {
 public:
  Block(const json& root, const char* name) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ConfigError(std::string("'") + name + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (node_ == nullptr || !node_->contains(key)) return;
    try {
      out = node_->at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  void read_count(const char* key, std::size_t& out) {
    double value = static_cast<double>(out);
    read(key, value);
    if (!(value >= 0.0) || value != std::floor(value) || value > 1e12) {
      throw ConfigError(where(key) + " must be a non-negative integer");
    }
    out = static_cast<std::size_t>(value);
  }

  const json* node() const { return node_; }
  void mark(const char* key) { seen_.insert(key); }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& item : node_->items()) {
      if (!seen_.contains(item.key())) throw ConfigError("unknown key " + where(item.key().c_str()));
    }
  }

  std::string where(const char* key) const { return std::string(name_) + "." + key; }

 private:
  const char* name_;
  const json* node_ = nullptr;
  std::set<std::string> seen_;
};

std::string pair_key(const std::pair<int, int>& ij) {
  return std::to_string(ij.first + 1) + "-" + std::to_string(ij.second + 1);
}

std::pair<int, int> parse_pair_key(const std::string& key) {
  int i = 0;
  int j = 0;
  char dash = 0;
  std::istringstream in(key);
  if (!(in >> i >> dash >> j) || dash != '-' || !in.eof() || i < 1 || j < 1 || i == j) {
    throw ConfigError("coupling key '" + key + "' must look like \"1-2\"");
  }
  if (i > j) std::swap(i, j);
  return {i - 1, j - 1};
}

void read_system(const json& root, SystemConfig& s) {
  Block b(root, "system");
  b.read("n_qubits", s.params.n_qubits);
  b.read("v_khz", s.params.v_khz);
  b.mark("j_khz");
  if (b.node() != nullptr && b.node()->contains("j_khz")) {
    const json& j = b.node()->at("j_khz");
    if (!j.is_object()) throw ConfigError("system.j_khz must be an object");
    s.params.j_khz.clear();
    for (const auto& item : j.items()) {
      if (!item.value().is_number()) throw ConfigError("system.j_khz values must be numbers");
      s.params.j_khz[parse_pair_key(item.key())] = item.value().get<double>();
    }
  }
  std::string model = physics::to_string(s.params.coupling_model);
  b.read("coupling_model", model);
  s.params.coupling_model = physics::coupling_model_from_string(model);
  b.read("amplitude_khz", s.amplitude_khz);
  b.read("dt_ms", s.dt_ms);
  b.read_count("t_slices", s.t_slices);
  b.finish();
}

void read_network(const json& root, NetworkConfig& n) {
  Block b(root, "network");
  b.read_count("width", n.width);
  b.read_count("hidden_layers", n.hidden_layers);
  b.read("dropout", n.dropout);
  b.read_count("n_gates", n.n_gates);
  b.read_count("batch_size", n.batch_size);
  b.read_count("epochs", n.epochs);
  b.read("lr", n.lr);
  b.read("weight_decay", n.weight_decay);
  b.read("degmax_deg", n.degmax_deg);
  b.read_count("validation_gates", n.validation_gates);
  b.read_count("validate_every", n.validate_every);
  b.finish();
}

void read_robust(const json& root, RobustConfig& r) {
  Block b(root, "robust");
  b.read("lr", r.lr);
  b.read("weight_decay", r.weight_decay);
  b.read_count("epochs", r.epochs);
  b.read_count("batch_size", r.batch_size);
  b.read_count("scenarios_per_example", r.scenarios_per_example);
  std::string kind = risk::to_string(r.risk.kind);
  b.read("risk", kind);
  r.risk.kind = risk::risk_kind_from_string(kind);
  b.read("alpha", r.risk.alpha);
  b.read("lambda_tv", r.risk.lambda_tv);
  b.read("lambda_spec", r.risk.lambda_spec);
  b.read("spec_cutoff_fraction", r.risk.spec_cutoff_fraction);
  std::string model = physics::to_string(r.coupling_model);
  b.read("coupling_model", model);
  r.coupling_model = physics::coupling_model_from_string(model);
  b.finish();
}

void read_noise(const json& root, uncertainty::NoiseConfig& c) {
  Block b(root, "noise");
  b.read("sigma_v", c.sigma_v);
  b.read("sigma_j", c.sigma_j);
  b.read("sigma_a_bias", c.sigma_a_bias);
  b.read("sigma_a_jit", c.sigma_a_jit);
  double phi0_deg = c.sigma_phi0 / kDeg;
  double phi_jit_deg = c.sigma_phi_jit / kDeg;
  b.read("sigma_phi0_deg", phi0_deg);
  b.read("sigma_phi_jit_deg", phi_jit_deg);
  c.sigma_phi0 = phi0_deg * kDeg;
  c.sigma_phi_jit = phi_jit_deg * kDeg;
  b.read("sigma_dt", c.sigma_dt);
  b.read("sigma_dt_jit", c.sigma_dt_jit);
  b.finish();
}

void read_sweep(const json& root, SweepConfig& s) {
  Block b(root, "sweep");
  b.read_count("gate_set_size", s.gate_set_size);
  b.read("degmax_deg", s.degmax_deg);
  b.read("repeats", s.repeats);
  std::string model = physics::to_string(s.coupling_model);
  b.read("coupling_model", model);
  s.coupling_model = physics::coupling_model_from_string(model);
  b.finish();
}

void require(bool ok, const char* message) {
  if (!ok) throw ConfigError(message);
}

bool degmax_ok(double d) { return d > 0.0 && d <= 180.0; }

}  // namespace

void RunConfig::validate() const {
  system.params.validate();
  require(system.amplitude_khz > 0.0 && std::isfinite(system.amplitude_khz),
          "system.amplitude_khz must be positive");
  require(system.dt_ms > 0.0 && std::isfinite(system.dt_ms), "system.dt_ms must be positive");
  require(system.t_slices >= 2, "system.t_slices must be at least 2");

  require(network.width >= 1 && network.hidden_layers >= 1, "network dims must be positive");
  require(network.dropout >= 0.0 && network.dropout < 1.0, "network.dropout must lie in [0, 1)");
  require(network.n_gates >= 1, "network.n_gates must be positive");
  require(network.batch_size >= 1, "network.batch_size must be positive");
  require(network.lr > 0.0 && network.weight_decay >= 0.0, "network rates out of range");
  require(degmax_ok(network.degmax_deg), "network.degmax_deg must lie in (0, 180]");

  require(robust.lr > 0.0 && robust.weight_decay >= 0.0, "robust rates out of range");
  require(robust.batch_size >= 1, "robust.batch_size must be positive");
  require(robust.scenarios_per_example >= 1, "robust.scenarios_per_example must be positive");
  robust.risk.validate();

  noise.validate();

  require(sweep.gate_set_size >= 1, "sweep.gate_set_size must be positive");
  require(degmax_ok(sweep.degmax_deg), "sweep.degmax_deg must lie in (0, 180]");
  require(sweep.repeats >= 1, "sweep.repeats must be positive");
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  for (const auto& item : root.items()) {
    static const std::set<std::string> kBlocks{"system", "network", "robust", "noise", "sweep"};
    if (!kBlocks.contains(item.key())) throw ConfigError("unknown config block '" + item.key() + "'");
  }
  RunConfig cfg;
  read_system(root, cfg.system);
  read_network(root, cfg.network);
  read_robust(root, cfg.robust);
  read_noise(root, cfg.noise);
  read_sweep(root, cfg.sweep);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  json j;
  json couplings = json::object();
  for (const auto& [ij, value] : cfg.system.params.j_khz) couplings[pair_key(ij)] = value;
  j["system"] = {{"n_qubits", cfg.system.params.n_qubits},
                 {"v_khz", cfg.system.params.v_khz},
                 {"j_khz", couplings},
                 {"coupling_model", physics::to_string(cfg.system.params.coupling_model)},
                 {"amplitude_khz", cfg.system.amplitude_khz},
                 {"dt_ms", cfg.system.dt_ms},
                 {"t_slices", cfg.system.t_slices}};
  const NetworkConfig& n = cfg.network;
  j["network"] = {{"width", n.width},
                  {"hidden_layers", n.hidden_layers},
                  {"dropout", n.dropout},
                  {"n_gates", n.n_gates},
                  {"batch_size", n.batch_size},
                  {"epochs", n.epochs},
                  {"lr", n.lr},
                  {"weight_decay", n.weight_decay},
                  {"degmax_deg", n.degmax_deg},
                  {"validation_gates", n.validation_gates},
                  {"validate_every", n.validate_every}};
  const RobustConfig& r = cfg.robust;
  j["robust"] = {{"lr", r.lr},
                 {"weight_decay", r.weight_decay},
                 {"epochs", r.epochs},
                 {"batch_size", r.batch_size},
                 {"scenarios_per_example", r.scenarios_per_example},
                 {"risk", risk::to_string(r.risk.kind)},
                 {"alpha", r.risk.alpha},
                 {"lambda_tv", r.risk.lambda_tv},
                 {"lambda_spec", r.risk.lambda_spec},
                 {"spec_cutoff_fraction", r.risk.spec_cutoff_fraction},
                 {"coupling_model", physics::to_string(r.coupling_model)}};
  const uncertainty::NoiseConfig& c = cfg.noise;
  j["noise"] = {{"sigma_v", c.sigma_v},
                {"sigma_j", c.sigma_j},
                {"sigma_a_bias", c.sigma_a_bias},
                {"sigma_a_jit", c.sigma_a_jit},
                {"sigma_phi0_deg", c.sigma_phi0 / kDeg},
                {"sigma_phi_jit_deg", c.sigma_phi_jit / kDeg},
                {"sigma_dt", c.sigma_dt},
                {"sigma_dt_jit", c.sigma_dt_jit}};
  j["sweep"] = {{"gate_set_size", cfg.sweep.gate_set_size},
                {"degmax_deg", cfg.sweep.degmax_deg},
                {"repeats", cfg.sweep.repeats},
                {"coupling_model", physics::to_string(cfg.sweep.coupling_model)}};
  return j.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(dump_run_config(cfg)); }

}  // namespace nmrpulse::config
