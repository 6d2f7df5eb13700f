// Copyright 2026 The lraf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Model checkpoint (JSON):
//
//   {
//     "schema": "lraf-checkpoint", "schema_version": 1,
//     "network": { "n_inputs": 32, "n_hidden": 32, "n_classes": 4, "recurrent": true,
//                  "dt": 1e-4, "readout_tau": 0.02, "readout": "spikes",
//                  "level": "ideal", "mismatch_seed": 0,
//                  "neurons": [{"omega_u": ..., "omega_v": ..., "tau_u": ..., "tau_v": ...,
//                               "theta": ...}, ...],
//                  "hardware": { <calibration document> } },
//     "quantized": true,
//     "weights": { "input": {"rows": R, "cols": C, "scale": s, "codes": [...], "values": [...]},
//                  "recurrent": {...}, "output": {...} },
//     "training_seed": 0,
//     "class_names": ["120Hz", ...]
//   }
//
// Infinite time constants are stored as null. "values" are the full-precision
// master weights; "codes" and "scale" are their 8-bit form and must agree
// with them on load.

#include <cmath>
#include <filesystem>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lraf/config_io.hpp"
#include "lraf/network.hpp"
#include "lraf/quantize.hpp"

namespace lraf {

inline constexpr int kCheckpointSchemaVersion = 1;

struct Checkpoint {
  NetworkSpec spec;
  NetworkWeights weights;
  bool quantized = true;
  std::uint64_t training_seed = 0;
  std::vector<std::string> class_names;

  Network network() const { return Network(spec, weights, quantized); }
};

namespace detail {

inline Json time_constant_json(double tau) { return std::isinf(tau) ? Json(nullptr) : Json(tau); }

inline double time_constant_from(const Json& j, const std::string& where) {
  if (j.is_null()) return kNoDecay;
  if (!j.is_number()) throw ConfigError(where + ": expected a number or null");
  return j.get<double>();
}

inline const Json& member(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ConfigError(where + ": missing '" + key + "'");
  }
  return obj[key];
}

template <typename T>
T member_as(const Json& obj, const char* key, const std::string& where) {
  const Json& j = member(obj, key, where);
  try {
    return j.get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

inline Json tensor_json(const Matrix& m) {
  const QuantizedWeightMatrix q = quantize(m);
  Json codes = Json::array();
  for (auto c : q.codes) codes.push_back(static_cast<int>(c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"scale", q.scale},
          {"codes", codes},   {"values", m.data()}};
}

inline Matrix tensor_from(const Json& j, const std::string& where) {
  const auto rows = member_as<std::size_t>(j, "rows", where);
  const auto cols = member_as<std::size_t>(j, "cols", where);
  const auto values = member_as<std::vector<double>>(j, "values", where);
  const auto codes = member_as<std::vector<int>>(j, "codes", where);
  const auto scale = member_as<double>(j, "scale", where);
  if (values.size() != rows * cols || codes.size() != values.size()) {
    throw ConfigError(where + ": tensor size does not match rows x cols");
  }
  Matrix m(rows, cols);
  m.data() = values;
  const QuantizedWeightMatrix q = quantize(m);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] != q.codes[i]) throw ConfigError(where + ": codes disagree with values");
  }
  if (q.scale != scale) throw ConfigError(where + ": scale disagrees with values");
  return m;
}

}  // namespace detail

inline nlohmann::json checkpoint_to_json(const Checkpoint& c) {
  using detail::Json;
  const NetworkSpec& s = c.spec;
  Json neurons = Json::array();
  for (const auto& p : s.neurons) {
    neurons.push_back({{"omega_u", p.omega_u},
                       {"omega_v", p.omega_v},
                       {"tau_u", detail::time_constant_json(p.tau_u)},
                       {"tau_v", detail::time_constant_json(p.tau_v)},
                       {"theta", p.theta}});
  }
  return {{"schema", "lraf-checkpoint"},
          {"schema_version", kCheckpointSchemaVersion},
          {"network",
           {{"n_inputs", s.n_inputs},
            {"n_hidden", s.n_hidden},
            {"n_classes", s.n_classes},
            {"recurrent", s.recurrent},
            {"dt", s.dt},
            {"readout_tau", s.readout_tau},
            {"readout", to_string(s.readout)},
            {"level", to_string(s.level)},
            {"mismatch_seed", s.mismatch_seed},
            {"neurons", neurons},
            {"hardware", hardware_config_document(s.hardware)}}},
          {"quantized", c.quantized},
          {"weights",
           {{"input", detail::tensor_json(c.weights.input)},
            {"recurrent", detail::tensor_json(c.weights.recurrent)},
            {"output", detail::tensor_json(c.weights.output)}}},
          {"training_seed", c.training_seed},
          {"class_names", c.class_names}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& doc, const std::string& where) {
  using detail::member;
  using detail::member_as;
  detail::check_schema(doc, "lraf-checkpoint", kCheckpointSchemaVersion, where);
  Checkpoint c;
  const auto& net = member(doc, "network", where);
  const std::string nw = where + ".network";
  NetworkSpec& s = c.spec;
  s.n_inputs = member_as<std::size_t>(net, "n_inputs", nw);
  s.n_hidden = member_as<std::size_t>(net, "n_hidden", nw);
  s.n_classes = member_as<std::size_t>(net, "n_classes", nw);
  s.recurrent = member_as<bool>(net, "recurrent", nw);
  s.dt = member_as<double>(net, "dt", nw);
  s.readout_tau = member_as<double>(net, "readout_tau", nw);
  s.readout = parse_readout(member_as<std::string>(net, "readout", nw));
  s.level = parse_level(member_as<std::string>(net, "level", nw));
  s.mismatch_seed = member_as<std::uint64_t>(net, "mismatch_seed", nw);
  const auto& neurons = member(net, "neurons", nw);
  if (!neurons.is_array()) throw ConfigError(nw + ".neurons: expected an array");
  for (std::size_t i = 0; i < neurons.size(); ++i) {
    const auto& n = neurons[i];
    const std::string w = nw + ".neurons[" + std::to_string(i) + "]";
    s.neurons.push_back({member_as<double>(n, "omega_u", w), member_as<double>(n, "omega_v", w),
                         detail::time_constant_from(member(n, "tau_u", w), w + ".tau_u"),
                         detail::time_constant_from(member(n, "tau_v", w), w + ".tau_v"),
                         member_as<double>(n, "theta", w)});
  }
  s.hardware = hardware_config_from_json(member(net, "hardware", nw), nw + ".hardware");
  s.validate();
  c.quantized = member_as<bool>(doc, "quantized", where);
  const auto& w = member(doc, "weights", where);
  c.weights.input = detail::tensor_from(member(w, "input", where + ".weights"), where + ".weights.input");
  c.weights.recurrent =
      detail::tensor_from(member(w, "recurrent", where + ".weights"), where + ".weights.recurrent");
  c.weights.output =
      detail::tensor_from(member(w, "output", where + ".weights"), where + ".weights.output");
  c.training_seed = member_as<std::uint64_t>(doc, "training_seed", where);
  c.class_names = member_as<std::vector<std::string>>(doc, "class_names", where);
  if (c.class_names.size() != s.n_classes) {
    throw ConfigError(where + ": class_names does not match n_classes");
  }
  c.network();  // shape check
  return c;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  write_file(path, checkpoint_to_json(c).dump(1) + "\n");
}

inline Checkpoint load_checkpoint(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("checkpoint '" + path + "' does not exist (run the train subcommand first)");
  }
  return checkpoint_from_json(detail::parse_json(read_file(path), path), path);
}

}  // namespace lraf
