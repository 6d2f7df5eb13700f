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

// Calibration file: a JSON object with a schema tag and version, a
// "calibration" block (CalibrationTable) and a "hardware" block
// (HardwareConfig defaults). Missing keys keep their defaults; unknown keys
// are errors.
//
//   {
//     "schema": "lraf-calibration",
//     "schema_version": 1,
//     "calibration": { "k_omega": 6.25e13, ... },
//     "hardware": { "i_bias": 1e-9, ... }
//   }

#include <initializer_list>
#include <string>
#include <utility>

#include <json.hpp>

#include "lraf/error.hpp"
#include "lraf/hardware.hpp"
#include "lraf/io.hpp"

namespace lraf {

inline constexpr int kCalibrationSchemaVersion = 1;

namespace detail {

using Json = nlohmann::json;

struct DoubleField {
  const char* key;
  double* slot;
};

inline void read_fields(const Json& obj, std::initializer_list<DoubleField> fields,
                        const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    const DoubleField* match = nullptr;
    for (const auto& f : fields) {
      if (key == f.key) match = &f;
    }
    if (match == nullptr) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
    if (!value.is_number()) {
      throw ConfigError(where + "." + key + ": expected a number");
    }
    *match->slot = value.get<double>();
  }
}

inline void check_schema(const Json& doc, const char* schema, int version,
                         const std::string& where) {
  if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");
  if (!doc.contains("schema") || doc["schema"] != schema) {
    throw ConfigError(where + ": missing or wrong 'schema' (expected \"" +
                      std::string(schema) + "\")");
  }
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != version) {
    throw ConfigError(where + ": unsupported 'schema_version' (expected " +
                      std::to_string(version) + ")");
  }
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace detail

inline void read_calibration(const nlohmann::json& obj, CalibrationTable& c,
                             const std::string& where) {
  detail::read_fields(
      obj,
      {{"k_omega", &c.k_omega},
       {"k_leak", &c.k_leak},
       {"p_slope", &c.p_slope},
       {"p_static", &c.p_static},
       {"gm_linear_low", &c.gm_linear_low},
       {"gm_linear_high", &c.gm_linear_high},
       {"i_bias_min", &c.i_bias_min},
       {"i_bias_max", &c.i_bias_max},
       {"f_sc_min", &c.f_sc_min},
       {"f_sc_max", &c.f_sc_max},
       {"mismatch_sigma_omega", &c.mismatch_sigma_omega},
       {"mismatch_sigma_tau", &c.mismatch_sigma_tau},
       {"noise_sigma", &c.noise_sigma}},
      where);
}

inline void read_hardware(const nlohmann::json& obj, HardwareConfig& h,
                          const std::string& where) {
  detail::read_fields(obj,
                      {{"i_bias", &h.i_bias},
                       {"f_sc_u", &h.f_sc_u},
                       {"f_sc_v", &h.f_sc_v},
                       {"c_state", &h.c_state},
                       {"c_fringe", &h.c_fringe},
                       {"v_dd", &h.v_dd},
                       {"v_cm", &h.v_cm}},
                      where);
}

inline nlohmann::json calibration_to_json(const CalibrationTable& c) {
  return {{"k_omega", c.k_omega},
          {"k_leak", c.k_leak},
          {"p_slope", c.p_slope},
          {"p_static", c.p_static},
          {"gm_linear_low", c.gm_linear_low},
          {"gm_linear_high", c.gm_linear_high},
          {"i_bias_min", c.i_bias_min},
          {"i_bias_max", c.i_bias_max},
          {"f_sc_min", c.f_sc_min},
          {"f_sc_max", c.f_sc_max},
          {"mismatch_sigma_omega", c.mismatch_sigma_omega},
          {"mismatch_sigma_tau", c.mismatch_sigma_tau},
          {"noise_sigma", c.noise_sigma}};
}

inline nlohmann::json hardware_to_json(const HardwareConfig& h) {
  return {{"i_bias", h.i_bias}, {"f_sc_u", h.f_sc_u},     {"f_sc_v", h.f_sc_v},
          {"c_state", h.c_state}, {"c_fringe", h.c_fringe}, {"v_dd", h.v_dd},
          {"v_cm", h.v_cm}};
}

inline nlohmann::json hardware_config_document(const HardwareConfig& h) {
  return {{"schema", "lraf-calibration"},
          {"schema_version", kCalibrationSchemaVersion},
          {"calibration", calibration_to_json(h.calibration)},
          {"hardware", hardware_to_json(h)}};
}

inline HardwareConfig hardware_config_from_json(const nlohmann::json& doc,
                                                const std::string& where) {
  detail::check_schema(doc, "lraf-calibration", kCalibrationSchemaVersion, where);
  HardwareConfig h;
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema" || key == "schema_version") continue;
    if (key == "calibration") {
      read_calibration(value, h.calibration, where + ".calibration");
    } else if (key == "hardware") {
      read_hardware(value, h, where + ".hardware");
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  h.validate();
  return h;
}

inline HardwareConfig load_hardware_config(const std::string& path) {
  return hardware_config_from_json(detail::parse_json(read_file(path), path), path);
}

inline void save_hardware_config(const std::string& path, const HardwareConfig& h) {
  write_file(path, hardware_config_document(h).dump(2) + "\n");
}

}  // namespace lraf
