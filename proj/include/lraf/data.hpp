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

// Spike-event datasets: a synthetic frequency-discrimination task and a
// plain-text event format with a JSON manifest.
//
// Event file (ASCII, LF line ends, one stream per file):
//
//   lraf-events 1
//   n_channels 32
//   duration 0.1
//   label 2
//   time,channel
//   0.0012345,7
//   ...
//
// Times are decimal seconds, nondecreasing, within [0, duration]; channels are
// integers in [0, n_channels). Writers emit the shortest decimal that parses
// back to the same double.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lraf/config_io.hpp"
#include "lraf/error.hpp"
#include "lraf/hardware.hpp"
#include "lraf/io.hpp"
#include "lraf/matrix.hpp"

namespace lraf {

struct ChannelEvent {
  double time = 0.0;
  std::uint32_t channel = 0;
  friend bool operator==(const ChannelEvent&, const ChannelEvent&) = default;
};

struct SpikeEventStream {
  std::vector<ChannelEvent> events;
  std::uint32_t n_channels = 0;
  double duration = 0.0;
  std::uint32_t label = 0;

  // Returns an empty string when valid, else the first violation.
  std::string violation() const {
    if (n_channels == 0) return "n_channels must be >= 1";
    if (!(duration > 0.0) || !std::isfinite(duration)) return "duration must be positive";
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto& e = events[i];
      if (!(e.time >= 0.0) || e.time > duration) {
        return "event " + std::to_string(i) + " time outside [0, duration]";
      }
      if (e.channel >= n_channels) {
        return "event " + std::to_string(i) + " channel out of range";
      }
      if (i > 0 && e.time < events[i - 1].time) {
        return "event " + std::to_string(i) + " time decreases";
      }
    }
    return {};
  }
  void validate() const {
    const std::string v = violation();
    if (!v.empty()) throw ConfigError("invalid spike stream: " + v);
  }
  friend bool operator==(const SpikeEventStream&, const SpikeEventStream&) = default;
};

struct Dataset {
  std::vector<SpikeEventStream> items;
  std::vector<std::string> class_names;

  std::size_t n_classes() const { return class_names.size(); }
  std::uint32_t n_channels() const { return items.empty() ? 0 : items.front().n_channels; }
};

struct FrequencyTaskConfig {
  std::vector<double> frequencies;  // Hz, one per class
  std::size_t items_per_class = 100;
  std::uint32_t n_channels = 32;
  double duration = 0.1;      // s
  double jitter = 0.02;       // relative std of the per-item frequency
  double depth = 0.8;         // rate modulation depth in (0, 1]
  double base_rate = 50.0;    // Hz per channel
  std::uint64_t seed = 0;
};

// Inhomogeneous Poisson streams with rate
//   base_rate * (1 + depth * sin(2 pi f t + phase + pi * (channel % 2)))
// where f is the class frequency (jittered per item) and the phase is random
// per item. Odd channels run in antiphase. Items cycle through the labels.
inline Dataset gen_frequency_task(const FrequencyTaskConfig& cfg,
                                  const CalibrationTable& cal = {}) {
  const std::size_t n_classes = cfg.frequencies.size();
  if (n_classes < 2) throw ConfigError("frequency task needs at least two classes");
  if (!(cfg.depth > 0.0) || cfg.depth > 1.0) {
    throw ConfigError("modulation depth must be in (0, 1]; at depth 0 the "
                      "classes are indistinguishable");
  }
  if (cfg.n_channels == 0 || cfg.items_per_class == 0) {
    throw ConfigError("frequency task needs channels and items");
  }
  if (!(cfg.duration > 0.0) || !(cfg.base_rate > 0.0) || !(cfg.jitter >= 0.0)) {
    throw ConfigError("frequency task: duration and base rate must be positive, jitter >= 0");
  }
  const double f_lo = cal.k_omega * cal.i_bias_min;
  const double f_hi = cal.k_omega * cal.i_bias_max;
  std::set<double> distinct(cfg.frequencies.begin(), cfg.frequencies.end());
  if (distinct.size() != n_classes) throw ConfigError("class frequencies must be distinct");
  for (double f : cfg.frequencies) {
    if (f < f_lo || f > f_hi) {
      throw ConfigError("class frequency " + format_number(f) +
                        " Hz outside the resonance range [" + format_number(f_lo) +
                        ", " + format_number(f_hi) + "] Hz");
    }
  }

  Dataset ds;
  for (double f : cfg.frequencies) ds.class_names.push_back(format_number(f) + "Hz");
  const std::size_t n_items = n_classes * cfg.items_per_class;
  const double peak_rate = cfg.base_rate * (1.0 + cfg.depth);
  for (std::size_t i = 0; i < n_items; ++i) {
    std::mt19937_64 rng(neuron_seed(cfg.seed, i));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> gap(peak_rate);

    SpikeEventStream s;
    s.n_channels = cfg.n_channels;
    s.duration = cfg.duration;
    s.label = static_cast<std::uint32_t>(i % n_classes);
    const double f = cfg.frequencies[s.label] * (1.0 + cfg.jitter * normal(rng));
    const double phase = kTwoPi * unit(rng);
    for (std::uint32_t c = 0; c < cfg.n_channels; ++c) {
      const double ch_phase = phase + (c % 2 == 1 ? kPi : 0.0);
      // Thinning of a homogeneous process at the peak rate.
      for (double t = gap(rng); t <= cfg.duration; t += gap(rng)) {
        const double rate = cfg.base_rate * (1.0 + cfg.depth * std::sin(kTwoPi * f * t + ch_phase));
        if (unit(rng) * peak_rate < rate) s.events.push_back({t, c});
      }
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ChannelEvent& a, const ChannelEvent& b) { return a.time < b.time; });
    ds.items.push_back(std::move(s));
  }
  return ds;
}

inline std::size_t steps_for(double duration, double dt) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
}

// Event counts per (step, channel). Step k covers [k dt, (k + 1) dt); an
// event at exactly t = duration lands in the final bin.
inline Matrix bin_events(const SpikeEventStream& stream, double dt) {
  if (!(dt > 0.0)) throw ConfigError("bin width must be positive");
  const std::size_t n_steps = steps_for(stream.duration, dt);
  Matrix counts(n_steps, stream.n_channels);
  for (const auto& e : stream.events) {
    auto k = static_cast<std::size_t>(std::floor(e.time / dt));
    k = std::min(k, n_steps - 1);
    counts(k, e.channel) += 1.0;
  }
  return counts;
}

inline std::string format_event_stream(const SpikeEventStream& s) {
  std::string out = "lraf-events 1\n";
  out += "n_channels " + std::to_string(s.n_channels) + "\n";
  out += "duration " + format_number(s.duration) + "\n";
  out += "label " + std::to_string(s.label) + "\n";
  out += "time,channel\n";
  for (const auto& e : s.events) {
    out += format_number(e.time);
    out += ',';
    out += std::to_string(e.channel);
    out += '\n';
  }
  return out;
}

inline SpikeEventStream parse_event_stream(const std::string& text, const std::string& where) {
  SpikeEventStream s;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) {
      throw ConfigError(where + ":" + std::to_string(line_no + 1) + ": missing LF line end");
    }
    line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    return true;
  };
  auto here = [&] { return where + ":" + std::to_string(line_no); };
  auto header_value = [&](const char* key) {
    std::string_view line;
    if (!next_line(line)) throw ConfigError(where + ": truncated header, missing '" + key + "'");
    const std::string prefix = std::string(key) + " ";
    if (line.substr(0, prefix.size()) != prefix) {
      throw ConfigError(here() + ": expected '" + key + " <value>'");
    }
    return line.substr(prefix.size());
  };

  std::string_view line;
  if (!next_line(line) || line != "lraf-events 1") {
    throw ConfigError(where + ":1: expected 'lraf-events 1'");
  }
  const auto channels = parse_int(header_value("n_channels"), here() + ": n_channels");
  if (channels < 1 || channels > 0xffffffffLL) throw ConfigError(here() + ": n_channels out of range");
  s.n_channels = static_cast<std::uint32_t>(channels);
  s.duration = parse_double(header_value("duration"), here() + ": duration");
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
    throw ConfigError(here() + ": duration must be positive");
  }
  const auto label = parse_int(header_value("label"), here() + ": label");
  if (label < 0 || label > 0xffffffffLL) throw ConfigError(here() + ": label out of range");
  s.label = static_cast<std::uint32_t>(label);
  if (!next_line(line) || line != "time,channel") {
    throw ConfigError(here() + ": expected column header 'time,channel'");
  }
  while (next_line(line)) {
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ConfigError(here() + ": expected 'time,channel'");
    const double t = parse_double(fields[0], here() + ": time");
    const auto c = parse_int(fields[1], here() + ": channel");
    if (!(t >= 0.0) || t > s.duration) throw ConfigError(here() + ": time outside [0, duration]");
    if (c < 0 || c >= static_cast<std::int64_t>(s.n_channels)) {
      throw ConfigError(here() + ": channel out of range");
    }
    if (!s.events.empty() && t < s.events.back().time) {
      throw ConfigError(here() + ": event times must be nondecreasing");
    }
    s.events.push_back({t, static_cast<std::uint32_t>(c)});
  }
  return s;
}

// Manifest (JSON):
//   {"schema": "lraf-manifest", "schema_version": 1,
//    "classes": ["120Hz", ...],
//    "items": [{"path": "item_00000.events", "label": 0}, ...]}
// Item paths are relative to the manifest's directory.
inline constexpr int kManifestSchemaVersion = 1;

inline Dataset load_event_dataset(const std::string& manifest_path) {
  const auto doc = detail::parse_json(read_file(manifest_path), manifest_path);
  detail::check_schema(doc, "lraf-manifest", kManifestSchemaVersion, manifest_path);
  for (const auto& [key, value] : doc.items()) {
    if (key != "schema" && key != "schema_version" && key != "classes" && key != "items") {
      throw ConfigError(manifest_path + ": unknown key '" + key + "'");
    }
  }
  if (!doc.contains("classes") || !doc["classes"].is_array() || doc["classes"].empty()) {
    throw ConfigError(manifest_path + ": 'classes' must be a nonempty array");
  }
  if (!doc.contains("items") || !doc["items"].is_array() || doc["items"].empty()) {
    throw ConfigError(manifest_path + ": 'items' must be a nonempty array");
  }
  Dataset ds;
  for (const auto& c : doc["classes"]) {
    if (!c.is_string()) throw ConfigError(manifest_path + ": class names must be strings");
    ds.class_names.push_back(c.get<std::string>());
  }
  const auto base = std::filesystem::path(manifest_path).parent_path();
  std::size_t index = 0;
  for (const auto& item : doc["items"]) {
    const std::string id = manifest_path + ": item " + std::to_string(index);
    if (!item.is_object() || !item.contains("path") || !item["path"].is_string() ||
        !item.contains("label") || !item["label"].is_number_unsigned() || item.size() != 2) {
      throw ConfigError(id + ": expected {\"path\": string, \"label\": unsigned}");
    }
    const auto label = item["label"].get<std::uint64_t>();
    if (label >= ds.class_names.size()) throw ConfigError(id + ": label outside class set");
    const std::string path = (base / item["path"].get<std::string>()).string();
    SpikeEventStream s;
    try {
      s = parse_event_stream(read_file(path), path);
    } catch (const ConfigError& e) {
      throw ConfigError(id + ": " + e.what());
    }
    if (s.label != label) {
      throw ConfigError(id + " (" + path + "): file label " + std::to_string(s.label) +
                        " disagrees with manifest label " + std::to_string(label));
    }
    if (!ds.items.empty() && s.n_channels != ds.items.front().n_channels) {
      throw ConfigError(id + " (" + path + "): channel count differs from item 0");
    }
    ds.items.push_back(std::move(s));
    ++index;
  }
  return ds;
}

// Writes one event file per item plus manifest.json into `dir`.
inline std::string write_event_dataset(const std::string& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  nlohmann::json items = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    ds.items[i].validate();
    char name[32];
    std::snprintf(name, sizeof(name), "item_%05zu.events", i);
    write_file((std::filesystem::path(dir) / name).string(), format_event_stream(ds.items[i]));
    items.push_back({{"path", name}, {"label", ds.items[i].label}});
  }
  const nlohmann::json doc = {{"schema", "lraf-manifest"},
                              {"schema_version", kManifestSchemaVersion},
                              {"classes", ds.class_names},
                              {"items", items}};
  const std::string manifest = (std::filesystem::path(dir) / "manifest.json").string();
  write_file(manifest, doc.dump(2) + "\n");
  return manifest;
}

}  // namespace lraf
