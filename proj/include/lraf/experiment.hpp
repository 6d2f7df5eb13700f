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

// Experiment configuration and the runners behind the command-line tool.
//
// An experiment file is JSON with optional blocks; each subcommand needs its
// own block (power falls back to defaults):
//
//   {
//     "schema": "lraf-experiment", "schema_version": 1,
//     "seed": 0,
//     "level": "param-constrained",
//     "hardware_config": "calibration.json",     (path relative to this file)
//     "simulate": {...}, "sweep": {...}, "power": {...},
//     "task": {...} or "dataset": {"train": "...", "test": "..."},
//     "network": {...}, "training": {...}, "ladder": {...}
//   }
//
// Value lists ("values", "fixed", "i_bias" in power) are either a JSON array
// or {"start": a, "stop": b, "count": n, "spacing": "linear" | "log"}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "lraf/analysis.hpp"
#include "lraf/checkpoint.hpp"
#include "lraf/config_io.hpp"
#include "lraf/data.hpp"
#include "lraf/io.hpp"
#include "lraf/neuron.hpp"
#include "lraf/train.hpp"

namespace lraf {

inline constexpr int kExperimentSchemaVersion = 1;

namespace detail {

// Reads typed members of one JSON object; keys never read are errors.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const Json& raw(const char* key) {
    used_.push_back(key);
    return obj_.at(key);
  }
  std::string at(const char* key) const { return where_ + "." + key; }

  template <typename T>
  void get(const char* key, T& slot) {
    if (!obj_.contains(key)) return;
    used_.push_back(key);
    slot = convert<T>(obj_.at(key), at(key));
  }

  void done() const {
    for (const auto& [key, value] : obj_.items()) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError(where_ + ": unknown key '" + key + "'");
      }
    }
  }

  template <typename T>
  static T convert(const Json& j, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_integer() || (!j.is_number_unsigned() && j.get<std::int64_t>() < 0)) {
        throw ConfigError(where + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!j.is_number()) throw ConfigError(where + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!j.is_string()) throw ConfigError(where + ": expected a string");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
      std::vector<double> out;
      for (const auto& x : j) out.push_back(convert<double>(x, where));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::uint64_t>>) {
      if (!j.is_array()) throw ConfigError(where + ": expected an array of integers");
      std::vector<std::uint64_t> out;
      for (const auto& x : j) out.push_back(convert<std::uint64_t>(x, where));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!j.is_array()) throw ConfigError(where + ": expected an array of strings");
      std::vector<std::string> out;
      for (const auto& x : j) out.push_back(convert<std::string>(x, where));
      return out;
    }
    return j.get<T>();
  }

 private:
  const Json& obj_;
  std::string where_;
  std::vector<std::string> used_;
};

inline std::vector<double> read_values(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    auto v = ObjectReader::convert<std::vector<double>>(j, where);
    if (v.empty()) throw ConfigError(where + ": empty value list");
    return v;
  }
  ObjectReader r(j, where);
  double start = 0.0, stop = 0.0;
  std::size_t count = 0;
  std::string spacing = "linear";
  if (!r.has("start") || !r.has("stop") || !r.has("count")) {
    throw ConfigError(where + ": range needs start, stop and count");
  }
  r.get("start", start);
  r.get("stop", stop);
  r.get("count", count);
  r.get("spacing", spacing);
  r.done();
  if (count < 1) throw ConfigError(where + ".count: must be >= 1");
  if (spacing != "linear" && spacing != "log") {
    throw ConfigError(where + ".spacing: expected \"linear\" or \"log\"");
  }
  if (spacing == "log" && !(start > 0.0 && stop > 0.0)) {
    throw ConfigError(where + ": log spacing needs positive start and stop");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(spacing == "log" ? start * std::pow(stop / start, frac)
                                   : start + (stop - start) * frac);
  }
  // Exact endpoints regardless of rounding in the formula.
  out.front() = start;
  if (count > 1) out.back() = stop;
  return out;
}

}  // namespace detail

struct SimulateBlock {
  double i_bias = 1e-12;
  double f_sc = 1e4;
  double theta = 1.0;
  double duration = 0.1;
  double dt = 1e-5;
  double impulse = 1.0;
};

enum class SweepKnob { kBias, kSwitching };
enum class SweepQuantity { kResonance, kDecay, kPower };

struct SweepBlock {
  SweepKnob knob = SweepKnob::kBias;
  SweepQuantity quantity = SweepQuantity::kResonance;
  std::vector<double> values;
  std::vector<double> fixed;  // values of the other knob (one series each)
  double theta = 1.0;
  double periods = 40.0;          // measurement window in resonance periods
  double decay_windows = 3.0;     // ... or in time constants, whichever is longer
  double steps_per_period = 64.0;
  std::size_t max_steps = 400000;
};

struct PowerBlock {
  std::vector<double> i_bias = default_bias();

  // 80 points, 0.1 nA to 8 nA.
  static std::vector<double> default_bias() {
    std::vector<double> v;
    for (int i = 0; i < 80; ++i) v.push_back(0.1e-9 + (8e-9 - 0.1e-9) * i / 79.0);
    v.back() = 8e-9;
    return v;
  }
};

struct TaskBlock {
  FrequencyTaskConfig train;
  std::size_t test_items_per_class = 50;
};

struct DatasetBlock {
  std::string train;
  std::string test;
};

struct NetworkBlock {
  std::size_t n_hidden = 32;
  double f_lo = 100.0;
  double f_hi = 600.0;
  double tau = 20e-3;
  double theta = 0.5;
  bool recurrent = true;
  ReadoutSource readout = ReadoutSource::kSpikes;
  double readout_tau = 20e-3;
  double dt = 1e-4;
};

struct LadderBlock {
  std::vector<FidelityLevel> levels{kAllLevels.begin(), kAllLevels.end()};
  std::vector<std::uint64_t> seeds;  // empty: n_seeds consecutive seeds from the run seed
  std::size_t n_seeds = 5;
  std::string checkpoint;  // evaluate fixed weights instead of training per level
};

struct ExperimentConfig {
  std::string path;  // source file; relative paths resolve against its directory
  std::uint64_t seed = 0;
  std::optional<FidelityLevel> level;
  HardwareConfig hardware;
  std::optional<SimulateBlock> simulate;
  std::optional<SweepBlock> sweep;
  PowerBlock power;
  std::optional<TaskBlock> task;
  std::optional<DatasetBlock> dataset;
  NetworkBlock network;
  TrainingConfig training;
  LadderBlock ladder;

  std::string resolve(const std::string& p) const {
    if (p.empty() || std::filesystem::path(p).is_absolute()) return p;
    return (std::filesystem::path(path).parent_path() / p).string();
  }
  FidelityLevel level_or(FidelityLevel fallback) const { return level.value_or(fallback); }
};

inline std::string_view to_string(SweepKnob k) { return k == SweepKnob::kBias ? "i_bias" : "f_sc"; }

inline std::string_view to_string(SweepQuantity q) {
  switch (q) {
    case SweepQuantity::kResonance: return "f_res";
    case SweepQuantity::kDecay: return "tau";
    case SweepQuantity::kPower: return "power";
  }
  return "?";
}

inline ExperimentConfig experiment_from_json(const nlohmann::json& doc, const std::string& path) {
  using detail::ObjectReader;
  detail::check_schema(doc, "lraf-experiment", kExperimentSchemaVersion, path);
  ExperimentConfig cfg;
  cfg.path = path;
  ObjectReader top(doc, path);
  std::string schema;
  std::uint64_t version = 0;
  top.get("schema", schema);
  top.get("schema_version", version);
  top.get("seed", cfg.seed);
  if (top.has("level")) {
    std::string name;
    top.get("level", name);
    try {
      cfg.level = parse_level(name);
    } catch (const ConfigError& e) {
      throw ConfigError(top.at("level") + ": " + e.what());
    }
  }
  if (top.has("hardware_config")) {
    std::string hw;
    top.get("hardware_config", hw);
    cfg.hardware = load_hardware_config(cfg.resolve(hw));
  }

  if (top.has("simulate")) {
    ObjectReader r(top.raw("simulate"), top.at("simulate"));
    SimulateBlock b;
    r.get("i_bias", b.i_bias);
    r.get("f_sc", b.f_sc);
    r.get("theta", b.theta);
    r.get("duration", b.duration);
    r.get("dt", b.dt);
    r.get("impulse", b.impulse);
    r.done();
    if (!(b.duration > 0.0) || !std::isfinite(b.duration)) {
      throw ConfigError(r.at("duration") + ": must be positive (got " + format_number(b.duration) + ")");
    }
    if (!(b.dt > 0.0) || b.dt > b.duration) {
      throw ConfigError(r.at("dt") + ": must be positive and not longer than the duration");
    }
    if (!(b.f_sc > 0.0)) throw ConfigError(r.at("f_sc") + ": must be positive");
    if (!(b.i_bias > 0.0)) throw ConfigError(r.at("i_bias") + ": must be positive");
    cfg.simulate = b;
  }

  if (top.has("sweep")) {
    ObjectReader r(top.raw("sweep"), top.at("sweep"));
    SweepBlock b;
    std::string knob = "i_bias", quantity = "f_res";
    r.get("knob", knob);
    if (knob == "i_bias") {
      b.knob = SweepKnob::kBias;
    } else if (knob == "f_sc") {
      b.knob = SweepKnob::kSwitching;
    } else {
      throw ConfigError(r.at("knob") + ": unknown knob '" + knob + "' (i_bias or f_sc)");
    }
    r.get("quantity", quantity);
    if (quantity == "f_res") {
      b.quantity = SweepQuantity::kResonance;
    } else if (quantity == "tau") {
      b.quantity = SweepQuantity::kDecay;
    } else if (quantity == "power") {
      b.quantity = SweepQuantity::kPower;
    } else {
      throw ConfigError(r.at("quantity") + ": unknown quantity '" + quantity +
                        "' (f_res, tau or power)");
    }
    if (!r.has("values")) throw ConfigError(r.at("values") + ": required");
    b.values = detail::read_values(r.raw("values"), r.at("values"));
    b.fixed = {b.knob == SweepKnob::kBias ? cfg.hardware.f_sc_u : cfg.hardware.i_bias};
    if (r.has("fixed")) b.fixed = detail::read_values(r.raw("fixed"), r.at("fixed"));
    r.get("theta", b.theta);
    r.get("periods", b.periods);
    r.get("decay_windows", b.decay_windows);
    r.get("steps_per_period", b.steps_per_period);
    r.get("max_steps", b.max_steps);
    r.done();
    for (double v : b.values) {
      if (!(v > 0.0)) throw ConfigError(r.at("values") + ": knob values must be positive");
    }
    for (double v : b.fixed) {
      if (!(v > 0.0)) throw ConfigError(r.at("fixed") + ": knob values must be positive");
    }
    if (!(b.periods > 0.0) || !(b.decay_windows > 0.0) || !(b.steps_per_period >= 8.0) ||
        b.max_steps < 64) {
      throw ConfigError(top.at("sweep") + ": measurement window settings out of range");
    }
    cfg.sweep = b;
  }

  if (top.has("power")) {
    ObjectReader r(top.raw("power"), top.at("power"));
    if (r.has("i_bias")) cfg.power.i_bias = detail::read_values(r.raw("i_bias"), r.at("i_bias"));
    r.done();
  }

  if (top.has("task")) {
    ObjectReader r(top.raw("task"), top.at("task"));
    TaskBlock b;
    b.train.frequencies = {120.0, 180.0, 270.0, 400.0};
    b.train.items_per_class = 200;
    b.train.seed = 100;
    r.get("frequencies", b.train.frequencies);
    r.get("train_items_per_class", b.train.items_per_class);
    r.get("test_items_per_class", b.test_items_per_class);
    r.get("n_channels", b.train.n_channels);
    r.get("duration", b.train.duration);
    r.get("jitter", b.train.jitter);
    r.get("depth", b.train.depth);
    r.get("base_rate", b.train.base_rate);
    r.get("seed", b.train.seed);
    r.done();
    if (b.test_items_per_class < 1) throw ConfigError(r.at("test_items_per_class") + ": must be >= 1");
    cfg.task = b;
  }
  if (top.has("dataset")) {
    ObjectReader r(top.raw("dataset"), top.at("dataset"));
    DatasetBlock b;
    r.get("train", b.train);
    r.get("test", b.test);
    r.done();
    if (b.train.empty() || b.test.empty()) {
      throw ConfigError(top.at("dataset") + ": needs both 'train' and 'test' manifests");
    }
    b.train = cfg.resolve(b.train);
    b.test = cfg.resolve(b.test);
    cfg.dataset = b;
  }
  if (cfg.task && cfg.dataset) {
    throw ConfigError(path + ": give either 'task' or 'dataset', not both");
  }

  if (top.has("network")) {
    ObjectReader r(top.raw("network"), top.at("network"));
    NetworkBlock& b = cfg.network;
    std::string readout(to_string(b.readout));
    r.get("n_hidden", b.n_hidden);
    r.get("f_lo", b.f_lo);
    r.get("f_hi", b.f_hi);
    r.get("tau", b.tau);
    r.get("theta", b.theta);
    r.get("recurrent", b.recurrent);
    r.get("readout", readout);
    r.get("readout_tau", b.readout_tau);
    r.get("dt", b.dt);
    r.done();
    b.readout = parse_readout(readout);
    if (b.n_hidden < 1) throw ConfigError(r.at("n_hidden") + ": must be >= 1");
    if (!(b.tau > 0.0) || !(b.dt > 0.0) || !(b.readout_tau > 0.0)) {
      throw ConfigError(top.at("network") + ": tau, dt and readout_tau must be positive");
    }
  }

  if (top.has("training")) {
    ObjectReader r(top.raw("training"), top.at("training"));
    TrainingConfig& t = cfg.training;
    r.get("learning_rate", t.learning_rate);
    r.get("epochs", t.epochs);
    r.get("batch_size", t.batch_size);
    r.get("surrogate_slope", t.surrogate_slope);
    r.get("weight_decay", t.weight_decay);
    r.get("quantize_aware", t.quantize_aware);
    r.get("init_input_std", t.init_input_std);
    r.get("init_recurrent_std", t.init_recurrent_std);
    r.get("init_output_std", t.init_output_std);
    r.get("recurrent_lr_scale", t.recurrent_lr_scale);
    r.get("threads", t.threads);
    r.done();
    try {
      t.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(top.at("training") + ": " + e.what());
    }
  }

  if (top.has("ladder")) {
    ObjectReader r(top.raw("ladder"), top.at("ladder"));
    LadderBlock& b = cfg.ladder;
    if (r.has("levels")) {
      std::vector<std::string> names;
      r.get("levels", names);
      if (names.empty()) throw ConfigError(r.at("levels") + ": must not be empty");
      b.levels.clear();
      for (const auto& n : names) b.levels.push_back(parse_level(n));
    }
    r.get("seeds", b.seeds);
    r.get("n_seeds", b.n_seeds);
    r.get("checkpoint", b.checkpoint);
    r.done();
    if (b.n_seeds < 1) throw ConfigError(r.at("n_seeds") + ": must be >= 1");
    b.checkpoint = cfg.resolve(b.checkpoint);
  }
  top.done();
  return cfg;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  return experiment_from_json(detail::parse_json(read_file(path), path), path);
}

// What a runner produced: files written (relative to the output directory)
// and a human-readable report.
struct RunReport {
  std::vector<std::string> files;
  std::vector<std::string> lines;
};

namespace detail {

inline void emit(RunReport& rep, const std::string& out_dir, const std::string& name,
                 const std::string& contents) {
  std::filesystem::create_directories(out_dir);
  write_file((std::filesystem::path(out_dir) / name).string(), contents);
  rep.files.push_back(name);
}

inline std::string fmt(double x) { return format_number(x); }

}  // namespace detail

// ---- simulate ----------------------------------------------------------

struct SimulationSummary {
  RealizationReport realization;
  double f_model = 0.0;    // natural frequency of the realized linear model, Hz
  double tau_model = 0.0;  // equivalent decay constant, s
  double f_measured = 0.0;
  DecayFit decay;
};

inline HardwareNeuron simulation_neuron(const HardwareConfig& hw, double theta, FidelityLevel level,
                                        double dt, std::uint64_t seed) {
  return realize_neuron(params_from_knobs(hw, theta), hw, level, dt, neuron_seed(seed, 0));
}

inline RunReport run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (!cfg.simulate) throw ConfigError(cfg.path + ": the simulate subcommand needs a 'simulate' block");
  const SimulateBlock& b = *cfg.simulate;
  HardwareConfig hw = cfg.hardware;
  hw.i_bias = b.i_bias;
  hw.f_sc_u = hw.f_sc_v = b.f_sc;
  const FidelityLevel level = cfg.level_or(FidelityLevel::kParamConstrained);
  const HardwareNeuron neuron = simulation_neuron(hw, b.theta, level, b.dt, cfg.seed);
  const std::size_t n_steps = steps_for(b.duration, b.dt);
  const StateTrace trace =
      neuron.simulate(InputSignal::impulse(b.impulse), n_steps, neuron_seed(cfg.seed, 1));

  SimulationSummary s;
  s.realization = neuron.report();
  const RafParams& eq = neuron.equivalent_params();
  s.f_model = eq.natural_omega() / kTwoPi;
  s.tau_model = std::max(eq.tau_u, eq.tau_v);
  const auto v = trace.v();
  s.f_measured = spectral_peak(v, b.dt);
  s.decay = fit_envelope(v, b.dt);

  RunReport rep;
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  detail::emit(rep, out_dir, "trace.csv", csv.str());

  using detail::fmt;
  std::string summary = "quantity,value\n";
  auto row = [&](const char* k, double x) { summary += std::string(k) + "," + fmt(x) + "\n"; };
  row("i_bias_requested", b.i_bias);
  row("f_sc_requested", b.f_sc);
  if (level != FidelityLevel::kIdeal) {
    row("i_bias_realized", s.realization.i_bias);
    row("f_sc_realized", s.realization.f_sc_u);
  }
  row("f_res_model", s.f_model);
  row("f_res_fft", s.f_measured);
  row("tau_model", s.tau_model);
  row("tau_fit", s.decay.tau);
  row("tau_fit_r_squared", s.decay.r_squared);
  detail::emit(rep, out_dir, "summary.csv", summary);

  rep.lines.push_back("level: " + std::string(to_string(level)) + ", " + std::to_string(n_steps) +
                      " steps of " + fmt(b.dt) + " s");
  if (level != FidelityLevel::kIdeal) {
    if (s.realization.bias_clamped) {
      rep.lines.push_back("bias " + fmt(b.i_bias) + " A outside the calibrated range, clamped to " +
                          fmt(s.realization.i_bias) + " A");
    }
    if (s.realization.f_sc_u_clamped) {
      rep.lines.push_back("f_sc " + fmt(b.f_sc) + " Hz outside the calibrated range, clamped to " +
                          fmt(s.realization.f_sc_u) + " Hz");
    }
    if (s.realization.discrete_sc_u) {
      rep.lines.push_back("switched capacitor simulated as discrete charge sharing (dt < 1/(2 f_sc))");
    }
  }
  rep.lines.push_back("resonance: " + fmt(s.f_measured) + " Hz measured (FFT), " + fmt(s.f_model) +
                      " Hz model");
  rep.lines.push_back("decay: tau " + fmt(s.decay.tau) + " s fitted (R^2 " + fmt(s.decay.r_squared) +
                      ", " + std::to_string(s.decay.n_peaks) + " peaks), " + fmt(s.tau_model) +
                      " s model");
  return rep;
}

// ---- sweep ---------------------------------------------------------------

struct SweepRow {
  double i_bias = 0.0;
  double f_sc = 0.0;
  double value = 0.0;
};

inline double measure_point(const SweepBlock& b, const HardwareConfig& hw, FidelityLevel level,
                            std::uint64_t seed) {
  if (b.quantity == SweepQuantity::kPower) {
    const double i = level == FidelityLevel::kIdeal
                         ? hw.i_bias
                         : std::clamp(hw.i_bias, hw.calibration.i_bias_min, hw.calibration.i_bias_max);
    return power_estimate(i, hw.calibration);
  }
  // Step and window sized from the nominal dynamics at this point.
  const RafParams nominal = level == FidelityLevel::kIdeal
                                ? params_from_knobs(hw, b.theta)
                                : realize_neuron(params_from_knobs(hw, b.theta), hw,
                                                 FidelityLevel::kParamConstrained, 1.0, 0)
                                      .equivalent_params();
  const double f = nominal.natural_omega() / kTwoPi;
  const double tau = std::max(nominal.tau_u, nominal.tau_v);
  if (!(f > 0.0)) throw ConfigError("sweep point has no oscillation to measure");
  const double dt = 1.0 / (f * b.steps_per_period);
  double window = b.periods / f;
  if (b.quantity == SweepQuantity::kDecay) window = std::max(window, b.decay_windows * tau);
  const auto n_steps = std::min<std::size_t>(b.max_steps, steps_for(window, dt));
  const HardwareNeuron neuron = simulation_neuron(hw, b.theta, level, dt, seed);
  const auto v = neuron.simulate(InputSignal::impulse(1.0), n_steps, neuron_seed(seed, 1)).v();
  if (b.quantity == SweepQuantity::kResonance) return spectral_peak(v, dt);
  return fit_envelope(v, dt).tau;
}

inline std::vector<SweepRow> sweep_rows(const ExperimentConfig& cfg, std::size_t threads = 0) {
  if (!cfg.sweep) throw ConfigError(cfg.path + ": the sweep subcommand needs a 'sweep' block");
  const SweepBlock& b = *cfg.sweep;
  const FidelityLevel level = cfg.level_or(FidelityLevel::kParamConstrained);
  std::vector<double> series = b.fixed, knob = b.values;
  std::sort(series.begin(), series.end());
  std::sort(knob.begin(), knob.end());
  std::vector<SweepRow> rows;
  for (double s : series) {
    for (double k : knob) {
      SweepRow r;
      r.i_bias = b.knob == SweepKnob::kBias ? k : s;
      r.f_sc = b.knob == SweepKnob::kBias ? s : k;
      rows.push_back(r);
    }
  }
  detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
    HardwareConfig hw = cfg.hardware;
    hw.i_bias = rows[i].i_bias;
    hw.f_sc_u = hw.f_sc_v = rows[i].f_sc;
    rows[i].value = measure_point(b, hw, level, cfg.seed);
  });
  return rows;
}

inline RunReport run_sweep(const ExperimentConfig& cfg, const std::string& out_dir,
                           std::size_t threads = 0) {
  const auto rows = sweep_rows(cfg, threads);
  const std::string q(to_string(cfg.sweep->quantity));
  std::string csv = "i_bias,f_sc,quantity,value\n";
  for (const auto& r : rows) {
    csv += detail::fmt(r.i_bias) + "," + detail::fmt(r.f_sc) + "," + q + "," + detail::fmt(r.value) + "\n";
  }
  RunReport rep;
  detail::emit(rep, out_dir, "sweep.csv", csv);
  rep.lines.push_back(std::to_string(rows.size()) + " points, knob " +
                      std::string(to_string(cfg.sweep->knob)) + ", quantity " + q + ", level " +
                      std::string(to_string(cfg.level_or(FidelityLevel::kParamConstrained))));
  if (cfg.sweep->quantity == SweepQuantity::kResonance && cfg.sweep->knob == SweepKnob::kBias &&
      cfg.sweep->values.size() >= 3) {
    for (double s : cfg.sweep->fixed) {
      std::vector<double> x, y;
      for (const auto& r : rows) {
        if (r.f_sc == s) {
          x.push_back(r.i_bias);
          y.push_back(r.value);
        }
      }
      const LinearFit fit = fit_line(x, y);
      rep.lines.push_back("f_sc " + detail::fmt(s) + " Hz: f_res = " + detail::fmt(fit.slope) +
                          " Hz/A * i_bias + " + detail::fmt(fit.intercept) + " Hz, R^2 " +
                          detail::fmt(fit.r_squared));
    }
  }
  return rep;
}

// ---- power -----------------------------------------------------------------

inline RunReport run_power(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::vector<double> bias = cfg.power.i_bias;
  std::sort(bias.begin(), bias.end());
  std::string csv = "i_bias,power_w\n";
  for (double i : bias) {
    csv += detail::fmt(i) + "," + detail::fmt(power_estimate(i, cfg.hardware.calibration)) + "\n";
  }
  RunReport rep;
  detail::emit(rep, out_dir, "power.csv", csv);
  rep.lines.push_back("power " + detail::fmt(power_estimate(bias.front(), cfg.hardware.calibration)) +
                      " W at " + detail::fmt(bias.front()) + " A to " +
                      detail::fmt(power_estimate(bias.back(), cfg.hardware.calibration)) + " W at " +
                      detail::fmt(bias.back()) + " A (" + std::to_string(bias.size()) + " points)");
  return rep;
}

// ---- train / eval-ladder ------------------------------------------------------

struct ExperimentData {
  LabeledInputs train;
  LabeledInputs test;
  std::vector<std::string> class_names;
};

inline ExperimentData load_data(const ExperimentConfig& cfg) {
  Dataset train_ds, test_ds;
  if (cfg.task) {
    FrequencyTaskConfig t = cfg.task->train;
    train_ds = gen_frequency_task(t, cfg.hardware.calibration);
    t.items_per_class = cfg.task->test_items_per_class;
    t.seed = neuron_seed(t.seed, 0x7e57);
    test_ds = gen_frequency_task(t, cfg.hardware.calibration);
  } else if (cfg.dataset) {
    train_ds = load_event_dataset(cfg.dataset->train);
    test_ds = load_event_dataset(cfg.dataset->test);
    if (train_ds.class_names != test_ds.class_names) {
      throw ConfigError("train and test manifests list different classes");
    }
    if (train_ds.n_channels() != test_ds.n_channels()) {
      throw ConfigError("train and test datasets have different channel counts");
    }
  } else {
    throw ConfigError(cfg.path + ": training needs a 'task' or 'dataset' block");
  }
  ExperimentData d;
  d.train = prepare(train_ds, cfg.network.dt);
  d.test = prepare(test_ds, cfg.network.dt);
  d.class_names = train_ds.class_names;
  return d;
}

inline NetworkSpec network_spec(const ExperimentConfig& cfg, const ExperimentData& data,
                                FidelityLevel level, std::uint64_t mismatch_seed) {
  const NetworkBlock& b = cfg.network;
  NetworkSpec s;
  s.n_inputs = data.train.inputs.front().cols();
  s.n_hidden = b.n_hidden;
  s.n_classes = data.class_names.size();
  s.recurrent = b.recurrent;
  s.neurons = resonator_bank(b.n_hidden, b.f_lo, b.f_hi, b.tau, b.theta);
  s.hardware = cfg.hardware;
  s.level = level;
  s.dt = b.dt;
  s.readout_tau = b.readout_tau;
  s.readout = b.readout;
  s.mismatch_seed = mismatch_seed;
  return s;
}

inline RunReport run_train(const ExperimentConfig& cfg, const std::string& out_dir) {
  const ExperimentData data = load_data(cfg);
  const FidelityLevel level = cfg.level_or(FidelityLevel::kIdeal);
  TrainingConfig tc = cfg.training;
  tc.seed = cfg.seed;
  const NetworkSpec spec = network_spec(cfg, data, level, cfg.seed);
  const TrainResult r = train(initial_network(spec, tc), data.train, &data.test, tc);

  RunReport rep;
  detail::emit(rep, out_dir, "metrics.csv", format_metrics_csv(r.metrics));
  Checkpoint ck{r.network.spec(), r.network.weights(), r.network.quantized(), cfg.seed,
                data.class_names};
  detail::emit(rep, out_dir, "checkpoint.json", checkpoint_to_json(ck).dump(1) + "\n");
  const auto& last = r.metrics.back();
  rep.lines.push_back("trained at " + std::string(to_string(level)) + " for " +
                      std::to_string(tc.epochs) + " epochs on " + std::to_string(data.train.size()) +
                      " items");
  rep.lines.push_back("final " + last.split + " accuracy " + detail::fmt(last.accuracy) +
                      ", loss " + detail::fmt(last.loss));
  return rep;
}

inline std::vector<std::uint64_t> ladder_seeds(const ExperimentConfig& cfg) {
  if (!cfg.ladder.seeds.empty()) return cfg.ladder.seeds;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < cfg.ladder.n_seeds; ++i) seeds.push_back(cfg.seed + i);
  return seeds;
}

inline RunReport run_eval_ladder(const ExperimentConfig& cfg, const std::string& out_dir) {
  std::vector<FidelityLevel> levels = cfg.ladder.levels;
  if (cfg.level) levels = {*cfg.level};
  const auto seeds = ladder_seeds(cfg);
  std::vector<LadderRow> rows;
  std::string mode;
  if (!cfg.ladder.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(cfg.ladder.checkpoint);
    ExperimentData data = load_data(cfg);
    if (data.class_names != ck.class_names) {
      throw ConfigError(cfg.ladder.checkpoint + ": classes differ from the evaluation dataset");
    }
    rows = evaluate_checkpoint_ladder(ck.network(), data.test, levels, seeds, cfg.training.threads);
    mode = "checkpoint weights, evaluated per level";
  } else {
    const ExperimentData data = load_data(cfg);
    const NetworkSpec spec = network_spec(cfg, data, FidelityLevel::kIdeal, cfg.seed);
    rows = evaluate_ladder(spec, data.train, data.test, cfg.training, levels, seeds);
    mode = "hardware-aware training at every level";
  }
  RunReport rep;
  detail::emit(rep, out_dir, "ladder.csv", format_ladder_csv(rows));
  std::string runs = "level,seed,accuracy\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      runs += std::string(to_string(r.level)) + "," + std::to_string(seeds[i]) + "," +
              detail::fmt(r.accuracies[i]) + "\n";
    }
  }
  detail::emit(rep, out_dir, "ladder_runs.csv", runs);
  rep.lines.push_back("ladder: " + mode + ", " + std::to_string(seeds.size()) + " seeds");
  for (const auto& r : rows) {
    rep.lines.push_back("  " + std::string(to_string(r.level)) + ": " + detail::fmt(r.accuracy_mean) +
                        " +/- " + detail::fmt(r.accuracy_std));
  }
  return rep;
}

}  // namespace lraf
