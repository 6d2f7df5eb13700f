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

#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include "lraf/analysis.hpp"
#include "lraf/experiment.hpp"

namespace lraf {
namespace {

nlohmann::json base_doc() { return {{"schema", "lraf-experiment"}, {"schema_version", 1}}; }

ExperimentConfig parse(const nlohmann::json& doc) {
  return experiment_from_json(doc, "/tmp/lraf_experiment_test/exp.json");
}

std::filesystem::path out_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("lraf_experiment_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

CsvTable load_csv(const std::filesystem::path& p) {
  std::istringstream in(read_file(p.string()));
  return read_csv(in);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  auto doc = base_doc();
  doc["bogus"] = 1;
  EXPECT_THROW(parse(doc), ConfigError);
  doc = base_doc();
  doc["simulate"] = {{"i_bias", 1e-9}, {"typo", 1}};
  EXPECT_THROW(parse(doc), ConfigError);
  doc = base_doc();
  doc["level"] = "quantum";
  EXPECT_THROW(parse(doc), ConfigError);
  doc = base_doc();
  doc["seed"] = -1;
  EXPECT_THROW(parse(doc), ConfigError);
  doc = base_doc();
  doc["schema"] = "lraf-calibration";
  EXPECT_THROW(parse(doc), ConfigError);
}

TEST(ExperimentConfig, ZeroDurationSimulationRejected) {
  auto doc = base_doc();
  doc["simulate"] = {{"duration", 0.0}};
  try {
    parse(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("simulate.duration"), std::string::npos) << e.what();
  }
}

TEST(ExperimentConfig, UnknownKnobRejected) {
  auto doc = base_doc();
  doc["sweep"] = {{"knob", "v_dd"}, {"values", {1.0}}};
  try {
    parse(doc);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown knob 'v_dd'"), std::string::npos) << e.what();
  }
}

TEST(ExperimentConfig, RangesIncludeEndpoints) {
  const auto v = detail::read_values({{"start", 1e-10}, {"stop", 8e-9}, {"count", 5}, {"spacing", "log"}}, "r");
  ASSERT_EQ(v.size(), 5u);
  EXPECT_EQ(v.front(), 1e-10);
  EXPECT_EQ(v.back(), 8e-9);
  EXPECT_NEAR(v[1] / v[0], v[2] / v[1], 1e-12);
  EXPECT_THROW(detail::read_values({{"start", 0.0}, {"stop", 1.0}, {"count", 3}, {"spacing", "log"}}, "r"),
               ConfigError);
}

TEST(Simulate, DefaultDemoReportsClampAndMeasures) {
  auto doc = base_doc();
  doc["simulate"] = nlohmann::json::object();
  const auto cfg = parse(doc);
  EXPECT_EQ(cfg.simulate->i_bias, 1e-12);
  EXPECT_EQ(cfg.simulate->f_sc, 1e4);
  const auto dir = out_dir("sim");
  const RunReport rep = run_simulate(cfg, dir.string());
  const CsvTable trace = load_csv(dir / "trace.csv");
  EXPECT_EQ(trace.header, (std::vector<std::string>{"t", "u", "v", "z"}));
  EXPECT_EQ(trace.rows.size(), steps_for(0.1, 1e-5));
  const CsvTable summary = load_csv(dir / "summary.csv");
  std::map<std::string, double> q;
  for (const auto& r : summary.rows) q[r[0]] = parse_double(r[1], r[0]);
  EXPECT_EQ(q["i_bias_realized"], 1.6e-12);
  EXPECT_NEAR(q["f_res_fft"], 100.0, 2.0);
  EXPECT_NEAR(q["tau_fit"], q["tau_model"], 0.02 * q["tau_model"]);
  bool clamp_line = false;
  for (const auto& l : rep.lines) clamp_line |= l.find("clamped") != std::string::npos;
  EXPECT_TRUE(clamp_line);
  std::filesystem::remove_all(dir);
}

TEST(Simulate, IdealLevelUsesUnclampedKnobs) {
  auto doc = base_doc();
  doc["simulate"] = {{"dt", 1e-4}, {"duration", 0.5}};
  doc["level"] = "ideal";
  const auto dir = out_dir("sim_ideal");
  run_simulate(parse(doc), dir.string());
  const CsvTable summary = load_csv(dir / "summary.csv");
  for (const auto& r : summary.rows) {
    if (r[0] == "f_res_model") {
      EXPECT_NEAR(parse_double(r[1], "f"), 62.5, 1e-9);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Sweep, BiasSweepIsLinear) {
  auto doc = base_doc();
  doc["sweep"] = {{"knob", "i_bias"}, {"quantity", "f_res"},
                  {"values", {{"start", 1e-10}, {"stop", 8e-9}, {"count", 8}, {"spacing", "log"}}}};
  const auto rows = sweep_rows(parse(doc));
  std::vector<double> x, y;
  for (const auto& r : rows) {
    x.push_back(r.i_bias);
    y.push_back(r.value);
  }
  const LinearFit fit = fit_line(x, y);
  EXPECT_GT(fit.r_squared, 0.999);
  EXPECT_NEAR(fit.slope, 6.25e13, 0.01 * 6.25e13);
}

TEST(Sweep, DecayClipsAtHighBias) {
  auto doc = base_doc();
  doc["sweep"] = {{"knob", "f_sc"}, {"quantity", "tau"}, {"values", {200, 400, 800}},
                  {"fixed", {1e-11, 8e-9}}, {"steps_per_period", 32}};
  const auto cfg = parse(doc);
  const auto rows = sweep_rows(cfg);
  ASSERT_EQ(rows.size(), 6u);
  // Low bias follows the switched capacitor; high bias is capped by the leak.
  EXPECT_NEAR(rows[0].value, tau_from_fsc(200, 1e-11, cfg.hardware), 0.02 * rows[0].value);
  const double leak = tau_leak(8e-9, cfg.hardware.calibration);
  for (std::size_t i = 3; i < 6; ++i) EXPECT_LT(rows[i].value, leak);
  EXPECT_LT(rows[3].value / rows[5].value, 1.5);
  EXPECT_GT(rows[0].value / rows[2].value, 3.5);
}

TEST(Sweep, PowerEndpoints) {
  auto doc = base_doc();
  doc["sweep"] = {{"knob", "i_bias"}, {"quantity", "power"}, {"values", {1e-10, 8e-9}}};
  const auto rows = sweep_rows(parse(doc));
  EXPECT_NEAR(rows[0].value, 1.6e-9, 0.05 * 1.6e-9);
  EXPECT_NEAR(rows[1].value, 132.6e-9, 0.05 * 132.6e-9);
}

TEST(Power, DefaultsCoverTheBiasRange) {
  const ExperimentConfig cfg;
  const auto dir = out_dir("power");
  run_power(cfg, dir.string());
  const CsvTable t = load_csv(dir / "power.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"i_bias", "power_w"}));
  EXPECT_EQ(t.rows.size(), 80u);
  EXPECT_EQ(parse_double(t.rows.front()[0], "i"), 1e-10);
  EXPECT_EQ(parse_double(t.rows.back()[0], "i"), 8e-9);
  std::filesystem::remove_all(dir);
}

nlohmann::json tiny_training_doc() {
  auto doc = base_doc();
  doc["task"] = {{"train_items_per_class", 3}, {"test_items_per_class", 2}, {"n_channels", 8}};
  doc["network"] = {{"n_hidden", 4}};
  doc["training"] = {{"epochs", 1}, {"batch_size", 4}};
  return doc;
}

TEST(TrainCommand, IdealLadderEntryEqualsTrainTimeAccuracy) {
  const auto dir = out_dir("train");
  auto doc = tiny_training_doc();
  doc["seed"] = 3;
  run_train(parse(doc), dir.string());
  const CsvTable metrics = load_csv(dir / "metrics.csv");
  EXPECT_EQ(metrics.header, (std::vector<std::string>{"epoch", "split", "accuracy", "loss"}));
  const double final_test = parse_double(metrics.rows.back()[2], "acc");

  doc["ladder"] = {{"checkpoint", (dir / "checkpoint.json").string()}, {"seeds", {3}},
                   {"levels", {"ideal", "noisy"}}};
  run_eval_ladder(parse(doc), dir.string());
  const CsvTable ladder = load_csv(dir / "ladder.csv");
  EXPECT_EQ(ladder.header,
            (std::vector<std::string>{"level", "accuracy_mean", "accuracy_std", "n_seeds"}));
  ASSERT_EQ(ladder.rows.size(), 2u);
  EXPECT_EQ(ladder.rows[0][0], "ideal");
  EXPECT_EQ(parse_double(ladder.rows[0][1], "acc"), final_test);
  std::filesystem::remove_all(dir);
}

TEST(LadderCommand, ContainsExactlyTheFiveLevels) {
  const auto dir = out_dir("ladder");
  auto doc = tiny_training_doc();
  doc["ladder"] = {{"n_seeds", 1}};
  run_eval_ladder(parse(doc), dir.string());
  const CsvTable ladder = load_csv(dir / "ladder.csv");
  ASSERT_EQ(ladder.rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(ladder.rows[i][0], to_string(kAllLevels[i]));
  std::filesystem::remove_all(dir);
}

TEST(LadderCommand, MissingCheckpointIsConfigError) {
  auto doc = tiny_training_doc();
  doc["ladder"] = {{"checkpoint", "nowhere/checkpoint.json"}};
  EXPECT_THROW(run_eval_ladder(parse(doc), out_dir("missing").string()), ConfigError);
}

}  // namespace
}  // namespace lraf
