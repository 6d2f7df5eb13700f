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

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "lraf/checkpoint.hpp"
#include "lraf/data.hpp"
#include "lraf/io.hpp"
#include "lraf/train.hpp"

namespace lraf {
namespace {

FrequencyTaskConfig task(std::size_t per_class, std::uint64_t seed) {
  FrequencyTaskConfig cfg;
  cfg.frequencies = {120.0, 180.0, 270.0, 400.0};
  cfg.items_per_class = per_class;
  cfg.n_channels = 32;
  cfg.seed = seed;
  return cfg;
}

NetworkSpec small_spec(FidelityLevel level, std::size_t hidden = 12) {
  NetworkSpec s;
  s.n_inputs = 32;
  s.n_hidden = hidden;
  s.n_classes = 4;
  s.neurons = resonator_bank(hidden, 100.0, 600.0, 20e-3, 0.5);
  s.level = level;
  return s;
}

TrainingConfig quick(std::uint64_t seed, std::size_t epochs) {
  TrainingConfig t;
  t.seed = seed;
  t.epochs = epochs;
  t.batch_size = 8;
  return t;
}

TEST(Train, MemorizesOneSample) {
  auto ds = gen_frequency_task(task(1, 3));
  ds.items.resize(1);
  const auto data = prepare(ds, 1e-4);
  auto cfg = quick(1, 40);
  cfg.learning_rate = 0.05;
  const auto r = train(initial_network(small_spec(FidelityLevel::kIdeal, 4), cfg), data, nullptr, cfg);
  EXPECT_EQ(evaluate(r.network, data, 0).accuracy, 1.0);
  EXPECT_EQ(r.metrics.size(), cfg.epochs);
}

TEST(Train, DeterministicPerSeedAndThreadCount) {
  const auto data = prepare(gen_frequency_task(task(4, 5)), 1e-4);
  auto cfg = quick(9, 2);
  const auto spec = small_spec(FidelityLevel::kNoisy);
  cfg.threads = 1;
  const auto a = train(initial_network(spec, cfg), data, &data, cfg);
  cfg.threads = 3;
  const auto b = train(initial_network(spec, cfg), data, &data, cfg);
  EXPECT_EQ(a.network.weights(), b.network.weights());
  EXPECT_EQ(format_metrics_csv(a.metrics), format_metrics_csv(b.metrics));
  cfg.seed = 10;
  const auto c = train(initial_network(spec, cfg), data, &data, cfg);
  EXPECT_NE(a.network.weights(), c.network.weights());
}

TEST(Train, DivergenceAbortsWithDiagnostics) {
  const auto data = prepare(gen_frequency_task(task(2, 5)), 1e-4);
  auto cfg = quick(1, 3);
  cfg.init_output_std = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(initial_network(small_spec(FidelityLevel::kIdeal), cfg), NumericalError);
  cfg.quantize_aware = false;
  try {
    train(initial_network(small_spec(FidelityLevel::kIdeal), cfg), data, nullptr, cfg);
    FAIL() << "expected a numerical failure";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite loss at epoch 1"), std::string::npos) << e.what();
  }
}

TEST(Train, RejectsBadConfigAndData) {
  auto cfg = quick(1, 1);
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = quick(1, 1);
  EXPECT_THROW(train(initial_network(small_spec(FidelityLevel::kIdeal), cfg), LabeledInputs{},
                     nullptr, cfg),
               ConfigError);
}

TEST(Train, MetricsCsvReloads) {
  const auto data = prepare(gen_frequency_task(task(2, 5)), 1e-4);
  const auto cfg = quick(1, 2);
  const auto r = train(initial_network(small_spec(FidelityLevel::kIdeal), cfg), data, &data, cfg);
  std::istringstream in(format_metrics_csv(r.metrics));
  const CsvTable t = read_csv(in);
  ASSERT_EQ(t.header, (std::vector<std::string>{"epoch", "split", "accuracy", "loss"}));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[3][1], "test");
  EXPECT_EQ(parse_double(t.rows[3][2], "acc"), r.metrics[3].accuracy);
}

// Hand-built solution: one resonator per class frequency, push-pull input
// weights, identity readout. Confirms the task is solvable by resonance.
TEST(Train, HandSetResonantSolutionSolvesTask) {
  const auto cfg = task(50, 21);
  const auto data = prepare(gen_frequency_task(cfg), 1e-4);
  NetworkSpec s = small_spec(FidelityLevel::kIdeal, 4);
  s.recurrent = false;
  s.neurons.clear();
  for (double f : cfg.frequencies) s.neurons.push_back(RafParams::symmetric(kTwoPi * f, 20e-3, 0.5));
  NetworkWeights w = NetworkWeights::zeros(s);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t c = 0; c < 32; ++c) w.input(i, c) = c % 2 == 0 ? 0.05 : -0.05;
    w.output(i, i) = 1.0;
  }
  EXPECT_GE(evaluate(Network(s, w), data, 0).accuracy, 0.9);
}

TEST(Ladder, IdealEntryEqualsPlainEvaluationAndRerunsIdentically) {
  const auto train_set = prepare(gen_frequency_task(task(3, 1)), 1e-4);
  const auto test_set = prepare(gen_frequency_task(task(2, 2)), 1e-4);
  const auto spec = small_spec(FidelityLevel::kIdeal, 6);
  const auto cfg = quick(4, 1);
  const std::vector<std::uint64_t> seeds = {4, 5};
  const std::vector<FidelityLevel> levels(kAllLevels.begin(), kAllLevels.end());
  const auto rows = evaluate_ladder(spec, train_set, test_set, cfg, levels, seeds);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(rows[i].level, kAllLevels[i]);

  TrainingConfig c = cfg;
  c.seed = 4;
  const auto plain = train(initial_network(spec, c), train_set, nullptr, c);
  EXPECT_EQ(rows[0].accuracies[0], evaluate(plain.network, test_set, test_noise_seed(4)).accuracy);
  EXPECT_EQ(format_ladder_csv(evaluate_ladder(spec, train_set, test_set, cfg, levels, seeds)),
            format_ladder_csv(rows));
}

TEST(Ladder, CheckpointLadderIdealMatchesEvaluation) {
  const auto test_set = prepare(gen_frequency_task(task(2, 2)), 1e-4);
  const auto spec = small_spec(FidelityLevel::kIdeal, 6);
  const Network net = initial_network(spec, quick(3, 1));
  const auto rows = evaluate_checkpoint_ladder(net, test_set, {FidelityLevel::kIdeal, FidelityLevel::kMismatch},
                                               {1, 2, 3, 4, 5});
  EXPECT_EQ(rows[0].accuracy_mean, evaluate(net, test_set, 0).accuracy);
  EXPECT_EQ(rows[0].accuracy_std, 0.0);
  EXPECT_EQ(rows[1].accuracies.size(), 5u);
}

TEST(Ladder, SummaryUsesSampleStd) {
  const auto row = summarize(FidelityLevel::kNoisy, {0.9, 1.0});
  EXPECT_DOUBLE_EQ(row.accuracy_mean, 0.95);
  EXPECT_NEAR(row.accuracy_std, std::sqrt(0.005), 1e-15);
  EXPECT_EQ(format_ladder_csv({row}), "level,accuracy_mean,accuracy_std,n_seeds\nnoisy,0.95," +
                                           format_number(row.accuracy_std) + ",2\n");
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  auto spec = small_spec(FidelityLevel::kMismatch, 5);
  spec.neurons[2].tau_v = kNoDecay;
  spec.mismatch_seed = 77;
  Checkpoint c{spec, NetworkWeights::random(spec, 3, 0.1, 0.01, 1.0), true, 42,
               {"a", "b", "c", "d"}};
  const auto dir = std::filesystem::temp_directory_path() / "lraf_ckpt_rt";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.json").string();
  save_checkpoint(path, c);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.weights, c.weights);
  EXPECT_EQ(back.training_seed, 42u);
  EXPECT_EQ(back.class_names, c.class_names);
  EXPECT_EQ(back.spec.level, FidelityLevel::kMismatch);
  EXPECT_EQ(back.spec.mismatch_seed, 77u);
  EXPECT_TRUE(std::isinf(back.spec.neurons[2].tau_v));
  EXPECT_EQ(back.spec.neurons[1].omega_u, spec.neurons[1].omega_u);
  const Matrix input(50, 32, 1.0);
  EXPECT_EQ(back.network().forward(input, 5), c.network().forward(input, 5));

  auto doc = checkpoint_to_json(c);
  doc["weights"]["input"]["codes"][0] = 5;
  EXPECT_THROW(checkpoint_from_json(doc, "x"), ConfigError);
  doc = checkpoint_to_json(c);
  doc["schema_version"] = 2;
  EXPECT_THROW(checkpoint_from_json(doc, "x"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, MissingFileIsClearError) {
  try {
    load_checkpoint("/nonexistent/ckpt.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("does not exist"), std::string::npos);
  }
}

}  // namespace
}  // namespace lraf
