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

// lraf: experiment runner for the resonate-and-fire simulator.
//
//   lraf <simulate|sweep|train|eval-ladder|power> [--config PATH] [--seed N]
//        [--out DIR] [--level NAME]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "lraf/error.hpp"
#include "lraf/experiment.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "lraf_out";
  std::string level;
};

lraf::ExperimentConfig configure(const Options& opt, bool config_required) {
  lraf::ExperimentConfig cfg;
  if (!opt.config.empty()) {
    cfg = lraf::load_experiment(opt.config);
  } else if (config_required) {
    throw lraf::ConfigError("this subcommand needs --config");
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.level.empty()) cfg.level = lraf::parse_level(opt.level);
  return cfg;
}

void print(const lraf::RunReport& rep, const std::string& out) {
  for (const auto& line : rep.lines) std::cout << line << '\n';
  for (const auto& f : rep.files) std::cout << "wrote " << out << "/" << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear resonate-and-fire neuron simulator and experiment runner"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment file (JSON)");
    sub->add_option("--seed", opt.seed, "run seed (overrides the config)");
    sub->add_option("--out", opt.out, "output directory")->capture_default_str();
    sub->add_option("--level", opt.level,
                    "fidelity level: ideal, param-constrained, nonlinear-tca, mismatch, noisy");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "single-neuron impulse response -> trace.csv");
  CLI::App* sweep = app.add_subcommand("sweep", "sweep i_bias or f_sc -> sweep.csv");
  CLI::App* train = app.add_subcommand("train", "train a network -> metrics.csv, checkpoint.json");
  CLI::App* ladder = app.add_subcommand("eval-ladder", "accuracy per fidelity level -> ladder.csv");
  CLI::App* power = app.add_subcommand("power", "power vs bias current -> power.csv");
  for (CLI::App* sub : {simulate, sweep, train, ladder, power}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    lraf::RunReport rep;
    if (simulate->parsed()) {
      rep = lraf::run_simulate(configure(opt, true), opt.out);
    } else if (sweep->parsed()) {
      rep = lraf::run_sweep(configure(opt, true), opt.out);
    } else if (train->parsed()) {
      rep = lraf::run_train(configure(opt, true), opt.out);
    } else if (ladder->parsed()) {
      rep = lraf::run_eval_ladder(configure(opt, true), opt.out);
    } else {
      rep = lraf::run_power(configure(opt, false), opt.out);
    }
    print(rep, opt.out);
  } catch (const lraf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  } catch (const lraf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigExit;
  }
  return 0;
}
