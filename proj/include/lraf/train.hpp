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

// Cross-entropy training of a Network with Adam, evaluation, and the
// fidelity-ladder experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lraf/data.hpp"
#include "lraf/error.hpp"
#include "lraf/network.hpp"

namespace lraf {

struct TrainingConfig {
  double learning_rate = 3e-2;
  std::size_t epochs = 15;
  std::size_t batch_size = 32;
  double surrogate_slope = 10.0;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  bool quantize_aware = true;
  double init_input_std = 0.1;
  double init_recurrent_std = 0.01;
  double init_output_std = 2.0;
  double recurrent_lr_scale = 0.1;  // learning-rate multiplier for W_rec
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    detail::require(learning_rate > 0.0, "training: learning_rate must be positive");
    detail::require(epochs >= 1 && batch_size >= 1, "training: epochs and batch_size must be >= 1");
    detail::require(surrogate_slope > 0.0, "training: surrogate_slope must be positive");
    detail::require(weight_decay >= 0.0, "training: weight_decay must be >= 0");
    detail::require(recurrent_lr_scale >= 0.0, "training: recurrent_lr_scale must be >= 0");
  }
};

struct LabeledInputs {
  std::vector<Matrix> inputs;  // n_steps x n_channels counts per item
  std::vector<std::uint32_t> labels;
  std::size_t n_classes = 0;

  std::size_t size() const { return inputs.size(); }
};

inline LabeledInputs prepare(const Dataset& ds, double dt) {
  LabeledInputs out;
  out.n_classes = ds.n_classes();
  for (const auto& item : ds.items) {
    item.validate();
    out.inputs.push_back(bin_events(item, dt));
    out.labels.push_back(item.label);
  }
  return out;
}

namespace detail {

// Runs fn(i) for i in [0, n) over a fixed number of threads; callers write
// results into per-index slots so the outcome is order-independent.
inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline std::vector<double> softmax(const std::vector<double>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    p[c] = std::exp(scores[c] - top);
    sum += p[c];
  }
  for (double& x : p) x /= sum;
  return p;
}

inline std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline void add_into(NetworkWeights& acc, const NetworkWeights& g) {
  auto a = acc.tensors();
  auto b = g.tensors();
  for (std::size_t t = 0; t < a.size(); ++t) {
    auto& x = a[t]->data();
    const auto& y = b[t]->data();
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  }
}

}  // namespace detail

inline double cross_entropy(const std::vector<double>& scores, std::uint32_t label) {
  const auto p = detail::softmax(scores);
  return -std::log(std::max(p[label], 1e-300));
}

// Per-item noise stream for a given pass.
inline std::uint64_t item_noise_seed(std::uint64_t seed, std::uint64_t pass, std::size_t item) {
  return neuron_seed(neuron_seed(seed, pass + 0x5eed), item);
}

// Scores for a batch of items; item i draws noise from item_noise_seed(seed, 0, i).
inline std::vector<std::vector<double>> forward_batch(const Network& net,
                                                      const std::vector<Matrix>& inputs,
                                                      std::uint64_t noise_seed,
                                                      std::size_t threads = 0) {
  std::vector<std::vector<double>> scores(inputs.size());
  detail::parallel_for(inputs.size(), threads, [&](std::size_t i) {
    scores[i] = net.forward(inputs[i], item_noise_seed(noise_seed, 0, i));
  });
  return scores;
}

struct Evaluation {
  double accuracy = 0.0;
  double loss = 0.0;
};

inline Evaluation evaluate(const Network& net, const LabeledInputs& data,
                           std::uint64_t noise_seed, std::size_t threads = 0) {
  if (data.size() == 0) throw ConfigError("cannot evaluate on an empty dataset");
  const auto scores = forward_batch(net, data.inputs, noise_seed, threads);
  Evaluation e;
  for (std::size_t i = 0; i < data.size(); ++i) {
    e.loss += cross_entropy(scores[i], data.labels[i]);
    e.accuracy += detail::argmax(scores[i]) == data.labels[i] ? 1.0 : 0.0;
  }
  e.loss /= static_cast<double>(data.size());
  e.accuracy /= static_cast<double>(data.size());
  return e;
}

struct BatchStats {
  double loss_sum = 0.0;
  double correct = 0.0;
};

// Mean cross-entropy and its gradient over `items`. Per-item gradients are
// summed in index order, so the result does not depend on thread count.
inline double batch_gradient(const Network& net, const LabeledInputs& data,
                             const std::vector<std::size_t>& items, double surrogate_slope,
                             std::uint64_t noise_seed, std::uint64_t pass,
                             NetworkWeights& grads, std::size_t threads = 0,
                             BatchStats* stats = nullptr) {
  const auto& spec = net.spec();
  std::vector<NetworkWeights> per_item(items.size(), NetworkWeights::zeros(spec));
  std::vector<double> losses(items.size());
  std::vector<int> correct(items.size());
  const double inv_batch = 1.0 / static_cast<double>(items.size());
  detail::parallel_for(items.size(), threads, [&](std::size_t b) {
    const std::size_t i = items[b];
    ForwardRecord rec;
    const auto scores = net.forward(data.inputs[i], item_noise_seed(noise_seed, pass, i), &rec);
    losses[b] = cross_entropy(scores, data.labels[i]);
    correct[b] = detail::argmax(scores) == data.labels[i] ? 1 : 0;
    auto g = detail::softmax(scores);
    g[data.labels[i]] -= 1.0;
    for (double& x : g) x *= inv_batch;
    net.backward(data.inputs[i], rec, g, surrogate_slope, per_item[b]);
  });
  grads = NetworkWeights::zeros(spec);
  double loss = 0.0;
  for (std::size_t b = 0; b < items.size(); ++b) {
    detail::add_into(grads, per_item[b]);
    loss += losses[b];
    if (stats != nullptr) stats->correct += correct[b];
  }
  if (stats != nullptr) stats->loss_sum += loss;
  return loss * inv_batch;
}

class Adam {
 public:
  Adam(const NetworkWeights& shape, double lr, double weight_decay,
       std::vector<double> tensor_lr_scale = {1.0, 1.0, 1.0})
      : lr_(lr), decay_(weight_decay), scale_(std::move(tensor_lr_scale)), m_(shape), v_(shape) {
    for (Matrix* t : m_.tensors()) t->fill(0.0);
    for (Matrix* t : v_.tensors()) t->fill(0.0);
  }

  void step(NetworkWeights& w, const NetworkWeights& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    auto wt = w.tensors();
    auto gt = g.tensors();
    auto mt = m_.tensors();
    auto vt = v_.tensors();
    for (std::size_t t = 0; t < wt.size(); ++t) {
      auto& wd = wt[t]->data();
      const auto& gd = gt[t]->data();
      auto& md = mt[t]->data();
      auto& vd = vt[t]->data();
      const double lr = lr_ * scale_.at(t);
      for (std::size_t i = 0; i < wd.size(); ++i) {
        md[i] = kBeta1 * md[i] + (1.0 - kBeta1) * gd[i];
        vd[i] = kBeta2 * vd[i] + (1.0 - kBeta2) * gd[i] * gd[i];
        wd[i] -= lr * ((md[i] / c1) / (std::sqrt(vd[i] / c2) + kEps) + decay_ * wd[i]);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  double decay_;
  std::vector<double> scale_;
  std::size_t t_ = 0;
  NetworkWeights m_;
  NetworkWeights v_;
};

// Evaluation seed used for the test split; shared by train() metrics and the
// ladder so an Ideal ladder entry reproduces the final training metric.
inline std::uint64_t test_noise_seed(std::uint64_t training_seed) {
  return neuron_seed(training_seed, 0x7e57);
}

struct EpochMetrics {
  std::size_t epoch = 0;
  std::string split;
  double accuracy = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  Network network;
  std::vector<EpochMetrics> metrics;
};

inline std::string format_metrics_csv(const std::vector<EpochMetrics>& metrics) {
  std::string out = "epoch,split,accuracy,loss\n";
  for (const auto& m : metrics) {
    out += std::to_string(m.epoch) + "," + m.split + "," + format_number(m.accuracy) + "," +
           format_number(m.loss) + "\n";
  }
  return out;
}

// Fresh network for `spec` with weights drawn from cfg.seed.
inline Network initial_network(const NetworkSpec& spec, const TrainingConfig& cfg) {
  return Network(spec,
                 NetworkWeights::random(spec, neuron_seed(cfg.seed, 0xA11CE), cfg.init_input_std,
                                        cfg.init_recurrent_std, cfg.init_output_std),
                 cfg.quantize_aware);
}

// Minimizes cross-entropy. The mismatch sample is whatever `net` was realized
// with (fixed for the run); noise is redrawn every pass. Train metrics are
// accumulated over each epoch's own minibatch passes; when `test` is given the
// test split is evaluated after every epoch.
inline TrainResult train(Network net, const LabeledInputs& train_set, const LabeledInputs* test,
                         const TrainingConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0) throw ConfigError("training set is empty");
  if (train_set.n_classes != net.spec().n_classes) {
    throw ConfigError("dataset has " + std::to_string(train_set.n_classes) +
                      " classes, network has " + std::to_string(net.spec().n_classes));
  }
  net.set_quantized(cfg.quantize_aware);
  Adam opt(net.weights(), cfg.learning_rate, cfg.weight_decay,
           {1.0, cfg.recurrent_lr_scale, 1.0});
  std::mt19937_64 shuffle_rng(neuron_seed(cfg.seed, 0x5417f1e));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{net, {}};
  std::uint64_t pass = 1;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    double epoch_correct = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::vector<std::size_t> batch(
          order.begin() + static_cast<std::ptrdiff_t>(start),
          order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), start + cfg.batch_size)));
      NetworkWeights grads;
      BatchStats stats;
      const double loss = batch_gradient(net, train_set, batch, cfg.surrogate_slope, cfg.seed,
                                         pass++, grads, cfg.threads, &stats);
      epoch_loss += stats.loss_sum;
      epoch_correct += stats.correct;
      if (!std::isfinite(loss)) {
        std::ostringstream os;
        os << "training diverged: non-finite loss at epoch " << epoch << ", batch starting at "
           << start << " (learning_rate=" << cfg.learning_rate << ")";
        throw NumericalError(os.str());
      }
      NetworkWeights w = net.weights();
      opt.step(w, grads);
      for (const Matrix* m : w.tensors()) {
        for (double x : m->data()) {
          if (!std::isfinite(x)) {
            throw NumericalError("training diverged: non-finite weight after the update at epoch " +
                                 std::to_string(epoch) + ", batch starting at " +
                                 std::to_string(start));
          }
        }
      }
      net.set_weights(std::move(w));
    }
    const auto n = static_cast<double>(train_set.size());
    result.metrics.push_back({epoch, "train", epoch_correct / n, epoch_loss / n});
    if (test != nullptr) {
      const Evaluation te = evaluate(net, *test, test_noise_seed(cfg.seed), cfg.threads);
      result.metrics.push_back({epoch, "test", te.accuracy, te.loss});
    }
  }
  result.network = std::move(net);
  return result;
}

struct LadderRow {
  FidelityLevel level = FidelityLevel::kIdeal;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  std::vector<double> accuracies;  // one per seed
};

inline LadderRow summarize(FidelityLevel level, std::vector<double> acc) {
  LadderRow row;
  row.level = level;
  row.accuracies = std::move(acc);
  const auto n = static_cast<double>(row.accuracies.size());
  for (double a : row.accuracies) row.accuracy_mean += a;
  row.accuracy_mean /= n;
  double ss = 0.0;
  for (double a : row.accuracies) ss += (a - row.accuracy_mean) * (a - row.accuracy_mean);
  // Sample standard deviation; zero for a single seed.
  row.accuracy_std = row.accuracies.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return row;
}

// Hardware-aware ladder: for every level and seed, realize the network at
// that level (mismatch sample from the seed), train it there, and evaluate
// on the test split at the same level. Runs are independent and execute in
// parallel; each one is deterministic, so the table does not depend on the
// thread count.
inline std::vector<LadderRow> evaluate_ladder(const NetworkSpec& spec, const LabeledInputs& train_set,
                                              const LabeledInputs& test_set,
                                              const TrainingConfig& cfg,
                                              const std::vector<FidelityLevel>& levels,
                                              const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("ladder needs at least one seed");
  const std::size_t n_runs = levels.size() * seeds.size();
  std::vector<double> acc(n_runs);
  detail::parallel_for(n_runs, cfg.threads, [&](std::size_t run) {
    TrainingConfig c = cfg;
    c.seed = seeds[run % seeds.size()];
    c.threads = 1;
    NetworkSpec s = spec;
    s.level = levels[run / seeds.size()];
    s.mismatch_seed = c.seed;
    const TrainResult r = train(initial_network(s, c), train_set, nullptr, c);
    acc[run] = evaluate(r.network, test_set, test_noise_seed(c.seed), 1).accuracy;
  });
  std::vector<LadderRow> rows;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    rows.push_back(summarize(levels[l], {acc.begin() + static_cast<std::ptrdiff_t>(l * seeds.size()),
                                         acc.begin() + static_cast<std::ptrdiff_t>((l + 1) * seeds.size())}));
  }
  return rows;
}

// Fixed trained weights re-realized at every level; the seed picks the
// mismatch sample and the noise stream.
inline std::vector<LadderRow> evaluate_checkpoint_ladder(Network net, const LabeledInputs& test_set,
                                                         const std::vector<FidelityLevel>& levels,
                                                         const std::vector<std::uint64_t>& seeds,
                                                         std::size_t threads = 0) {
  if (seeds.empty()) throw ConfigError("ladder needs at least one seed");
  std::vector<LadderRow> rows;
  for (FidelityLevel level : levels) {
    std::vector<double> acc;
    for (std::uint64_t seed : seeds) {
      net.set_level(level, seed);
      acc.push_back(evaluate(net, test_set, test_noise_seed(seed), threads).accuracy);
    }
    rows.push_back(summarize(level, std::move(acc)));
  }
  return rows;
}

inline std::string format_ladder_csv(const std::vector<LadderRow>& rows) {
  std::string out = "level,accuracy_mean,accuracy_std,n_seeds\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.level)) + "," + format_number(r.accuracy_mean) + "," +
           format_number(r.accuracy_std) + "," + std::to_string(r.accuracies.size()) + "\n";
  }
  return out;
}

}  // namespace lraf
