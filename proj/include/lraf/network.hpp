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

// Spiking network: input channels -> one layer of hardware-realized RAF
// neurons (optionally recurrent) -> leaky-integrator readout.
//
// Per step k, for hidden neuron i:
//   J[k]_i = sum_c W_in(i, c) s[k]_c + sum_j W_rec(i, j) z[k-1]_j
//   x[k]_i = neuron_i.advance(x[k-1]_i, J[k]_i)          (impulse into u)
//   z[k]_i = H(v[k]_i - theta_i)
//   y[k]   = a y[k-1] + (1 - a) W_out f[k],   a = exp(-dt / readout_tau)
// with f = z (spike readout) or f = v (membrane readout). Class scores are
// the time average of y. Gradients use exact BPTT through the recurrence with
// a fast-sigmoid surrogate for H.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lraf/error.hpp"
#include "lraf/hardware.hpp"
#include "lraf/matrix.hpp"
#include "lraf/neuron.hpp"
#include "lraf/quantize.hpp"

namespace lraf {

enum class ReadoutSource { kSpikes, kMembrane };

inline std::string_view to_string(ReadoutSource r) {
  return r == ReadoutSource::kSpikes ? "spikes" : "membrane";
}

inline ReadoutSource parse_readout(std::string_view name) {
  if (name == "spikes") return ReadoutSource::kSpikes;
  if (name == "membrane") return ReadoutSource::kMembrane;
  throw ConfigError("unknown readout '" + std::string(name) + "' (spikes or membrane)");
}

struct NetworkSpec {
  std::size_t n_inputs = 0;
  std::size_t n_hidden = 0;
  std::size_t n_classes = 0;
  bool recurrent = true;
  std::vector<RafParams> neurons;  // requested dynamics, one per hidden unit
  HardwareConfig hardware;
  FidelityLevel level = FidelityLevel::kIdeal;
  double dt = 1e-4;
  double readout_tau = 20e-3;
  ReadoutSource readout = ReadoutSource::kSpikes;
  std::uint64_t mismatch_seed = 0;

  void validate() const {
    detail::require(n_inputs >= 1 && n_hidden >= 1 && n_classes >= 1,
                    "network: layer sizes must be >= 1");
    detail::require(neurons.size() == n_hidden,
                    "network: need one neuron parameter set per hidden unit");
    detail::require(dt > 0.0 && std::isfinite(dt), "network: dt must be positive");
    detail::require(readout_tau > 0.0, "network: readout_tau must be positive");
    for (const auto& p : neurons) p.validate();
    hardware.validate();
  }
};

// Log-spaced resonator bank between f_lo and f_hi (Hz).
inline std::vector<RafParams> resonator_bank(std::size_t n, double f_lo, double f_hi,
                                             double tau, double theta) {
  if (n == 0 || !(f_lo > 0.0) || !(f_hi >= f_lo)) {
    throw ConfigError("resonator bank needs n >= 1 and 0 < f_lo <= f_hi");
  }
  std::vector<RafParams> bank;
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double f = f_lo * std::pow(f_hi / f_lo, frac);
    bank.push_back(RafParams::symmetric(kTwoPi * f, tau, theta));
  }
  return bank;
}

struct NetworkWeights {
  Matrix input;      // n_hidden x n_inputs
  Matrix recurrent;  // n_hidden x n_hidden
  Matrix output;     // n_classes x n_hidden

  static NetworkWeights zeros(const NetworkSpec& spec) {
    return {Matrix(spec.n_hidden, spec.n_inputs), Matrix(spec.n_hidden, spec.n_hidden),
            Matrix(spec.n_classes, spec.n_hidden)};
  }

  static NetworkWeights random(const NetworkSpec& spec, std::uint64_t seed,
                               double input_std, double recurrent_std, double output_std) {
    NetworkWeights w = zeros(spec);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : w.input.data()) x = input_std * normal(rng);
    if (spec.recurrent) {
      for (double& x : w.recurrent.data()) x = recurrent_std * normal(rng);
    }
    for (double& x : w.output.data()) x = output_std * normal(rng);
    return w;
  }

  std::vector<Matrix*> tensors() { return {&input, &recurrent, &output}; }
  std::vector<const Matrix*> tensors() const { return {&input, &recurrent, &output}; }
  friend bool operator==(const NetworkWeights&, const NetworkWeights&) = default;
};

inline double surrogate_derivative(double x, double slope) {
  const double d = 1.0 + slope * std::abs(x);
  return 1.0 / (d * d);
}

// Everything backward() needs from one forward pass over one item.
struct ForwardRecord {
  Matrix u;  // n_steps x n_hidden, post-step states
  Matrix v;
  Matrix z;  // spikes as 0 / 1
  std::vector<double> scores;
};

class Network {
 public:
  Network(NetworkSpec spec, NetworkWeights weights, bool quantized = true)
      : spec_(std::move(spec)), weights_(std::move(weights)), quantized_(quantized) {
    spec_.validate();
    check_shapes();
    realize();
    refresh_effective();
  }

  const NetworkSpec& spec() const { return spec_; }
  const NetworkWeights& weights() const { return weights_; }
  // Weights as used in the forward pass (fake-quantized when quantized()).
  const NetworkWeights& effective_weights() const { return effective_; }
  const std::vector<HardwareNeuron>& neurons() const { return neurons_; }
  bool quantized() const { return quantized_; }

  void set_weights(NetworkWeights w) {
    weights_ = std::move(w);
    check_shapes();
    refresh_effective();
  }
  void set_quantized(bool q) {
    quantized_ = q;
    refresh_effective();
  }
  // Re-realizes every neuron; the mismatch sample follows `mismatch_seed`.
  void set_level(FidelityLevel level, std::uint64_t mismatch_seed) {
    spec_.level = level;
    spec_.mismatch_seed = mismatch_seed;
    realize();
  }

  std::vector<double> forward(const Matrix& input, std::uint64_t noise_seed,
                              ForwardRecord* record = nullptr) const {
    if (input.cols() != spec_.n_inputs || input.rows() == 0) {
      throw ConfigError("input has " + std::to_string(input.cols()) +
                        " channels, network expects " + std::to_string(spec_.n_inputs));
    }
    const std::size_t n_steps = input.rows();
    const std::size_t n_hidden = spec_.n_hidden;
    const std::size_t n_classes = spec_.n_classes;
    const auto& w = effective_;
    if (record != nullptr) {
      record->u = Matrix(n_steps, n_hidden);
      record->v = Matrix(n_steps, n_hidden);
      record->z = Matrix(n_steps, n_hidden);
    }

    HardwareNeuron::Rng rng(noise_seed);
    std::vector<NeuronState> x(n_hidden);
    std::vector<double> drive(n_hidden), z_prev(n_hidden, 0.0), z(n_hidden), feature(n_hidden);
    std::vector<double> y(n_classes, 0.0), scores(n_classes, 0.0);
    const double a = readout_decay();

    for (std::size_t k = 0; k < n_steps; ++k) {
      std::fill(drive.begin(), drive.end(), 0.0);
      const double* s = input.row(k);
      for (std::size_t c = 0; c < spec_.n_inputs; ++c) {
        if (s[c] == 0.0) continue;
        for (std::size_t i = 0; i < n_hidden; ++i) drive[i] += w.input(i, c) * s[c];
      }
      if (spec_.recurrent) {
        for (std::size_t j = 0; j < n_hidden; ++j) {
          if (z_prev[j] == 0.0) continue;
          for (std::size_t i = 0; i < n_hidden; ++i) drive[i] += w.recurrent(i, j);
        }
      }
      for (std::size_t i = 0; i < n_hidden; ++i) {
        x[i] = neurons_[i].advance(x[i], k, drive[i], 0.0, rng);
        if (!x[i].finite()) {
          throw NumericalError("non-finite state in hidden unit " + std::to_string(i) +
                               " at step " + std::to_string(k));
        }
        z[i] = neurons_[i].fires(x[i]) ? 1.0 : 0.0;
        feature[i] = spec_.readout == ReadoutSource::kSpikes ? z[i] : x[i].v;
      }
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double* wo = w.output.row(c);
        double acc = 0.0;
        for (std::size_t i = 0; i < n_hidden; ++i) acc += wo[i] * feature[i];
        y[c] = a * y[c] + (1.0 - a) * acc;
        scores[c] += y[c];
      }
      if (record != nullptr) {
        for (std::size_t i = 0; i < n_hidden; ++i) {
          record->u(k, i) = x[i].u;
          record->v(k, i) = x[i].v;
          record->z(k, i) = z[i];
        }
      }
      z_prev.swap(z);
    }
    for (double& sc : scores) sc /= static_cast<double>(n_steps);
    if (record != nullptr) record->scores = scores;
    return scores;
  }

  // Accumulates dL/dW into `grads` given dL/dscores for one recorded item.
  // Gradients flow to the master weights straight through quantization.
  void backward(const Matrix& input, const ForwardRecord& rec,
                std::span<const double> grad_scores, double surrogate_slope,
                NetworkWeights& grads) const {
    const std::size_t n_steps = input.rows();
    const std::size_t n_hidden = spec_.n_hidden;
    const std::size_t n_classes = spec_.n_classes;
    if (rec.u.rows() != n_steps || rec.u.cols() != n_hidden) {
      throw ConfigError("backward: forward record does not match the input");
    }
    if (grad_scores.size() != n_classes) {
      throw ConfigError("backward: gradient has the wrong number of classes");
    }
    const auto& w = effective_;
    const bool spike_readout = spec_.readout == ReadoutSource::kSpikes;
    const double a = readout_decay();
    const double inv_steps = 1.0 / static_cast<double>(n_steps);

    std::vector<double> y_bar(n_classes, 0.0);
    std::vector<double> feature_bar(n_hidden), j_bar(n_hidden, 0.0), j_bar_next(n_hidden, 0.0);
    std::vector<NeuronState> carry(n_hidden);

    for (std::size_t kk = n_steps; kk-- > 0;) {
      const double* zk = rec.z.row(kk);
      const double* vk = rec.v.row(kk);
      const double* uk = rec.u.row(kk);
      for (std::size_t c = 0; c < n_classes; ++c) {
        y_bar[c] = grad_scores[c] * inv_steps + a * y_bar[c];
      }
      std::fill(feature_bar.begin(), feature_bar.end(), 0.0);
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double g = (1.0 - a) * y_bar[c];
        const double* wo = w.output.row(c);
        double* go = grads.output.row(c);
        for (std::size_t i = 0; i < n_hidden; ++i) {
          go[i] += g * (spike_readout ? zk[i] : vk[i]);
          feature_bar[i] += g * wo[i];
        }
      }
      for (std::size_t i = 0; i < n_hidden; ++i) {
        double z_bar = spike_readout ? feature_bar[i] : 0.0;
        if (spec_.recurrent) {
          for (std::size_t r = 0; r < n_hidden; ++r) z_bar += w.recurrent(r, i) * j_bar_next[r];
        }
        const HardwareNeuron& n = neurons_[i];
        NeuronState x_bar = carry[i];
        x_bar.v += z_bar * surrogate_derivative(vk[i] - n.params().theta, surrogate_slope);
        if (!spike_readout) x_bar.v += feature_bar[i];
        if (n.at_rail(uk[i])) x_bar.u = 0.0;
        if (n.at_rail(vk[i])) x_bar.v = 0.0;
        j_bar[i] = x_bar.u;
        const NeuronState prev = kk > 0 ? NeuronState{rec.u(kk - 1, i), rec.v(kk - 1, i)}
                                        : NeuronState{};
        carry[i] = n.propagate_vjp(prev, kk, x_bar);
      }
      const double* s = input.row(kk);
      for (std::size_t c = 0; c < spec_.n_inputs; ++c) {
        if (s[c] == 0.0) continue;
        for (std::size_t i = 0; i < n_hidden; ++i) grads.input(i, c) += j_bar[i] * s[c];
      }
      if (spec_.recurrent && kk > 0) {
        const double* z_prev = rec.z.row(kk - 1);
        for (std::size_t j = 0; j < n_hidden; ++j) {
          if (z_prev[j] == 0.0) continue;
          for (std::size_t i = 0; i < n_hidden; ++i) grads.recurrent(i, j) += j_bar[i];
        }
      }
      j_bar_next.swap(j_bar);
    }
  }

 private:
  double readout_decay() const { return std::exp(-spec_.dt / spec_.readout_tau); }

  void check_shapes() const {
    const auto& w = weights_;
    if (w.input.rows() != spec_.n_hidden || w.input.cols() != spec_.n_inputs ||
        w.recurrent.rows() != spec_.n_hidden || w.recurrent.cols() != spec_.n_hidden ||
        w.output.rows() != spec_.n_classes || w.output.cols() != spec_.n_hidden) {
      throw ConfigError("network weights do not match the layer sizes");
    }
  }

  void realize() {
    neurons_.clear();
    neurons_.reserve(spec_.n_hidden);
    for (std::size_t i = 0; i < spec_.n_hidden; ++i) {
      const RafParams& p = spec_.neurons[i];
      neurons_.push_back(realize_neuron(p, knobs_for(p, spec_.hardware), spec_.level, spec_.dt,
                                        neuron_seed(spec_.mismatch_seed, i)));
    }
  }

  void refresh_effective() {
    effective_ = weights_;
    if (quantized_) {
      for (Matrix* m : effective_.tensors()) *m = fake_quantize(*m);
    }
    if (!spec_.recurrent) effective_.recurrent.fill(0.0);
  }

  NetworkSpec spec_;
  NetworkWeights weights_;
  NetworkWeights effective_;
  std::vector<HardwareNeuron> neurons_;
  bool quantized_ = true;
};

}  // namespace lraf
