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
#include <random>
#include <vector>

#include "lraf/core.hpp"
#include "lraf/network.hpp"
#include "lraf/train.hpp"

namespace lraf {

void PrintTo(FidelityLevel level, std::ostream* os) { *os << to_string(level); }

namespace {

// Eight resonators that never reach threshold, read out on the membrane.
NetworkSpec subthreshold_spec(FidelityLevel level) {
  NetworkSpec s;
  s.n_inputs = 4;
  s.n_hidden = 8;
  s.n_classes = 3;
  s.recurrent = true;
  s.neurons = resonator_bank(8, 100.0, 400.0, 20e-3, 1e3);
  s.level = level;
  s.dt = 1e-4;
  s.readout_tau = 10e-3;
  s.readout = ReadoutSource::kMembrane;
  s.mismatch_seed = 4;
  return s;
}

Matrix random_counts(std::size_t n_steps, std::size_t n_inputs, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution spike(p);
  Matrix m(n_steps, n_inputs);
  for (double& x : m.data()) x = spike(rng) ? 1.0 : 0.0;
  return m;
}

double loss_of(const Network& net, const Matrix& input, std::uint32_t label, std::uint64_t seed) {
  return cross_entropy(net.forward(input, seed), label);
}

TEST(Network, ZeroInputGivesEqualScores) {
  auto spec = subthreshold_spec(FidelityLevel::kIdeal);
  spec.readout = ReadoutSource::kSpikes;
  spec.neurons = resonator_bank(8, 100.0, 400.0, 20e-3, 0.5);
  const Network net(spec, NetworkWeights::random(spec, 1, 0.5, 0.5, 1.0));
  const auto scores = net.forward(Matrix(50, spec.n_inputs), 0);
  for (double s : scores) EXPECT_EQ(s, scores[0]);
}

TEST(Network, SingleSpikeJumpsUByQuantizedWeight) {
  NetworkSpec spec = subthreshold_spec(FidelityLevel::kIdeal);
  spec.n_inputs = 1;
  spec.n_hidden = 1;
  spec.neurons = {RafParams::symmetric(kTwoPi * 200.0, 20e-3, 1e3)};
  NetworkWeights w = NetworkWeights::zeros(spec);
  w.input(0, 0) = 0.3217;
  const Network net(spec, w, true);
  const auto q = quantize(w.input);
  Matrix input(10, 1);
  input(4, 0) = 1.0;
  ForwardRecord rec;
  net.forward(input, 0, &rec);
  EXPECT_EQ(rec.u(3, 0), 0.0);
  EXPECT_EQ(rec.u(4, 0), q.codes[0] * q.scale);
  EXPECT_EQ(rec.v(4, 0), 0.0);
}

TEST(Network, RejectsMismatchedShapes) {
  const auto spec = subthreshold_spec(FidelityLevel::kIdeal);
  const Network net(spec, NetworkWeights::zeros(spec));
  EXPECT_THROW(net.forward(Matrix(10, 3), 0), ConfigError);
  NetworkWeights bad = NetworkWeights::zeros(spec);
  bad.output = Matrix(2, 8);
  EXPECT_THROW(Network(spec, bad), ConfigError);
  auto s2 = spec;
  s2.neurons.pop_back();
  EXPECT_THROW(Network(s2, NetworkWeights::zeros(spec)), ConfigError);
}

TEST(Network, BatchEqualsSequential) {
  auto spec = subthreshold_spec(FidelityLevel::kNoisy);
  spec.neurons = resonator_bank(8, 100.0, 400.0, 20e-3, 0.2);
  spec.readout = ReadoutSource::kSpikes;
  const Network net(spec, NetworkWeights::random(spec, 2, 0.3, 0.1, 1.0));
  std::vector<Matrix> inputs;
  for (std::uint64_t i = 0; i < 6; ++i) inputs.push_back(random_counts(300, 4, 0.05, i));
  const auto batch = forward_batch(net, inputs, 99, 3);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    EXPECT_EQ(batch[i], net.forward(inputs[i], item_noise_seed(99, 0, i)));
  }
}

// Ideal hidden states equal per-neuron raf-core runs driven by W_in s.
TEST(Network, IdealMatchesCoreSimulation) {
  auto spec = subthreshold_spec(FidelityLevel::kIdeal);
  spec.recurrent = false;
  const Network net(spec, NetworkWeights::random(spec, 3, 0.3, 0.0, 1.0));
  const Matrix input = random_counts(400, 4, 0.05, 8);
  ForwardRecord rec;
  net.forward(input, 0, &rec);
  const auto& w = net.effective_weights();
  for (std::size_t i = 0; i < spec.n_hidden; ++i) {
    std::vector<SpikeEvent> events;
    for (std::size_t k = 0; k < input.rows(); ++k) {
      double drive = 0.0;
      for (std::size_t c = 0; c < spec.n_inputs; ++c) {
        if (input(k, c) != 0.0) drive += w.input(i, c) * input(k, c);
      }
      if (drive != 0.0) events.push_back({static_cast<double>(k) * spec.dt, drive});
    }
    const auto trace = simulate(spec.neurons[i], InputSignal::events(events), spec.dt, input.rows());
    for (std::size_t k = 0; k < input.rows(); ++k) {
      ASSERT_EQ(rec.u(k, i), trace.samples[k].u) << i << "," << k;
      ASSERT_EQ(rec.v(k, i), trace.samples[k].v) << i << "," << k;
    }
  }
}

TEST(Network, HiddenStatesLinearInInput) {
  for (FidelityLevel level : {FidelityLevel::kIdeal, FidelityLevel::kParamConstrained}) {
    const auto spec = subthreshold_spec(level);
    const Network net(spec, NetworkWeights::random(spec, 5, 0.3, 0.0, 1.0), false);
    const Matrix a = random_counts(300, 4, 0.05, 1);
    const Matrix b = random_counts(300, 4, 0.05, 2);
    Matrix sum = a;
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += 2.0 * b.data()[i];
    ForwardRecord ra, rb, rs;
    net.forward(a, 0, &ra);
    net.forward(b, 0, &rb);
    net.forward(sum, 0, &rs);
    for (std::size_t i = 0; i < rs.u.size(); ++i) {
      ASSERT_NEAR(rs.u.data()[i], ra.u.data()[i] + 2.0 * rb.u.data()[i], 1e-12);
      ASSERT_NEAR(rs.v.data()[i], ra.v.data()[i] + 2.0 * rb.v.data()[i], 1e-12);
    }
  }
}

class GradientCheck : public ::testing::TestWithParam<FidelityLevel> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const auto spec = subthreshold_spec(GetParam());
  Network net(spec, NetworkWeights::random(spec, 6, 0.3, 0.1, 1.0), false);
  const Matrix input = random_counts(300, 4, 0.05, 3);
  const std::uint32_t label = 1;
  const std::uint64_t noise = 17;

  ForwardRecord rec;
  auto g = detail::softmax(net.forward(input, noise, &rec));
  for (double z : rec.z.data()) ASSERT_EQ(z, 0.0);
  g[label] -= 1.0;
  NetworkWeights grads = NetworkWeights::zeros(spec);
  net.backward(input, rec, g, 10.0, grads);

  const NetworkWeights base = net.weights();
  const auto analytic = grads.tensors();
  std::size_t checked = 0;
  for (std::size_t t = 0; t < analytic.size(); ++t) {
    for (std::size_t i = 0; i < analytic[t]->size(); ++i) {
      const double h = 1e-5;
      NetworkWeights plus = base, minus = base;
      plus.tensors()[t]->data()[i] += h;
      minus.tensors()[t]->data()[i] -= h;
      net.set_weights(plus);
      const double lp = loss_of(net, input, label, noise);
      net.set_weights(minus);
      const double lm = loss_of(net, input, label, noise);
      const double fd = (lp - lm) / (2.0 * h);
      const double an = analytic[t]->data()[i];
      EXPECT_LE(std::abs(an - fd), 1e-4 * std::max(std::abs(an), std::abs(fd)) + 1e-12)
          << "tensor " << t << " index " << i << " analytic " << an << " fd " << fd;
      ++checked;
    }
  }
  net.set_weights(base);
  EXPECT_EQ(checked, 8u * 4u + 8u * 8u + 3u * 8u);
}

INSTANTIATE_TEST_SUITE_P(AllLevels, GradientCheck, ::testing::ValuesIn(kAllLevels),
                         [](const auto& info) {
                           std::string name(to_string(info.param));
                           for (char& c : name) {
                             if (c == '-') c = '_';
                           }
                           return name;
                         });

TEST(Network, ZeroUpstreamGradientGivesZeroGradients) {
  auto spec = subthreshold_spec(FidelityLevel::kNoisy);
  spec.neurons = resonator_bank(8, 100.0, 400.0, 20e-3, 0.2);
  spec.readout = ReadoutSource::kSpikes;
  const Network net(spec, NetworkWeights::random(spec, 7, 0.5, 0.2, 1.0));
  const Matrix input = random_counts(300, 4, 0.05, 4);
  ForwardRecord rec;
  net.forward(input, 1, &rec);
  NetworkWeights grads = NetworkWeights::zeros(spec);
  net.backward(input, rec, std::vector<double>(3, 0.0), 10.0, grads);
  EXPECT_EQ(grads, NetworkWeights::zeros(spec));
}

// d(score)/d(W_in) for one input spike equals the time-averaged readout of
// the neuron's unit impulse response.
TEST(Network, InputGradientEqualsImpulseResponseSum) {
  NetworkSpec spec = subthreshold_spec(FidelityLevel::kIdeal);
  spec.n_inputs = 1;
  spec.n_hidden = 1;
  spec.n_classes = 1;
  spec.recurrent = false;
  spec.neurons = {RafParams::symmetric(kTwoPi * 150.0, 30e-3, 1e3)};
  NetworkWeights w = NetworkWeights::zeros(spec);
  w.input(0, 0) = 0.7;
  w.output(0, 0) = 1.0;
  const Network net(spec, w, false);
  const std::size_t n = 500, k0 = 37;
  Matrix input(n, 1);
  input(k0, 0) = 1.0;
  ForwardRecord rec;
  net.forward(input, 0, &rec);
  NetworkWeights grads = NetworkWeights::zeros(spec);
  net.backward(input, rec, std::vector<double>{1.0}, 10.0, grads);

  const auto trace = simulate(spec.neurons[0], InputSignal::impulse(1.0, static_cast<double>(k0) * spec.dt),
                              spec.dt, n);
  const double a = std::exp(-spec.dt / spec.readout_tau);
  double y = 0.0, total = 0.0;
  for (const auto& s : trace.samples) {
    y = a * y + (1.0 - a) * s.v;
    total += y;
  }
  EXPECT_NEAR(grads.input(0, 0), total / static_cast<double>(n), 1e-12);
}

TEST(Network, QuantizedForwardUsesFakeQuantizedWeights) {
  const auto spec = subthreshold_spec(FidelityLevel::kIdeal);
  const auto w = NetworkWeights::random(spec, 8, 0.3, 0.1, 1.0);
  const Network q(spec, w, true);
  EXPECT_EQ(q.effective_weights().input, fake_quantize(w.input));
  EXPECT_EQ(q.effective_weights().output, fake_quantize(w.output));
  const Network f(spec, w, false);
  EXPECT_EQ(f.effective_weights(), w);
}

}  // namespace
}  // namespace lraf
