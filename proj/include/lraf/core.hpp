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

// Linear resonate-and-fire dynamics.
//
//   d/dt [u, v] = [[-1/tau_u, -omega_v], [omega_u, -1/tau_v]] [u, v] + [I_u, 0]
//   z = H(v - theta)
//
// The subthreshold system is linear, so every step uses the exact
// discretization exp(A dt); there is no reset, z is a pure readout.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lraf/error.hpp"

namespace lraf {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Sentinel for "no decay" (1/tau == 0).
inline constexpr double kNoDecay = std::numeric_limits<double>::infinity();

struct RafParams {
  double omega_u = 0.0;  // rad/s, drives v from u
  double omega_v = 0.0;  // rad/s, drives u from v
  double tau_u = kNoDecay;
  double tau_v = kNoDecay;
  double theta = 1.0;

  static RafParams symmetric(double omega, double tau, double theta = 1.0) {
    return {omega, omega, tau, tau, theta};
  }

  double decay_u() const { return std::isinf(tau_u) ? 0.0 : 1.0 / tau_u; }
  double decay_v() const { return std::isinf(tau_v) ? 0.0 : 1.0 / tau_v; }

  // Damped resonance of the symmetric case; sqrt(omega_u * omega_v) in general.
  double natural_omega() const { return std::sqrt(omega_u * omega_v); }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "{omega_u=" << omega_u << ", omega_v=" << omega_v
       << ", tau_u=" << tau_u << ", tau_v=" << tau_v << ", theta=" << theta
       << "}";
    return os.str();
  }

  void validate() const {
    auto ok_omega = [](double w) { return std::isfinite(w) && w >= 0.0; };
    auto ok_tau = [](double t) { return t > 0.0 && !std::isnan(t); };
    if (!ok_omega(omega_u) || !ok_omega(omega_v) || !ok_tau(tau_u) ||
        !ok_tau(tau_v) || !std::isfinite(theta)) {
      throw ConfigError("invalid RAF parameters " + describe());
    }
  }
};

struct NeuronState {
  double u = 0.0;
  double v = 0.0;

  double norm() const { return std::hypot(u, v); }
  bool finite() const { return std::isfinite(u) && std::isfinite(v); }
  friend bool operator==(const NeuronState&, const NeuronState&) = default;
};

// Row-major 2x2 matrix.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

  NeuronState operator*(const NeuronState& x) const {
    return {m00 * x.u + m01 * x.v, m10 * x.u + m11 * x.v};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
            m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
  }
  Mat2 transposed() const { return {m00, m10, m01, m11}; }
  bool finite() const {
    return std::isfinite(m00) && std::isfinite(m01) && std::isfinite(m10) &&
           std::isfinite(m11);
  }
};

inline Mat2 system_matrix(const RafParams& p) {
  return {-p.decay_u(), -p.omega_v, p.omega_u, -p.decay_v()};
}

namespace detail {

// exp(A t) = exp(sigma t) (C I + S N), with sigma = tr(A)/2 and N = A - sigma I.
// N is traceless so N^2 = q I and the series collapses to cos/cosh terms.
inline Mat2 expm_at(const RafParams& p, double t) {
  const double au = p.decay_u();
  const double av = p.decay_v();
  const double sigma = -0.5 * (au + av);
  const double d = 0.5 * (av - au);
  const double q = d * d - p.omega_u * p.omega_v;

  double c = 0.0;
  double s = 0.0;
  if (q < 0.0) {
    const double k = std::sqrt(-q);
    const double kt = k * t;
    const double damp = std::exp(sigma * t);
    c = damp * std::cos(kt);
    s = damp * (std::abs(kt) < 1e-4 ? t * (1.0 - kt * kt / 6.0)
                                    : std::sin(kt) / k);
  } else if (q > 0.0) {
    const double k = std::sqrt(q);
    const double kt = k * t;
    if (kt < 1e-4) {
      const double damp = std::exp(sigma * t);
      c = damp * (1.0 + kt * kt / 2.0);
      s = damp * t * (1.0 + kt * kt / 6.0);
    } else {
      // Split form keeps both exponentials bounded (sigma + k <= 0).
      const double e1 = std::exp((sigma + k) * t);
      const double e2 = std::exp((sigma - k) * t);
      c = 0.5 * (e1 + e2);
      s = 0.5 * (e1 - e2) / k;
    }
  } else {
    const double damp = std::exp(sigma * t);
    c = damp;
    s = damp * t;
  }
  return {c + s * d, -s * p.omega_v, s * p.omega_u, c - s * d};
}

// Integral of exp(A s) over [0, t], by composite 8-point Gauss-Legendre.
// The integrand is entire, so a few panels per unit of |A| t is exact to
// rounding.
inline Mat2 expm_integral(const RafParams& p, double t) {
  static constexpr double kNodes[4] = {0.1834346424956498, 0.5255324099163290,
                                       0.7966664774136267, 0.9602898564975363};
  static constexpr double kWeights[4] = {0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
  const double rate = std::abs(p.decay_u()) + std::abs(p.decay_v()) +
                      std::abs(p.omega_u) + std::abs(p.omega_v);
  const auto panels = static_cast<std::size_t>(
      std::min(1e6, std::max(1.0, std::ceil(rate * t / 0.25))));
  const double h = t / static_cast<double>(panels);
  Mat2 acc{};
  for (std::size_t i = 0; i < panels; ++i) {
    const double mid = (static_cast<double>(i) + 0.5) * h;
    for (int j = 0; j < 4; ++j) {
      for (double sign : {-1.0, 1.0}) {
        const Mat2 e = expm_at(p, mid + sign * 0.5 * h * kNodes[j]);
        const double w = 0.5 * h * kWeights[j];
        acc.m00 += w * e.m00;
        acc.m01 += w * e.m01;
        acc.m10 += w * e.m10;
        acc.m11 += w * e.m11;
      }
    }
  }
  return acc;
}

}  // namespace detail

// exp(A dt) for the RAF system matrix.
inline Mat2 transition_matrix(const RafParams& params, double dt) {
  params.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("time step must be positive and finite");
  }
  Mat2 phi = detail::expm_at(params, dt);
  if (!phi.finite()) {
    throw NumericalError("non-finite transition matrix for " +
                         params.describe());
  }
  return phi;
}

// Exact one-step propagator for fixed (params, dt).
//
//   x[k] = Phi x[k-1] + Gamma I[k] + e_u J[k]
//
// I[k] is a current held constant over the step (zero-order hold) and J[k]
// an impulse added to u at the end of the step.
class Propagator {
 public:
  Propagator(const RafParams& params, double dt)
      : params_(params),
        dt_(dt),
        phi_(transition_matrix(params, dt)),
        psi_(detail::expm_integral(params, dt)) {}

  const RafParams& params() const { return params_; }
  double dt() const { return dt_; }
  const Mat2& transition() const { return phi_; }
  // Integral of exp(A s) over one step; its first column is Gamma.
  const Mat2& integral() const { return psi_; }
  NeuronState zoh_gain() const { return {psi_.m00, psi_.m10}; }

  NeuronState advance(const NeuronState& x, double impulse,
                      double current = 0.0) const {
    NeuronState next = phi_ * x;
    next.u += psi_.m00 * current + impulse;
    next.v += psi_.m10 * current;
    return next;
  }

  bool fires(const NeuronState& x) const { return x.v >= params_.theta; }

 private:
  RafParams params_;
  double dt_;
  Mat2 phi_;
  Mat2 psi_;
};

struct StepResult {
  NeuronState state;
  bool spike = false;
};

// One exact step with the input already integrated into an increment of u.
inline StepResult step(const NeuronState& state, const RafParams& params,
                       double input_increment, double dt) {
  const Mat2 phi = transition_matrix(params, dt);
  NeuronState next = phi * state;
  next.u += input_increment;
  if (!next.finite()) {
    throw NumericalError("non-finite state after step with " +
                         params.describe());
  }
  return {next, next.v >= params.theta};
}

struct SpikeEvent {
  double time = 0.0;       // s
  double amplitude = 0.0;  // increment of u
};

// Input current into u: either dense per-step currents or sparse impulses.
class InputSignal {
 public:
  struct Dense {
    std::vector<double> current;
  };
  struct Events {
    std::vector<SpikeEvent> events;
  };

  InputSignal() : repr_(Events{}) {}

  static InputSignal none() { return InputSignal(); }

  static InputSignal dense(std::vector<double> current) {
    InputSignal s;
    s.repr_ = Dense{std::move(current)};
    return s;
  }

  static InputSignal events(std::vector<SpikeEvent> events) {
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i].time < events[i - 1].time) {
        throw ConfigError("input event times must be nondecreasing (event " +
                          std::to_string(i) + ")");
      }
    }
    InputSignal s;
    s.repr_ = Events{std::move(events)};
    return s;
  }

  static InputSignal impulse(double amplitude, double time = 0.0) {
    return events({{time, amplitude}});
  }

  bool is_dense() const { return std::holds_alternative<Dense>(repr_); }

  // Per-step (impulse, current) sequences. Events land on the nearest step
  // boundary; events past the horizon are dropped.
  std::pair<std::vector<double>, std::vector<double>> discretize(
      double dt, std::size_t n_steps) const {
    std::vector<double> impulses(n_steps, 0.0);
    std::vector<double> currents(n_steps, 0.0);
    if (const auto* d = std::get_if<Dense>(&repr_)) {
      if (d->current.size() != n_steps) {
        throw ConfigError("dense input has " +
                          std::to_string(d->current.size()) +
                          " samples but the run has " +
                          std::to_string(n_steps) + " steps");
      }
      currents = d->current;
    } else {
      for (const auto& e : std::get<Events>(repr_).events) {
        if (e.time < 0.0) throw ConfigError("input event before t=0");
        const double k = std::round(e.time / dt);
        if (k < static_cast<double>(n_steps)) {
          impulses[static_cast<std::size_t>(k)] += e.amplitude;
        }
      }
    }
    return {std::move(impulses), std::move(currents)};
  }

 private:
  std::variant<Dense, Events> repr_;
};

struct TraceSample {
  double u = 0.0;
  double v = 0.0;
  bool z = false;
};

struct StateTrace {
  double dt = 0.0;
  std::vector<TraceSample> samples;
  RafParams params;

  std::size_t size() const { return samples.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }

  std::vector<double> u() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.u);
    return out;
  }
  std::vector<double> v() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.v);
    return out;
  }
};

// Sample k holds the state at t = k dt, after applying the step-k input.
inline StateTrace simulate(const RafParams& params, const InputSignal& input,
                           double dt, std::size_t n_steps,
                           NeuronState initial = {}) {
  if (n_steps < 1) throw ConfigError("simulation needs at least one step");
  const Propagator prop(params, dt);
  const auto [impulses, currents] = input.discretize(dt, n_steps);

  StateTrace trace;
  trace.dt = dt;
  trace.params = params;
  trace.samples.reserve(n_steps);
  NeuronState x = initial;
  for (std::size_t k = 0; k < n_steps; ++k) {
    x = prop.advance(x, impulses[k], currents[k]);
    if (!x.finite()) {
      throw NumericalError("non-finite state at step " + std::to_string(k) +
                           " with " + params.describe());
    }
    trace.samples.push_back({x.u, x.v, prop.fires(x)});
  }
  return trace;
}

// Peak |v| under a sinusoidal drive once transients have settled.
// The settling window is five of the slower decay constants, capped at half
// the run.
inline double resonance_response(const RafParams& params,
                                 double drive_frequency, double amplitude,
                                 double duration, double dt) {
  if (!(drive_frequency > 0.0)) {
    throw ConfigError("drive frequency must be positive");
  }
  if (!(duration > 0.0) || !(dt > 0.0)) {
    throw ConfigError("duration and dt must be positive");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  std::vector<double> drive(n);
  for (std::size_t k = 0; k < n; ++k) {
    drive[k] = amplitude *
               std::sin(kTwoPi * drive_frequency * static_cast<double>(k) * dt);
  }
  const StateTrace trace = simulate(params, InputSignal::dense(drive), dt, n);

  const double slow = std::max(params.tau_u, params.tau_v);
  const double settle = std::min(0.5 * duration, 5.0 * slow);
  double peak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (trace.time(k) >= settle) peak = std::max(peak, std::abs(trace.samples[k].v));
  }
  return peak;
}

}  // namespace lraf
