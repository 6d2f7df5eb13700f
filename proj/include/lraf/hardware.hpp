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

// Behavioral models of the analog RAF circuit: bias-controlled coupling
// (TCA), switched-capacitor leak, parasitic leak clipping, mismatch, noise
// and power, plus the fidelity ladder that composes them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

#include "lraf/core.hpp"
#include "lraf/error.hpp"

namespace lraf {

// Cumulative: each level includes every non-ideality of the levels before it.
enum class FidelityLevel : int {
  kIdeal = 0,
  kParamConstrained = 1,
  kNonlinearTca = 2,
  kMismatch = 3,
  kNoisy = 4,
};

inline constexpr std::array<FidelityLevel, 5> kAllLevels = {
    FidelityLevel::kIdeal, FidelityLevel::kParamConstrained,
    FidelityLevel::kNonlinearTca, FidelityLevel::kMismatch,
    FidelityLevel::kNoisy};

inline std::string_view to_string(FidelityLevel level) {
  switch (level) {
    case FidelityLevel::kIdeal: return "ideal";
    case FidelityLevel::kParamConstrained: return "param-constrained";
    case FidelityLevel::kNonlinearTca: return "nonlinear-tca";
    case FidelityLevel::kMismatch: return "mismatch";
    case FidelityLevel::kNoisy: return "noisy";
  }
  return "unknown";
}

inline FidelityLevel parse_level(std::string_view name) {
  for (FidelityLevel level : kAllLevels) {
    if (to_string(level) == name) return level;
  }
  throw ConfigError("unknown fidelity level '" + std::string(name) +
                    "' (expected ideal, param-constrained, nonlinear-tca, "
                    "mismatch or noisy)");
}

inline bool includes(FidelityLevel level, FidelityLevel feature) {
  return static_cast<int>(level) >= static_cast<int>(feature);
}

// Defaults anchor the resonance map to 100 Hz .. 500 kHz over the bias range
// and the power slope to 16.5 nW/nA. Mismatch and noise magnitudes are
// placeholders until measured silicon data replaces them.
struct CalibrationTable {
  double k_omega = 6.25e13;      // Hz per A: 8 nA -> 500 kHz
  double k_leak = 5.0e-10;       // s*A: tau_leak = k_leak / i_bias
  double p_slope = 16.5;         // W per A (= nW per nA)
  double p_static = 0.0;         // W
  double gm_linear_low = 0.0;    // V
  double gm_linear_high = 0.8;   // V
  double i_bias_min = 1.6e-12;   // A: 100 Hz
  double i_bias_max = 8.0e-9;    // A: 500 kHz
  double f_sc_min = 200.0;       // Hz
  double f_sc_max = 1.0e5;       // Hz
  double mismatch_sigma_omega = 0.05;
  double mismatch_sigma_tau = 0.10;
  double noise_sigma = 0.04;     // state units per sqrt(s)

  void validate(double v_dd) const {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
    detail::require(pos(k_omega), "calibration: k_omega must be positive");
    detail::require(pos(k_leak), "calibration: k_leak must be positive");
    detail::require(pos(p_slope), "calibration: p_slope must be positive");
    detail::require(nonneg(p_static), "calibration: p_static must be >= 0");
    detail::require(pos(i_bias_min) && pos(i_bias_max) && i_bias_min < i_bias_max,
                    "calibration: need 0 < i_bias_min < i_bias_max");
    detail::require(pos(f_sc_min) && pos(f_sc_max) && f_sc_min < f_sc_max,
                    "calibration: need 0 < f_sc_min < f_sc_max");
    detail::require(nonneg(gm_linear_low) && gm_linear_low < gm_linear_high &&
                        gm_linear_high <= v_dd,
                    "calibration: gm linear range must lie within [0, v_dd]");
    detail::require(nonneg(mismatch_sigma_omega) && nonneg(mismatch_sigma_tau),
                    "calibration: mismatch sigmas must be >= 0");
    detail::require(nonneg(noise_sigma), "calibration: noise_sigma must be >= 0");
  }
};

struct HardwareConfig {
  double i_bias = 1.0e-9;      // A
  double f_sc_u = 1.0e4;       // Hz
  double f_sc_v = 1.0e4;       // Hz
  double c_state = 3.2e-15;    // F, C1 = C2
  double c_fringe = 3.2e-17;   // F
  double v_dd = 0.8;           // V
  double v_cm = 0.4;           // V
  CalibrationTable calibration;

  // Half the supply: one state unit in volts.
  double volts_per_unit() const { return 0.5 * v_dd; }
  double to_volts(double state) const { return v_cm + state * volts_per_unit(); }
  double from_volts(double volts) const { return (volts - v_cm) / volts_per_unit(); }

  void validate() const {
    auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
    detail::require(pos(v_dd), "hardware: v_dd must be positive");
    detail::require(v_cm > 0.0 && v_cm < v_dd, "hardware: need 0 < v_cm < v_dd");
    detail::require(pos(c_state) && pos(c_fringe),
                    "hardware: capacitances must be positive");
    detail::require(pos(f_sc_u) && pos(f_sc_v),
                    "hardware: switching frequencies must be positive");
    detail::require(std::isfinite(i_bias) && i_bias >= 0.0,
                    "hardware: i_bias must be >= 0");
    calibration.validate(v_dd);
  }
};

namespace detail {

inline std::string amps(double a) {
  std::ostringstream os;
  os.precision(6);
  os << a << " A";
  return os.str();
}

inline void check_bias_range(double i_bias, const CalibrationTable& cal) {
  constexpr double kSlack = 1e-12;
  if (!(i_bias >= cal.i_bias_min * (1.0 - kSlack)) ||
      !(i_bias <= cal.i_bias_max * (1.0 + kSlack))) {
    std::ostringstream os;
    os << "bias current " << amps(i_bias) << " outside calibrated range ["
       << amps(cal.i_bias_min) << ", " << amps(cal.i_bias_max)
       << "] (frequency range " << cal.k_omega * cal.i_bias_min << " Hz to "
       << cal.k_omega * cal.i_bias_max << " Hz)";
    throw RangeError(os.str());
  }
}

}  // namespace detail

// Resonance is linear in the TCA bias: omega = 2 pi k_omega i_bias.
inline double omega_from_bias(double i_bias, const CalibrationTable& cal) {
  detail::check_bias_range(i_bias, cal);
  return kTwoPi * cal.k_omega * i_bias;
}

inline double bias_for_omega(double omega, const CalibrationTable& cal) {
  return omega / (kTwoPi * cal.k_omega);
}

inline double tau_switched_cap(double f_sc, const HardwareConfig& cfg) {
  if (!(f_sc > 0.0)) throw ConfigError("switching frequency must be positive");
  return cfg.c_state / (cfg.c_fringe * f_sc);
}

inline double tau_leak(double i_bias, const CalibrationTable& cal) {
  return i_bias > 0.0 ? cal.k_leak / i_bias : kNoDecay;
}

// Effective time constant: the switched-capacitor conductance in parallel
// with the TCA output conductance. i_bias == 0 disables the parasitic leak.
inline double tau_from_fsc(double f_sc, double i_bias, const HardwareConfig& cfg) {
  if (!(f_sc > 0.0)) throw ConfigError("switching frequency must be positive");
  if (!(i_bias >= 0.0)) throw ConfigError("bias current must be >= 0");
  const double rate_sc = 1.0 / tau_switched_cap(f_sc, cfg);
  const double rate_leak = i_bias > 0.0 ? i_bias / cfg.calibration.k_leak : 0.0;
  return 1.0 / (rate_sc + rate_leak);
}

inline double fsc_for_tau(double tau, const HardwareConfig& cfg) {
  if (std::isinf(tau)) return 0.0;
  return cfg.c_state / (cfg.c_fringe * tau);
}

// Transconductance consistent with omega_from_bias: omega = gm / C.
inline double transconductance(double i_bias, const HardwareConfig& cfg) {
  return kTwoPi * cfg.calibration.k_omega * i_bias * cfg.c_state;
}

// Normalized large-signal TCA curve: I / i_bias as a function of
// gm dv / i_bias. Must be odd with unit slope at the origin.
struct TransferCurve {
  double (*value)(double);
  double (*slope)(double);

  static TransferCurve hyperbolic_tangent() {
    return {[](double x) { return std::tanh(x); },
            [](double x) {
              const double t = std::tanh(x);
              return 1.0 - t * t;
            }};
  }
};

// TCA output current for a differential input delta_v (V). Below
// NonlinearTca the pair is ideal; from NonlinearTca on it saturates at the
// tail current, and when `driven_node` (V) sits at or past a rail the current
// pushing it further out is cut off.
inline double tca_current(double delta_v, double i_bias, const HardwareConfig& cfg,
                          FidelityLevel level,
                          std::optional<double> driven_node = std::nullopt,
                          TransferCurve curve = TransferCurve::hyperbolic_tangent()) {
  if (!std::isfinite(delta_v) || !(i_bias >= 0.0)) {
    throw ConfigError("tca_current: invalid input");
  }
  const double gm = transconductance(i_bias, cfg);
  if (!includes(level, FidelityLevel::kNonlinearTca)) return gm * delta_v;
  if (i_bias == 0.0) return 0.0;
  double current = i_bias * curve.value(gm * delta_v / i_bias);
  if (driven_node) {
    const auto& cal = cfg.calibration;
    if ((*driven_node >= cal.gm_linear_high && current > 0.0) ||
        (*driven_node <= cal.gm_linear_low && current < 0.0)) {
      current = 0.0;
    }
  }
  return current;
}

struct MismatchSample {
  double m_omega_u = 1.0;
  double m_omega_v = 1.0;
  double m_tau_u = 1.0;
  double m_tau_v = 1.0;
  std::uint64_t seed = 0;
};

inline RafParams apply_mismatch(const RafParams& params, const MismatchSample& s) {
  RafParams out = params;
  out.omega_u *= s.m_omega_u;
  out.omega_v *= s.m_omega_v;
  out.tau_u *= s.m_tau_u;
  out.tau_v *= s.m_tau_v;
  return out;
}

// Lognormal factors exp(sigma * N(0, 1)); positive and seed-deterministic.
inline MismatchSample sample_mismatch(std::uint64_t seed, double sigma_omega,
                                      double sigma_tau) {
  if (!(sigma_omega >= 0.0) || !(sigma_tau >= 0.0)) {
    throw ConfigError("mismatch sigmas must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MismatchSample s;
  s.seed = seed;
  s.m_omega_u = std::exp(sigma_omega * normal(rng));
  s.m_omega_v = std::exp(sigma_omega * normal(rng));
  s.m_tau_u = std::exp(sigma_tau * normal(rng));
  s.m_tau_v = std::exp(sigma_tau * normal(rng));
  return s;
}

// Per-neuron seed derivation for independent streams.
inline std::uint64_t neuron_seed(std::uint64_t base_seed, std::uint64_t index) {
  // splitmix64 finalizer over the xor, so adjacent indices decorrelate.
  std::uint64_t z = base_seed ^ (index + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Brownian increments: std noise_sigma * sqrt(dt) per state.
template <typename Rng>
NeuronState noise_increment(double dt, double noise_sigma, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("noise_increment: dt must be positive");
  if (noise_sigma == 0.0) return {};
  std::normal_distribution<double> normal(0.0, noise_sigma * std::sqrt(dt));
  const double du = normal(rng);
  const double dv = normal(rng);
  return {du, dv};
}

// Static TCA biasing dominates; the comparator is not included.
inline double power_estimate(double i_bias, const CalibrationTable& cal) {
  detail::check_bias_range(i_bias, cal);
  return cal.p_static + cal.p_slope * i_bias;
}

}  // namespace lraf
