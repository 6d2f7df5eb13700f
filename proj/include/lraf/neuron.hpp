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

// A single RAF neuron realized at a given fidelity level.
//
// Per step k, from state x:
//   y = Phi x                          linear part, exact
//     + Psi r(x)                       TCA saturation residual (NonlinearTca+)
//   y = D_k y                          discrete charge sharing (fast sampling)
//   y += Gamma I[k] + e_u J[k]         inputs
//   y += noise                         (Noisy)
//   y = clamp(y, rails)                (NonlinearTca+)
//
// r(x) = [-omega_v (g(v) - v), omega_u (g(u) - u)] where g is the TCA
// transfer curve in state units. The residual is integrated with exponential
// Euler, so the small-signal limit coincides with the linear neuron.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "lraf/core.hpp"
#include "lraf/hardware.hpp"

namespace lraf {

// Which calibrated knobs had to be pulled into range during realization.
struct RealizationReport {
  double i_bias = 0.0;
  double f_sc_u = 0.0;
  double f_sc_v = 0.0;
  bool bias_clamped = false;
  bool f_sc_u_clamped = false;
  bool f_sc_v_clamped = false;
  bool discrete_sc_u = false;
  bool discrete_sc_v = false;
};

class HardwareNeuron {
 public:
  using Rng = std::mt19937_64;

  FidelityLevel level() const { return level_; }
  // Parameters of the continuous matrix actually integrated. With discrete
  // charge sharing the switched-capacitor leak is not part of these.
  const RafParams& params() const { return prop_.params(); }
  // Continuous-time equivalent including the switched-capacitor leak.
  const RafParams& equivalent_params() const { return equivalent_; }
  const Propagator& propagator() const { return prop_; }
  double dt() const { return prop_.dt(); }
  const RealizationReport& report() const { return report_; }
  const MismatchSample& mismatch() const { return mismatch_; }
  bool nonlinear() const { return nonlinear_; }
  double rail_low() const { return rail_low_; }
  double rail_high() const { return rail_high_; }
  double noise_sigma() const { return noise_sigma_; }

  // Deterministic, input-free part of step k.
  NeuronState propagate(const NeuronState& x, std::size_t k) const {
    NeuronState y = prop_.transition() * x;
    if (nonlinear_) {
      const NeuronState r = residual(x);
      const Mat2& psi = prop_.integral();
      y.u += psi.m00 * r.u + psi.m01 * r.v;
      y.v += psi.m10 * r.u + psi.m11 * r.v;
    }
    y.u *= charge_share_u(k);
    y.v *= charge_share_v(k);
    return y;
  }

  // Vector-Jacobian product of propagate() at x for step k.
  NeuronState propagate_vjp(const NeuronState& x, std::size_t k,
                            const NeuronState& grad) const {
    const NeuronState g{grad.u * charge_share_u(k), grad.v * charge_share_v(k)};
    NeuronState out = prop_.transition().transposed() * g;
    if (nonlinear_) {
      const NeuronState w = prop_.integral().transposed() * g;
      const RafParams& p = prop_.params();
      out.u += w.v * p.omega_u * (curve_.slope(x.u / scale_) - 1.0);
      out.v -= w.u * p.omega_v * (curve_.slope(x.v / scale_) - 1.0);
    }
    return out;
  }

  NeuronState advance(const NeuronState& x, std::size_t k, double impulse,
                      double current, Rng& rng) const {
    NeuronState y;
    if (!nonlinear_ && !report_.discrete_sc_u && !report_.discrete_sc_v) {
      y = prop_.advance(x, impulse, current);
    } else {
      y = propagate(x, k);
      const Mat2& psi = prop_.integral();
      y.u += psi.m00 * current + impulse;
      y.v += psi.m10 * current;
    }
    if (noise_sigma_ > 0.0) {
      const NeuronState n = noise_increment(prop_.dt(), noise_sigma_, rng);
      y.u += n.u;
      y.v += n.v;
    }
    if (nonlinear_) {
      y.u = std::clamp(y.u, rail_low_, rail_high_);
      y.v = std::clamp(y.v, rail_low_, rail_high_);
    }
    return y;
  }

  // True when the rail clamp holds this component (its gradient is cut).
  bool at_rail(double x) const {
    return nonlinear_ && (x <= rail_low_ || x >= rail_high_);
  }

  bool fires(const NeuronState& x) const { return prop_.fires(x); }

  StateTrace simulate(const InputSignal& input, std::size_t n_steps,
                      std::uint64_t noise_seed, NeuronState initial = {}) const {
    if (n_steps < 1) throw ConfigError("simulation needs at least one step");
    const auto [impulses, currents] = input.discretize(prop_.dt(), n_steps);
    Rng rng(noise_seed);
    StateTrace trace;
    trace.dt = prop_.dt();
    trace.params = prop_.params();
    trace.samples.reserve(n_steps);
    NeuronState x = initial;
    for (std::size_t k = 0; k < n_steps; ++k) {
      x = advance(x, k, impulses[k], currents[k], rng);
      if (!x.finite()) {
        throw NumericalError("non-finite state at step " + std::to_string(k) +
                             " with " + prop_.params().describe());
      }
      trace.samples.push_back({x.u, x.v, fires(x)});
    }
    return trace;
  }

 private:
  friend HardwareNeuron realize_neuron(const RafParams&, const HardwareConfig&,
                                       FidelityLevel, double, std::uint64_t);

  HardwareNeuron(FidelityLevel level, const RafParams& params, double dt)
      : level_(level), prop_(params, dt), equivalent_(params) {}

  NeuronState residual(const NeuronState& x) const {
    const RafParams& p = prop_.params();
    return {-p.omega_v * (g(x.v) - x.v), p.omega_u * (g(x.u) - x.u)};
  }
  double g(double x) const { return scale_ * curve_.value(x / scale_); }

  static std::size_t events_in_step(double f, double dt, std::size_t k) {
    // Switching instants m / f falling in ((k - 1) dt, k dt].
    constexpr double kEps = 1e-9;
    const double hi = std::floor(static_cast<double>(k) * dt * f + kEps);
    const double lo =
        std::floor((static_cast<double>(k) - 1.0) * dt * f + kEps);
    return static_cast<std::size_t>(hi - lo);
  }
  // Switching events per step are few, so repeated multiplication is exact
  // enough and much cheaper than pow().
  static double power(double base, std::size_t n) {
    double r = 1.0;
    for (std::size_t i = 0; i < n; ++i) r *= base;
    return r;
  }
  double charge_share_u(std::size_t k) const {
    if (!report_.discrete_sc_u) return 1.0;
    return power(share_u_, events_in_step(report_.f_sc_u, prop_.dt(), k));
  }
  double charge_share_v(std::size_t k) const {
    if (!report_.discrete_sc_v) return 1.0;
    return power(share_v_, events_in_step(report_.f_sc_v, prop_.dt(), k));
  }

  FidelityLevel level_;
  Propagator prop_;
  RafParams equivalent_;
  RealizationReport report_;
  MismatchSample mismatch_;
  bool nonlinear_ = false;
  TransferCurve curve_ = TransferCurve::hyperbolic_tangent();
  double scale_ = 1.0;  // g(x) = scale * curve(x / scale)
  double rail_low_ = -kNoDecay;
  double rail_high_ = kNoDecay;
  double share_u_ = 1.0;  // per-event charge-sharing factor C / (C + C_f)
  double share_v_ = 1.0;
  double noise_sigma_ = 0.0;
};

// Realizes `requested` (used verbatim at Ideal) on hardware `cfg`. From
// ParamConstrained on, omega and tau come from the knobs in `cfg`, clamped to
// the calibrated ranges; `seed` selects the mismatch sample. Switching slower
// than 2 samples per period is modelled as discrete charge sharing.
inline HardwareNeuron realize_neuron(const RafParams& requested,
                                     const HardwareConfig& cfg,
                                     FidelityLevel level, double dt,
                                     std::uint64_t seed) {
  requested.validate();
  if (level == FidelityLevel::kIdeal) return HardwareNeuron(level, requested, dt);

  cfg.validate();
  const CalibrationTable& cal = cfg.calibration;
  RealizationReport rep;
  rep.i_bias = std::clamp(cfg.i_bias, cal.i_bias_min, cal.i_bias_max);
  rep.bias_clamped = rep.i_bias != cfg.i_bias;
  rep.f_sc_u = std::clamp(cfg.f_sc_u, cal.f_sc_min, cal.f_sc_max);
  rep.f_sc_v = std::clamp(cfg.f_sc_v, cal.f_sc_min, cal.f_sc_max);
  rep.f_sc_u_clamped = rep.f_sc_u != cfg.f_sc_u;
  rep.f_sc_v_clamped = rep.f_sc_v != cfg.f_sc_v;
  rep.discrete_sc_u = dt < 0.5 / rep.f_sc_u;
  rep.discrete_sc_v = dt < 0.5 / rep.f_sc_v;

  const double omega = omega_from_bias(rep.i_bias, cal);
  MismatchSample mm;
  if (includes(level, FidelityLevel::kMismatch)) {
    mm = sample_mismatch(seed, cal.mismatch_sigma_omega, cal.mismatch_sigma_tau);
  }

  // In the discrete regime only the parasitic leak stays in the continuous
  // matrix; charge sharing is applied at the switching instants.
  auto continuous_tau = [&](double f_sc, bool discrete) {
    return discrete ? tau_leak(rep.i_bias, cal) : tau_from_fsc(f_sc, rep.i_bias, cfg);
  };
  RafParams p{omega, omega, continuous_tau(rep.f_sc_u, rep.discrete_sc_u),
              continuous_tau(rep.f_sc_v, rep.discrete_sc_v), requested.theta};
  p = apply_mismatch(p, mm);

  HardwareNeuron n(level, p, dt);
  n.report_ = rep;
  n.equivalent_ = apply_mismatch(
      RafParams{omega, omega, tau_from_fsc(rep.f_sc_u, rep.i_bias, cfg),
                tau_from_fsc(rep.f_sc_v, rep.i_bias, cfg), requested.theta},
      mm);
  n.mismatch_ = mm;
  const double share = cfg.c_state / (cfg.c_state + cfg.c_fringe);
  // A tau factor m stretches the decay: per-event factor becomes share^(1/m).
  n.share_u_ = std::pow(share, 1.0 / mm.m_tau_u);
  n.share_v_ = std::pow(share, 1.0 / mm.m_tau_v);

  if (includes(level, FidelityLevel::kNonlinearTca)) {
    n.nonlinear_ = true;
    // i_bias / gm in state units; independent of the bias itself.
    n.scale_ = 1.0 / (kTwoPi * cal.k_omega * cfg.c_state * cfg.volts_per_unit());
    n.rail_low_ = cfg.from_volts(cal.gm_linear_low);
    n.rail_high_ = cfg.from_volts(cal.gm_linear_high);
  }
  if (includes(level, FidelityLevel::kNoisy)) n.noise_sigma_ = cal.noise_sigma;
  return n;
}

// Linear dynamics implied by the knobs, without range limits (the Ideal
// reading of a hardware configuration).
inline RafParams params_from_knobs(const HardwareConfig& cfg, double theta) {
  if (!(cfg.i_bias >= 0.0) || !std::isfinite(cfg.i_bias)) {
    throw ConfigError("bias current must be finite and >= 0");
  }
  const double omega = kTwoPi * cfg.calibration.k_omega * cfg.i_bias;
  return {omega, omega, tau_from_fsc(cfg.f_sc_u, cfg.i_bias, cfg),
          tau_from_fsc(cfg.f_sc_v, cfg.i_bias, cfg), theta};
}

// Hardware knobs that realize `params` on `base` (ignoring the parasitic
// leak, which is what the ladder exposes). omega_u != omega_v collapses to
// their geometric mean since both TCAs share one bias.
inline HardwareConfig knobs_for(const RafParams& params, HardwareConfig base) {
  base.i_bias = bias_for_omega(params.natural_omega(), base.calibration);
  const double fu = fsc_for_tau(params.tau_u, base);
  const double fv = fsc_for_tau(params.tau_v, base);
  base.f_sc_u = fu > 0.0 ? fu : base.calibration.f_sc_min;
  base.f_sc_v = fv > 0.0 ? fv : base.calibration.f_sc_min;
  return base;
}

}  // namespace lraf
