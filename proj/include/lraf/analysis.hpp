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

// Measurement helpers for simulated traces: spectral peak, decay envelope,
// phase lag, and least-squares lines.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <vector>

#include "lraf/core.hpp"
#include "lraf/error.hpp"

namespace lraf {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ConfigError("fit_line needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

// Dominant frequency (Hz) of a real signal: Hann window, zero padding by
// `pad` (8x by default), then a parabola through the log magnitudes around
// the peak bin. The DC bin is excluded.
inline double spectral_peak(std::span<const double> signal, double dt,
                            std::size_t pad = 8) {
  if (signal.size() < 4 || !(dt > 0.0) || pad < 1) {
    throw ConfigError("spectral_peak needs >= 4 samples and dt > 0");
  }
  const std::size_t n = signal.size();
  const std::size_t nfft = n * pad;
  std::vector<double> in(nfft, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                          static_cast<double>(n - 1));
    in[i] = w * signal[i];
  }
  std::vector<std::complex<double>> out(nfft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::size_t best = 1;
  for (std::size_t k = 2; k < out.size(); ++k) {
    if (std::abs(out[k]) > std::abs(out[best])) best = k;
  }
  double offset = 0.0;
  if (best + 1 < out.size()) {
    const double a = std::log(std::abs(out[best - 1]) + 1e-300);
    const double b = std::log(std::abs(out[best]) + 1e-300);
    const double c = std::log(std::abs(out[best + 1]) + 1e-300);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = 0.5 * (a - c) / denom;
  }
  return (static_cast<double>(best) + offset) / (static_cast<double>(nfft) * dt);
}

struct DecayFit {
  double tau = 0.0;
  double r_squared = 0.0;
  std::size_t n_peaks = 0;
};

// Exponential envelope from a log-linear fit through the extrema of an
// oscillating signal. Each extremum is refined with a parabola through its
// three samples.
inline DecayFit fit_envelope(std::span<const double> signal, double dt,
                             double floor_ratio = 1e-9) {
  double top = 0.0;
  for (double s : signal) top = std::max(top, std::abs(s));
  std::vector<double> t;
  std::vector<double> log_peak;
  for (std::size_t k = 1; k + 1 < signal.size(); ++k) {
    const double a = std::abs(signal[k - 1]);
    const double b = std::abs(signal[k]);
    const double c = std::abs(signal[k + 1]);
    if (b >= a && b > c && b > floor_ratio * top) {
      // Extremum of the signed samples (same sign around a lobe).
      const double ya = signal[k - 1], yb = signal[k], yc = signal[k + 1];
      const double denom = ya - 2.0 * yb + yc;
      double off = 0.0, peak = yb;
      if (denom != 0.0) {
        off = std::clamp(0.5 * (ya - yc) / denom, -0.5, 0.5);
        peak = yb - 0.25 * (ya - yc) * off;
      }
      t.push_back((static_cast<double>(k) + off) * dt);
      log_peak.push_back(std::log(std::abs(peak)));
    }
  }
  if (t.size() < 2) throw ConfigError("fit_envelope: fewer than two extrema");
  const LinearFit fit = fit_line(t, log_peak);
  DecayFit out;
  out.tau = fit.slope < 0.0 ? -1.0 / fit.slope : kNoDecay;
  out.r_squared = fit.r_squared;
  out.n_peaks = t.size();
  return out;
}

// Lag l in [0, max_lag] maximizing sum_k a[k] b[k + l].
inline std::size_t cross_correlation_peak(std::span<const double> a,
                                          std::span<const double> b,
                                          std::size_t max_lag) {
  if (a.size() != b.size() || a.empty()) {
    throw ConfigError("cross_correlation_peak: signals must match in length");
  }
  max_lag = std::min(max_lag, a.size() - 1);
  std::size_t best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t k = 0; k + lag < a.size(); ++k) acc += a[k] * b[k + lag];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  return best_lag;
}

}  // namespace lraf
