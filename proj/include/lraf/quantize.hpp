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

// Symmetric per-tensor 8-bit weights: value = code * scale, zero point 0,
// scale = max|w| / 127.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lraf/error.hpp"
#include "lraf/matrix.hpp"

namespace lraf {

struct QuantizedWeightMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> codes;
  double scale = 1.0;
};

inline QuantizedWeightMatrix quantize(const Matrix& w) {
  QuantizedWeightMatrix q;
  q.rows = w.rows();
  q.cols = w.cols();
  double max_abs = 0.0;
  for (double x : w.data()) {
    if (!std::isfinite(x)) throw NumericalError("cannot quantize a non-finite weight");
    max_abs = std::max(max_abs, std::abs(x));
  }
  // All-zero tensors keep scale 1.
  q.scale = max_abs > 0.0 ? max_abs / 127.0 : 1.0;
  q.codes.reserve(w.size());
  for (double x : w.data()) {
    const double code = std::clamp(std::round(x / q.scale), -127.0, 127.0);
    q.codes.push_back(static_cast<std::int8_t>(code));
  }
  return q;
}

inline Matrix dequantize(const QuantizedWeightMatrix& q) {
  Matrix w(q.rows, q.cols);
  for (std::size_t i = 0; i < q.codes.size(); ++i) {
    w.data()[i] = static_cast<double>(q.codes[i]) * q.scale;
  }
  return w;
}

inline Matrix fake_quantize(const Matrix& w) { return dequantize(quantize(w)); }

}  // namespace lraf
