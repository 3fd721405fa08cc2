// Copyright 2026 The TinyMM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TINYMM_QUANTIZER_H_
#define TINYMM_QUANTIZER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinymm/tensor.h"

namespace tinymm {

enum class QuantMode { kSymmetricWeights, kAffineActivations };

// Running min/max over every value observed so far.
struct CalibrationStats {
  float min = 0.0f;
  float max = 0.0f;
  std::uint64_t count = 0;

  void Observe(std::span<const float> values);
  void Observe(const Tensor& t) { Observe(t.data()); }
  void Merge(const CalibrationStats& other);
  bool operator==(const CalibrationStats&) const = default;
};

// scale = max|t| / (2^(bits-1) - 1), zero_point = 0. All-zero input gets scale 1.
QuantParams SymmetricParams(float max_abs, int bits);

// Range [min, max] widened to include 0 so that real zero is exactly
// representable; scale = (max - min) / (2^bits - 1) and the range floor maps
// to qmin. A zero-width range gets scale 1.
QuantParams AffineParams(const CalibrationStats& stats, int bits);

// q = clamp(round_half_even(x / scale) + zero_point).
QuantTensor QuantizeWithParams(const Tensor& t, const QuantParams& params);

// Throws EmptyTensor on an empty tensor and MissingStats when affine mode has
// no stats.
QuantTensor QuantizeTensor(const Tensor& t, int bits, QuantMode mode,
                           const std::optional<CalibrationStats>& stats = std::nullopt);

Tensor Dequantize(const QuantTensor& q);

// ||dequantize(quantize_b(W)) - W||_2^2 under symmetric weight quantization.
double QuantizationPerturbation(const Tensor& weights, int bits);

// Perturbation, scaled by the Hessian trace when one is supplied.
double LayerSensitivity(const Tensor& weights, int bits,
                        std::optional<double> hessian_trace = std::nullopt);

// Omega_i^(x) for each layer and bit option.
class SensitivityTable {
 public:
  // Stores the entry with Omega(b) clamped to at most Omega(b') for every
  // narrower option b' < b, so coarser precision is never reported as less
  // sensitive.
  void Add(std::string layer, std::map<int, double> omega_by_bits);

  std::size_t size() const { return layers_.size(); }
  const std::string& layer(std::size_t i) const { return layers_[i]; }
  double omega(std::size_t i, int bits) const;
  const std::map<int, double>& row(std::size_t i) const { return rows_[i]; }

 private:
  std::vector<std::string> layers_;
  std::vector<std::map<int, double>> rows_;
};

}  // namespace tinymm

#endif  // TINYMM_QUANTIZER_H_
