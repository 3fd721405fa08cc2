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

#include "tinymm/quantizer.h"

#include <algorithm>
#include <cmath>

#include "tinymm/error.h"

namespace tinymm {

namespace {

void RequireBits(int bits) {
  if (bits != 4 && bits != 8) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be 4 or 8, got " + std::to_string(bits));
  }
}

}  // namespace

void CalibrationStats::Observe(std::span<const float> values) {
  for (float v : values) {
    if (count == 0) {
      min = max = v;
    } else {
      min = std::min(min, v);
      max = std::max(max, v);
    }
    ++count;
  }
}

void CalibrationStats::Merge(const CalibrationStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  count += other.count;
}

QuantParams SymmetricParams(float max_abs, int bits) {
  RequireBits(bits);
  QuantParams p;
  p.bits = bits;
  p.zero_point = 0;
  p.scale = max_abs > 0.0f ? static_cast<double>(max_abs) / p.qmax() : 1.0;
  return p;
}

QuantParams AffineParams(const CalibrationStats& stats, int bits) {
  RequireBits(bits);
  if (stats.count == 0) throw Error(ErrorCode::kMissingStats, "calibration stats are empty");
  QuantParams p;
  p.bits = bits;
  const double lo = std::min(0.0, static_cast<double>(stats.min));
  const double hi = std::max(0.0, static_cast<double>(stats.max));
  if (hi == lo) {
    p.scale = 1.0;
    p.zero_point = p.qmin();
    return p;
  }
  p.scale = (hi - lo) / ((1 << bits) - 1);
  const double zp = p.qmin() - std::nearbyint(lo / p.scale);
  p.zero_point = static_cast<int>(std::clamp(zp, static_cast<double>(p.qmin()), static_cast<double>(p.qmax())));
  return p;
}

QuantTensor QuantizeWithParams(const Tensor& t, const QuantParams& params) {
  ValidateQuantParams(params);
  const double lo = params.qmin(), hi = params.qmax();
  std::vector<std::int8_t> q(t.size());
  const auto x = t.data();
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double v = std::nearbyint(static_cast<double>(x[i]) / params.scale) + params.zero_point;
    q[i] = static_cast<std::int8_t>(std::clamp(v, lo, hi));
  }
  return QuantTensor(t.shape(), std::move(q), params);
}

QuantTensor QuantizeTensor(const Tensor& t, int bits, QuantMode mode,
                           const std::optional<CalibrationStats>& stats) {
  if (t.size() == 0) throw Error(ErrorCode::kEmptyTensor, "cannot quantize an empty tensor");
  RequireBits(bits);
  if (mode == QuantMode::kSymmetricWeights) {
    float max_abs = 0.0f;
    for (float v : t.data()) max_abs = std::max(max_abs, std::fabs(v));
    return QuantizeWithParams(t, SymmetricParams(max_abs, bits));
  }
  if (!stats) throw Error(ErrorCode::kMissingStats, "affine quantization needs calibration stats");
  return QuantizeWithParams(t, AffineParams(*stats, bits));
}

Tensor Dequantize(const QuantTensor& q) {
  std::vector<float> out(q.size());
  const auto x = q.qdata();
  const auto& p = q.params();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>((x[i] - p.zero_point) * p.scale);
  }
  return Tensor(q.shape(), std::move(out));
}

double QuantizationPerturbation(const Tensor& weights, int bits) {
  if (weights.size() == 0) throw Error(ErrorCode::kEmptyTensor, "sensitivity of empty weights");
  const QuantTensor q = QuantizeTensor(weights, bits, QuantMode::kSymmetricWeights);
  const auto& p = q.params();
  double sum = 0.0;
  const auto w = weights.data();
  const auto qd = q.qdata();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = (qd[i] - p.zero_point) * p.scale - static_cast<double>(w[i]);
    sum += d * d;
  }
  return sum;
}

double LayerSensitivity(const Tensor& weights, int bits, std::optional<double> hessian_trace) {
  if (hessian_trace && *hessian_trace < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "hessian trace must be non-negative");
  }
  const double perturbation = QuantizationPerturbation(weights, bits);
  return hessian_trace ? *hessian_trace * perturbation : perturbation;
}

void SensitivityTable::Add(std::string layer, std::map<int, double> omega_by_bits) {
  if (omega_by_bits.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "layer '" + layer + "' has no sensitivity entries");
  }
  double running = omega_by_bits.begin()->second;
  for (auto& [bits, omega] : omega_by_bits) {
    if (omega < 0.0 || std::isnan(omega)) {
      throw Error(ErrorCode::kInvalidArgument, "sensitivity must be non-negative");
    }
    omega = std::min(omega, running);
    running = omega;
  }
  layers_.push_back(std::move(layer));
  rows_.push_back(std::move(omega_by_bits));
}

double SensitivityTable::omega(std::size_t i, int bits) const {
  const auto it = rows_.at(i).find(bits);
  if (it == rows_[i].end()) {
    throw Error(ErrorCode::kMissingAssignment,
                "no sensitivity for " + layers_[i] + " at " + std::to_string(bits) + " bits");
  }
  return it->second;
}

}  // namespace tinymm
