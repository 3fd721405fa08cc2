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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "tinymm/error.h"
#include "tinymm/kernels.h"

namespace tinymm {

namespace {

void Expect(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

void ExpectSameBits(const QuantTensor& input, const QuantTensor& weights,
                    const QuantParams& out) {
  if (input.params().bits != weights.params().bits || out.bits != input.params().bits) {
    throw Error(ErrorCode::kPrecisionMismatch,
                "input/weights/output bits differ: " + std::to_string(input.params().bits) +
                    "/" + std::to_string(weights.params().bits) + "/" +
                    std::to_string(out.bits));
  }
  if (weights.params().zero_point != 0) {
    throw Error(ErrorCode::kInvalidArgument, "weights must be symmetric (zero_point 0)");
  }
}

std::int64_t MaxAbsBias(std::span<const std::int32_t> bias) {
  std::int64_t m = 0;
  for (std::int32_t b : bias) m = std::max<std::int64_t>(m, std::llabs(b));
  return m;
}

}  // namespace

void CheckAccumulatorFits(std::int64_t taps, int bits, std::int64_t max_abs_bias) {
  // |q_in - zp_in| <= 2^bits - 1 and |q_w| <= 2^(bits-1).
  const std::int64_t per_tap = ((std::int64_t{1} << bits) - 1) * (std::int64_t{1} << (bits - 1));
  const std::int64_t bound = taps * per_tap + max_abs_bias;
  if (taps < 0 || bound > std::numeric_limits<std::int32_t>::max()) {
    throw Error(ErrorCode::kAccumulatorOverflow,
                std::to_string(taps) + " taps at " + std::to_string(bits) +
                    " bits can exceed the int32 accumulator");
  }
}

std::int8_t RequantizeValue(std::int32_t acc, double multiplier, const QuantParams& out) {
  const double scaled = std::nearbyint(static_cast<double>(acc) * multiplier);
  const double q = std::clamp(scaled + out.zero_point, static_cast<double>(out.qmin()),
                              static_cast<double>(out.qmax()));
  return static_cast<std::int8_t>(q);
}

QuantTensor Conv2dInt(const QuantTensor& input, const QuantTensor& weights,
                      std::span<const std::int32_t> bias, const QuantParams& out_params,
                      const ConvSpec& spec) {
  ValidateConvSpec(spec);
  ValidateQuantParams(out_params);
  ExpectSameBits(input, weights, out_params);
  const int k = spec.kernel_size;
  const int m_ch = spec.in_channels;
  const int n_ch = spec.out_channels;
  Expect(input.rank() == 3 && input.dim(2) == m_ch, "conv input must be (H, W, M)");
  Expect(weights.shape() == Shape{k, k, m_ch, n_ch}, "conv weights must be (D_k, D_k, M, N)");
  Expect(bias.size() == static_cast<std::size_t>(n_ch), "conv bias must have N entries");
  CheckAccumulatorFits(std::int64_t{k} * k * m_ch, input.params().bits, MaxAbsBias(bias));

  const int h = input.dim(0), w = input.dim(1);
  const int oh = ConvOutputDim(h, k, spec.stride, spec.padding);
  const int ow = ConvOutputDim(w, k, spec.stride, spec.padding);
  const int ph = PadBefore(h, k, spec.stride, spec.padding);
  const int pw = PadBefore(w, k, spec.stride, spec.padding);
  const int zp_in = input.params().zero_point;
  const double multiplier =
      input.params().scale * weights.params().scale / out_params.scale;
  const auto x = input.qdata();
  const auto wt = weights.qdata();

  std::vector<std::int8_t> out(static_cast<std::size_t>(oh) * ow * n_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int n = 0; n < n_ch; ++n) {
        std::int32_t acc = 0;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * spec.stride + ky - ph;
          if (iy < 0 || iy >= h) continue;  // padded taps hold zp_in, contributing 0
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * spec.stride + kx - pw;
            if (ix < 0 || ix >= w) continue;
            const std::size_t in_base = (static_cast<std::size_t>(iy) * w + ix) * m_ch;
            const std::size_t w_base = (static_cast<std::size_t>(ky) * k + kx) * m_ch;
            for (int m = 0; m < m_ch; ++m) {
              acc += (x[in_base + m] - zp_in) * std::int32_t{wt[(w_base + m) * n_ch + n]};
            }
          }
        }
        acc += bias[static_cast<std::size_t>(n)];
        out[(static_cast<std::size_t>(oy) * ow + ox) * n_ch + n] =
            RequantizeValue(acc, multiplier, out_params);
      }
    }
  }
  return QuantTensor({oh, ow, n_ch}, std::move(out), out_params);
}

QuantTensor DepthwiseSeparableConv2dInt(const QuantTensor& input, const QuantTensor& dw_weights,
                                        const QuantTensor& pw_weights,
                                        std::span<const std::int32_t> bias,
                                        const QuantParams& mid_params,
                                        const QuantParams& out_params, const ConvSpec& spec) {
  ValidateConvSpec(spec);
  ValidateQuantParams(mid_params);
  ValidateQuantParams(out_params);
  ExpectSameBits(input, dw_weights, mid_params);
  ExpectSameBits(input, pw_weights, out_params);
  const int k = spec.kernel_size;
  const int m_ch = spec.in_channels;
  const int n_ch = spec.out_channels;
  Expect(input.rank() == 3 && input.dim(2) == m_ch, "ds-conv input must be (H, W, M)");
  Expect(dw_weights.shape() == Shape{k, k, m_ch}, "depthwise weights must be (D_k, D_k, M)");
  Expect(pw_weights.shape() == Shape{1, 1, m_ch, n_ch}, "pointwise weights must be (1, 1, M, N)");
  Expect(bias.size() == static_cast<std::size_t>(n_ch), "ds-conv bias must have N entries");
  const int bits = input.params().bits;
  CheckAccumulatorFits(std::int64_t{k} * k, bits, 0);
  CheckAccumulatorFits(m_ch, bits, MaxAbsBias(bias));

  const int h = input.dim(0), w = input.dim(1);
  const int oh = ConvOutputDim(h, k, spec.stride, spec.padding);
  const int ow = ConvOutputDim(w, k, spec.stride, spec.padding);
  const int ph = PadBefore(h, k, spec.stride, spec.padding);
  const int pw = PadBefore(w, k, spec.stride, spec.padding);
  const int zp_in = input.params().zero_point;
  const double dw_multiplier = input.params().scale * dw_weights.params().scale / mid_params.scale;
  const auto x = input.qdata();
  const auto dw = dw_weights.qdata();

  const std::size_t pixels = static_cast<std::size_t>(oh) * ow;
  std::vector<std::int8_t> mid(pixels * m_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int m = 0; m < m_ch; ++m) {
        std::int32_t acc = 0;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * spec.stride + ky - ph;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * spec.stride + kx - pw;
            if (ix < 0 || ix >= w) continue;
            acc += (x[(static_cast<std::size_t>(iy) * w + ix) * m_ch + m] - zp_in) *
                   std::int32_t{dw[(static_cast<std::size_t>(ky) * k + kx) * m_ch + m]};
          }
        }
        mid[(static_cast<std::size_t>(oy) * ow + ox) * m_ch + m] =
            RequantizeValue(acc, dw_multiplier, mid_params);
      }
    }
  }

  const int zp_mid = mid_params.zero_point;
  const double pw_multiplier = mid_params.scale * pw_weights.params().scale / out_params.scale;
  const auto pwt = pw_weights.qdata();
  std::vector<std::int8_t> out(pixels * n_ch);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (int n = 0; n < n_ch; ++n) {
      std::int32_t acc = 0;
      for (int m = 0; m < m_ch; ++m) {
        acc += (mid[p * m_ch + m] - zp_mid) *
               std::int32_t{pwt[static_cast<std::size_t>(m) * n_ch + n]};
      }
      acc += bias[static_cast<std::size_t>(n)];
      out[p * n_ch + n] = RequantizeValue(acc, pw_multiplier, out_params);
    }
  }
  return QuantTensor({oh, ow, n_ch}, std::move(out), out_params);
}

QuantTensor DenseInt(const QuantTensor& input, const QuantTensor& weights,
                     std::span<const std::int32_t> bias, const QuantParams& out_params) {
  ValidateQuantParams(out_params);
  ExpectSameBits(input, weights, out_params);
  Expect(input.rank() == 1, "dense input must be rank-1");
  const int k_in = input.dim(0);
  Expect(weights.rank() == 2 && weights.dim(0) == k_in, "dense weights must be (K, L)");
  const int l_out = weights.dim(1);
  Expect(bias.size() == static_cast<std::size_t>(l_out), "dense bias must have L entries");
  CheckAccumulatorFits(k_in, input.params().bits, MaxAbsBias(bias));

  const int zp_in = input.params().zero_point;
  const double multiplier = input.params().scale * weights.params().scale / out_params.scale;
  const auto x = input.qdata();
  const auto wt = weights.qdata();
  std::vector<std::int8_t> out(static_cast<std::size_t>(l_out));
  for (int j = 0; j < l_out; ++j) {
    std::int32_t acc = 0;
    for (int i = 0; i < k_in; ++i) {
      acc += (x[static_cast<std::size_t>(i)] - zp_in) *
             std::int32_t{wt[static_cast<std::size_t>(i) * l_out + j]};
    }
    acc += bias[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(j)] = RequantizeValue(acc, multiplier, out_params);
  }
  return QuantTensor({l_out}, std::move(out), out_params);
}

QuantTensor MaxPool2dInt(const QuantTensor& input, const PoolSpec& spec) {
  if (spec.pool_size < 1) throw Error(ErrorCode::kInvalidArgument, "pool size must be >= 1");
  Expect(input.rank() == 3, "maxpool input must be (H, W, C)");
  const int p = spec.pool_size;
  const int h = input.dim(0), w = input.dim(1), c = input.dim(2);
  if (h < p || w < p) {
    throw Error(ErrorCode::kInputTooSmall,
                ShapeToString(input.shape()) + " smaller than pool " + std::to_string(p));
  }
  const int oh = h / p, ow = w / p;
  const auto x = input.qdata();
  std::vector<std::int8_t> out(static_cast<std::size_t>(oh) * ow * c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        std::int8_t best = std::numeric_limits<std::int8_t>::min();
        for (int dy = 0; dy < p; ++dy) {
          for (int dx = 0; dx < p; ++dx) {
            best = std::max(
                best, x[(static_cast<std::size_t>(oy * p + dy) * w + (ox * p + dx)) * c + ch]);
          }
        }
        out[(static_cast<std::size_t>(oy) * ow + ox) * c + ch] = best;
      }
    }
  }
  return QuantTensor({oh, ow, c}, std::move(out), input.params());
}

QuantTensor ReluInt(const QuantTensor& input) {
  const auto zp = static_cast<std::int8_t>(input.params().zero_point);
  std::vector<std::int8_t> out(input.qdata().begin(), input.qdata().end());
  for (auto& q : out) q = std::max(q, zp);
  return QuantTensor(input.shape(), std::move(out), input.params());
}

QuantTensor Requantize(const QuantTensor& input, const QuantParams& out_params) {
  ValidateQuantParams(out_params);
  if (input.params() == out_params) return input;
  const double multiplier = input.params().scale / out_params.scale;
  const int zp_in = input.params().zero_point;
  std::vector<std::int8_t> out(input.size());
  const auto x = input.qdata();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = RequantizeValue(x[i] - zp_in, multiplier, out_params);
  }
  return QuantTensor(input.shape(), std::move(out), out_params);
}

}  // namespace tinymm
