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

#ifndef TINYMM_KERNELS_H_
#define TINYMM_KERNELS_H_

#include <cstdint>
#include <span>

#include "tinymm/tensor.h"

namespace tinymm {

enum class Padding { kValid, kSame };
enum class ConvKind { kTraditional, kDepthwiseSeparable };

// Square-kernel 2-D convolution. For kDepthwiseSeparable the depthwise stage
// uses kernel_size and the pointwise stage is always 1x1.
struct ConvSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel_size = 3;
  int stride = 1;
  Padding padding = Padding::kValid;
  ConvKind kind = ConvKind::kTraditional;
};

struct DenseSpec {
  int in_features = 1;
  int out_features = 1;
};

// Window and stride are both pool_size; trailing rows/cols are dropped.
struct PoolSpec {
  int pool_size = 2;
};

void ValidateConvSpec(const ConvSpec& spec);

// Output spatial size. kValid: (D_f - D_k) / S + 1 (floor). kSame:
// ceil(D_f / S), which is D_f when S = 1. Throws KernelTooLarge.
int ConvOutputDim(int input_dim, int kernel_size, int stride, Padding padding);

// Zeros added before the first row/col under `padding`.
int PadBefore(int input_dim, int kernel_size, int stride, Padding padding);

// ---- float32 reference kernels. Tensors are (H, W, C). ----

// weights (D_k, D_k, M, N), bias (N).
Tensor Conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);

// Depthwise stage alone: dw_weights (D_k, D_k, M) -> (H', W', M), no bias.
Tensor DepthwiseConv2d(const Tensor& input, const Tensor& dw_weights,
                       const ConvSpec& spec);

// 1x1 channel mixing: pw_weights (1, 1, M, N), bias (N).
Tensor PointwiseConv2d(const Tensor& input, const Tensor& pw_weights,
                       const Tensor& bias);

Tensor DepthwiseSeparableConv2d(const Tensor& input, const Tensor& dw_weights,
                                const Tensor& pw_weights, const Tensor& bias,
                                const ConvSpec& spec);

Tensor MaxPool2d(const Tensor& input, const PoolSpec& spec);

// input (K), weights (K, L), bias (L).
Tensor Dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

Tensor Relu(const Tensor& input);

// Max-subtracted softmax over a rank-1 tensor.
Tensor Softmax(const Tensor& input);

// ---- integer kernels ----
//
// Inputs and weights share a bit width. Accumulation is int32 over
// (q_in - zp_in) * q_w (weights are symmetric, zp_w must be 0), bias is int32
// at scale s_in * s_w, and the accumulator is requantized as
//   q_out = clamp(round_half_even(acc * s_in * s_w / s_out) + zp_out).

// Largest |accumulator| reachable for `taps` products at `bits` plus a bias
// of magnitude `max_abs_bias`; throws AccumulatorOverflow past int32.
void CheckAccumulatorFits(std::int64_t taps, int bits, std::int64_t max_abs_bias);

std::int8_t RequantizeValue(std::int32_t acc, double multiplier, const QuantParams& out);

QuantTensor Conv2dInt(const QuantTensor& input, const QuantTensor& weights,
                      std::span<const std::int32_t> bias, const QuantParams& out_params,
                      const ConvSpec& spec);

// Depthwise stage requantizes to mid_params (same bit width); the pointwise
// stage adds bias at scale s_mid * s_pw.
QuantTensor DepthwiseSeparableConv2dInt(const QuantTensor& input, const QuantTensor& dw_weights,
                                        const QuantTensor& pw_weights,
                                        std::span<const std::int32_t> bias,
                                        const QuantParams& mid_params,
                                        const QuantParams& out_params, const ConvSpec& spec);

QuantTensor DenseInt(const QuantTensor& input, const QuantTensor& weights,
                     std::span<const std::int32_t> bias, const QuantParams& out_params);

QuantTensor MaxPool2dInt(const QuantTensor& input, const PoolSpec& spec);

// Clamps at the zero point (real value 0).
QuantTensor ReluInt(const QuantTensor& input);

// Re-expresses `input` under `out_params`.
QuantTensor Requantize(const QuantTensor& input, const QuantParams& out_params);

}  // namespace tinymm

#endif  // TINYMM_KERNELS_H_
