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
#include <limits>
#include <string>

#include "tinymm/error.h"
#include "tinymm/kernels.h"

namespace tinymm {

namespace {

void Expect(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kShapeMismatch, what);
}

void ExpectFeatureMap(const Tensor& input, int channels) {
  Expect(input.rank() == 3, "expected (H, W, C) input, got " + ShapeToString(input.shape()));
  Expect(input.dim(2) == channels, "input has " + std::to_string(input.dim(2)) +
                                       " channels, spec says " + std::to_string(channels));
}

}  // namespace

void ValidateConvSpec(const ConvSpec& spec) {
  if (spec.in_channels < 1 || spec.out_channels < 1) {
    throw Error(ErrorCode::kInvalidArgument, "channel counts must be positive");
  }
  if (spec.kernel_size < 1 || spec.kernel_size % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "kernel size must be odd and >= 1");
  }
  if (spec.stride < 1) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
}

int ConvOutputDim(int input_dim, int kernel_size, int stride, Padding padding) {
  if (input_dim < 1 || kernel_size < 1 || stride < 1) {
    throw Error(ErrorCode::kInvalidArgument, "conv dims must be positive");
  }
  if (padding == Padding::kSame) return (input_dim + stride - 1) / stride;
  if (input_dim < kernel_size) {
    throw Error(ErrorCode::kKernelTooLarge, "input " + std::to_string(input_dim) +
                                                " smaller than kernel " +
                                                std::to_string(kernel_size));
  }
  return (input_dim - kernel_size) / stride + 1;
}

int PadBefore(int input_dim, int kernel_size, int stride, Padding padding) {
  if (padding == Padding::kValid) return 0;
  const int out = ConvOutputDim(input_dim, kernel_size, stride, padding);
  const int total = std::max((out - 1) * stride + kernel_size - input_dim, 0);
  return total / 2;
}

Tensor Conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
  ValidateConvSpec(spec);
  const int k = spec.kernel_size;
  const int m_ch = spec.in_channels;
  const int n_ch = spec.out_channels;
  ExpectFeatureMap(input, m_ch);
  Expect(weights.shape() == Shape{k, k, m_ch, n_ch},
         "conv weights must be " + ShapeToString({k, k, m_ch, n_ch}));
  Expect(bias.shape() == Shape{n_ch}, "conv bias must have out_channels entries");

  const int h = input.dim(0), w = input.dim(1);
  const int oh = ConvOutputDim(h, k, spec.stride, spec.padding);
  const int ow = ConvOutputDim(w, k, spec.stride, spec.padding);
  const int ph = PadBefore(h, k, spec.stride, spec.padding);
  const int pw = PadBefore(w, k, spec.stride, spec.padding);
  const auto x = input.data();
  const auto wt = weights.data();

  std::vector<float> out(static_cast<std::size_t>(oh) * ow * n_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int n = 0; n < n_ch; ++n) {
        double acc = 0.0;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * spec.stride + ky - ph;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * spec.stride + kx - pw;
            if (ix < 0 || ix >= w) continue;
            const std::size_t in_base = (static_cast<std::size_t>(iy) * w + ix) * m_ch;
            const std::size_t w_base = (static_cast<std::size_t>(ky) * k + kx) * m_ch;
            for (int m = 0; m < m_ch; ++m) {
              acc += static_cast<double>(x[in_base + m]) * wt[(w_base + m) * n_ch + n];
            }
          }
        }
        out[(static_cast<std::size_t>(oy) * ow + ox) * n_ch + n] =
            static_cast<float>(acc + bias[static_cast<std::size_t>(n)]);
      }
    }
  }
  return Tensor({oh, ow, n_ch}, std::move(out));
}

Tensor DepthwiseConv2d(const Tensor& input, const Tensor& dw_weights, const ConvSpec& spec) {
  ValidateConvSpec(spec);
  const int k = spec.kernel_size;
  const int m_ch = spec.in_channels;
  ExpectFeatureMap(input, m_ch);
  Expect(dw_weights.shape() == Shape{k, k, m_ch},
         "depthwise weights must be " + ShapeToString({k, k, m_ch}));

  const int h = input.dim(0), w = input.dim(1);
  const int oh = ConvOutputDim(h, k, spec.stride, spec.padding);
  const int ow = ConvOutputDim(w, k, spec.stride, spec.padding);
  const int ph = PadBefore(h, k, spec.stride, spec.padding);
  const int pw = PadBefore(w, k, spec.stride, spec.padding);
  const auto x = input.data();
  const auto wt = dw_weights.data();

  std::vector<float> out(static_cast<std::size_t>(oh) * ow * m_ch);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int m = 0; m < m_ch; ++m) {
        double acc = 0.0;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy * spec.stride + ky - ph;
          if (iy < 0 || iy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox * spec.stride + kx - pw;
            if (ix < 0 || ix >= w) continue;
            acc += static_cast<double>(x[(static_cast<std::size_t>(iy) * w + ix) * m_ch + m]) *
                   wt[(static_cast<std::size_t>(ky) * k + kx) * m_ch + m];
          }
        }
        out[(static_cast<std::size_t>(oy) * ow + ox) * m_ch + m] = static_cast<float>(acc);
      }
    }
  }
  return Tensor({oh, ow, m_ch}, std::move(out));
}

Tensor PointwiseConv2d(const Tensor& input, const Tensor& pw_weights, const Tensor& bias) {
  Expect(input.rank() == 3, "pointwise input must be (H, W, C)");
  const int m_ch = input.dim(2);
  Expect(pw_weights.rank() == 4 && pw_weights.dim(0) == 1 && pw_weights.dim(1) == 1 &&
             pw_weights.dim(2) == m_ch,
         "pointwise weights must be (1, 1, M, N)");
  const int n_ch = pw_weights.dim(3);
  Expect(bias.shape() == Shape{n_ch}, "pointwise bias must have N entries");

  const std::size_t pixels = static_cast<std::size_t>(input.dim(0)) * input.dim(1);
  const auto x = input.data();
  const auto wt = pw_weights.data();
  std::vector<float> out(pixels * n_ch);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (int n = 0; n < n_ch; ++n) {
      double acc = 0.0;
      for (int m = 0; m < m_ch; ++m) {
        acc += static_cast<double>(x[p * m_ch + m]) * wt[static_cast<std::size_t>(m) * n_ch + n];
      }
      out[p * n_ch + n] = static_cast<float>(acc + bias[static_cast<std::size_t>(n)]);
    }
  }
  return Tensor({input.dim(0), input.dim(1), n_ch}, std::move(out));
}

Tensor DepthwiseSeparableConv2d(const Tensor& input, const Tensor& dw_weights,
                                const Tensor& pw_weights, const Tensor& bias,
                                const ConvSpec& spec) {
  Expect(pw_weights.shape() == Shape{1, 1, spec.in_channels, spec.out_channels},
         "pointwise weights must be " +
             ShapeToString({1, 1, spec.in_channels, spec.out_channels}));
  return PointwiseConv2d(DepthwiseConv2d(input, dw_weights, spec), pw_weights, bias);
}

Tensor MaxPool2d(const Tensor& input, const PoolSpec& spec) {
  if (spec.pool_size < 1) throw Error(ErrorCode::kInvalidArgument, "pool size must be >= 1");
  Expect(input.rank() == 3, "maxpool input must be (H, W, C)");
  const int p = spec.pool_size;
  const int h = input.dim(0), w = input.dim(1), c = input.dim(2);
  if (h < p || w < p) {
    throw Error(ErrorCode::kInputTooSmall,
                ShapeToString(input.shape()) + " smaller than pool " + std::to_string(p));
  }
  const int oh = h / p, ow = w / p;
  const auto x = input.data();
  std::vector<float> out(static_cast<std::size_t>(oh) * ow * c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      for (int ch = 0; ch < c; ++ch) {
        float best = -std::numeric_limits<float>::infinity();
        for (int dy = 0; dy < p; ++dy) {
          for (int dx = 0; dx < p; ++dx) {
            const std::size_t i =
                (static_cast<std::size_t>(oy * p + dy) * w + (ox * p + dx)) * c + ch;
            best = std::max(best, x[i]);
          }
        }
        out[(static_cast<std::size_t>(oy) * ow + ox) * c + ch] = best;
      }
    }
  }
  return Tensor({oh, ow, c}, std::move(out));
}

Tensor Dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  Expect(input.rank() == 1, "dense input must be rank-1");
  const int k_in = input.dim(0);
  Expect(weights.rank() == 2 && weights.dim(0) == k_in, "dense weights must be (K, L)");
  const int l_out = weights.dim(1);
  Expect(bias.shape() == Shape{l_out}, "dense bias must have L entries");
  const auto x = input.data();
  const auto wt = weights.data();
  std::vector<float> out(static_cast<std::size_t>(l_out));
  for (int j = 0; j < l_out; ++j) {
    double acc = 0.0;
    for (int i = 0; i < k_in; ++i) {
      acc += static_cast<double>(x[static_cast<std::size_t>(i)]) *
             wt[static_cast<std::size_t>(i) * l_out + j];
    }
    out[static_cast<std::size_t>(j)] = static_cast<float>(acc + bias[static_cast<std::size_t>(j)]);
  }
  return Tensor({l_out}, std::move(out));
}

Tensor Relu(const Tensor& input) {
  std::vector<float> out(input.data().begin(), input.data().end());
  for (float& v : out) v = std::max(v, 0.0f);
  return Tensor(input.shape(), std::move(out));
}

Tensor Softmax(const Tensor& input) {
  if (input.rank() != 1) throw Error(ErrorCode::kRankMismatch, "softmax expects rank-1 logits");
  const auto x = input.data();
  const float mx = *std::max_element(x.begin(), x.end());
  std::vector<double> e(x.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    e[i] = std::exp(static_cast<double>(x[i]) - mx);
    sum += e[i];
  }
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(e[i] / sum);
  return Tensor(input.shape(), std::move(out));
}

}  // namespace tinymm
