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


// Independent reference implementations used as test oracles. They favour
// obviousness over speed: explicit zero-padded copies, at()-style indexing
// and operation counters.

#ifndef TINYMM_TESTS_ORACLES_H_
#define TINYMM_TESTS_ORACLES_H_

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "tinymm/kernels.h"
#include "tinymm/tensor.h"

namespace tinymm::oracle {

// Deterministic source of random test data.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}
  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  int Int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Tensor Fill(Shape shape, double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(NumElements(shape));
    for (float& x : v) x = static_cast<float>(Uniform(lo, hi));
    return Tensor(std::move(shape), std::move(v));
  }
  std::mt19937& gen() { return gen_; }

 private:
  std::mt19937 gen_;
};

// Output size and leading pad written out from first principles: count the
// window placements over the (possibly padded) axis.
inline int OutDim(int d, int k, int s, Padding pad) {
  if (pad == Padding::kSame) return (d + s - 1) / s;
  int placements = 0;
  for (int start = 0; start + k <= d; start += s) ++placements;
  return placements;
}

inline int LeadPad(int d, int k, int s, Padding pad) {
  if (pad == Padding::kValid) return 0;
  const int need = (OutDim(d, k, s, pad) - 1) * s + k;
  return need > d ? (need - d) / 2 : 0;
}

// Zero-padded copy of an (H, W, C) map.
struct Padded {
  int h, w, c, top, left;
  std::vector<double> v;
  double at(int y, int x, int ch) const { return v[(static_cast<std::size_t>(y) * w + x) * c + ch]; }
};

inline Padded Pad(const Tensor& in, int k, int s, Padding pad) {
  const int h = in.dim(0), w = in.dim(1), c = in.dim(2);
  Padded p;
  p.top = LeadPad(h, k, s, pad);
  p.left = LeadPad(w, k, s, pad);
  p.h = std::max(h + 2 * p.top + k, (OutDim(h, k, s, pad) - 1) * s + k);
  p.w = std::max(w + 2 * p.left + k, (OutDim(w, k, s, pad) - 1) * s + k);
  p.c = c;
  p.v.assign(static_cast<std::size_t>(p.h) * p.w * c, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < c; ++ch)
        p.v[(static_cast<std::size_t>(y + p.top) * p.w + x + p.left) * c + ch] = in.at(y, x, ch);
  return p;
}

// Six nested loops. `mults` counts every multiply including padded taps.
inline Tensor Conv(const Tensor& in, const Tensor& wt, const Tensor& bias, const ConvSpec& spec,
                   std::uint64_t* mults = nullptr) {
  const int k = spec.kernel_size, s = spec.stride, n_ch = spec.out_channels;
  const Padded p = Pad(in, k, s, spec.padding);
  const int oh = OutDim(in.dim(0), k, s, spec.padding);
  const int ow = OutDim(in.dim(1), k, s, spec.padding);
  std::vector<float> out;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int n = 0; n < n_ch; ++n) {
        double acc = 0.0;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            for (int m = 0; m < spec.in_channels; ++m) {
              const int idx[4] = {ky, kx, m, n};
              acc += p.at(oy * s + ky, ox * s + kx, m) * wt.at(idx);
              if (mults) ++*mults;
            }
        out.push_back(static_cast<float>(acc + bias[static_cast<std::size_t>(n)]));
      }
  return Tensor({oh, ow, n_ch}, std::move(out));
}

inline Tensor Depthwise(const Tensor& in, const Tensor& dw, const ConvSpec& spec,
                        std::uint64_t* mults = nullptr) {
  const int k = spec.kernel_size, s = spec.stride, m_ch = spec.in_channels;
  const Padded p = Pad(in, k, s, spec.padding);
  const int oh = OutDim(in.dim(0), k, s, spec.padding);
  const int ow = OutDim(in.dim(1), k, s, spec.padding);
  std::vector<float> out;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int m = 0; m < m_ch; ++m) {
        double acc = 0.0;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            acc += p.at(oy * s + ky, ox * s + kx, m) * dw.at(ky, kx, m);
            if (mults) ++*mults;
          }
        out.push_back(static_cast<float>(acc));
      }
  return Tensor({oh, ow, m_ch}, std::move(out));
}

// Per-pixel channel matmul.
inline Tensor Pointwise(const Tensor& in, const Tensor& pw, const Tensor& bias,
                        std::uint64_t* mults = nullptr) {
  const int m_ch = in.dim(2), n_ch = pw.dim(3);
  std::vector<float> out;
  for (int y = 0; y < in.dim(0); ++y)
    for (int x = 0; x < in.dim(1); ++x)
      for (int n = 0; n < n_ch; ++n) {
        double acc = 0.0;
        for (int m = 0; m < m_ch; ++m) {
          const int idx[4] = {0, 0, m, n};
          acc += static_cast<double>(in.at(y, x, m)) * pw.at(idx);
          if (mults) ++*mults;
        }
        out.push_back(static_cast<float>(acc + bias[static_cast<std::size_t>(n)]));
      }
  return Tensor({in.dim(0), in.dim(1), n_ch}, std::move(out));
}

inline Tensor MatVec(const Tensor& x, const Tensor& w, const Tensor& bias, std::uint64_t* mults = nullptr) {
  std::vector<float> out;
  for (int j = 0; j < w.dim(1); ++j) {
    double acc = 0.0;
    for (int i = 0; i < w.dim(0); ++i) {
      acc += static_cast<double>(x[static_cast<std::size_t>(i)]) * w.at(i, j);
      if (mults) ++*mults;
    }
    out.push_back(static_cast<float>(acc + bias[static_cast<std::size_t>(j)]));
  }
  return Tensor({w.dim(1)}, std::move(out));
}

// --- Real-number simulation of quantized layers -----------------------------
// Dequantize every operand, compute the layer in long double, then map the
// result onto the output grid with round-half-even and clamping.

inline long double Real(const QuantTensor& q, std::size_t i) {
  return static_cast<long double>(q.qdata()[i] - q.params().zero_point) * q.params().scale;
}

inline std::int8_t ToGrid(long double y, const QuantParams& out) {
  long double q = std::nearbyintl(y / out.scale) + out.zero_point;
  q = std::clamp<long double>(q, out.qmin(), out.qmax());
  return static_cast<std::int8_t>(q);
}

inline QuantTensor SimConv(const QuantTensor& in, const QuantTensor& wt,
                           const std::vector<std::int32_t>& bias, const QuantParams& out,
                           const ConvSpec& spec) {
  const int k = spec.kernel_size, s = spec.stride;
  const int h = in.dim(0), w = in.dim(1), m_ch = in.dim(2), n_ch = spec.out_channels;
  const int oh = OutDim(h, k, s, spec.padding), ow = OutDim(w, k, s, spec.padding);
  const int ph = LeadPad(h, k, s, spec.padding), pw = LeadPad(w, k, s, spec.padding);
  const long double bias_scale = static_cast<long double>(in.params().scale) * wt.params().scale;
  std::vector<std::int8_t> q;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int n = 0; n < n_ch; ++n) {
        long double y = bias[static_cast<std::size_t>(n)] * bias_scale;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx)
            for (int m = 0; m < m_ch; ++m) {
              const int iy = oy * s + ky - ph, ix = ox * s + kx - pw;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;  // zero in real terms
              const std::size_t xi = (static_cast<std::size_t>(iy) * w + ix) * m_ch + m;
              const std::size_t wi = ((static_cast<std::size_t>(ky) * k + kx) * m_ch + m) * n_ch + n;
              y += Real(in, xi) * Real(wt, wi);
            }
        q.push_back(ToGrid(y, out));
      }
  return QuantTensor({oh, ow, n_ch}, std::move(q), out);
}

inline QuantTensor SimDsConv(const QuantTensor& in, const QuantTensor& dw, const QuantTensor& pw,
                             const std::vector<std::int32_t>& bias, const QuantParams& mid,
                             const QuantParams& out, const ConvSpec& spec) {
  const int k = spec.kernel_size, s = spec.stride;
  const int h = in.dim(0), w = in.dim(1), m_ch = in.dim(2), n_ch = spec.out_channels;
  const int oh = OutDim(h, k, s, spec.padding), ow = OutDim(w, k, s, spec.padding);
  const int ph = LeadPad(h, k, s, spec.padding), pwd = LeadPad(w, k, s, spec.padding);
  std::vector<std::int8_t> mq;
  for (int oy = 0; oy < oh; ++oy)
    for (int ox = 0; ox < ow; ++ox)
      for (int m = 0; m < m_ch; ++m) {
        long double y = 0;
        for (int ky = 0; ky < k; ++ky)
          for (int kx = 0; kx < k; ++kx) {
            const int iy = oy * s + ky - ph, ix = ox * s + kx - pwd;
            if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
            y += Real(in, (static_cast<std::size_t>(iy) * w + ix) * m_ch + m) *
                 Real(dw, (static_cast<std::size_t>(ky) * k + kx) * m_ch + m);
          }
        mq.push_back(ToGrid(y, mid));
      }
  const QuantTensor mt({oh, ow, m_ch}, mq, mid);
  const long double bias_scale = static_cast<long double>(mid.scale) * pw.params().scale;
  std::vector<std::int8_t> q;
  for (std::size_t p = 0; p < static_cast<std::size_t>(oh) * ow; ++p)
    for (int n = 0; n < n_ch; ++n) {
      long double y = bias[static_cast<std::size_t>(n)] * bias_scale;
      for (int m = 0; m < m_ch; ++m) {
        y += Real(mt, p * m_ch + m) * Real(pw, static_cast<std::size_t>(m) * n_ch + n);
      }
      q.push_back(ToGrid(y, out));
    }
  return QuantTensor({oh, ow, n_ch}, std::move(q), out);
}

inline QuantTensor SimDense(const QuantTensor& in, const QuantTensor& wt,
                            const std::vector<std::int32_t>& bias, const QuantParams& out) {
  const int k_in = wt.dim(0), l_out = wt.dim(1);
  const long double bias_scale = static_cast<long double>(in.params().scale) * wt.params().scale;
  std::vector<std::int8_t> q;
  for (int j = 0; j < l_out; ++j) {
    long double y = bias[static_cast<std::size_t>(j)] * bias_scale;
    for (int i = 0; i < k_in; ++i) {
      y += Real(in, static_cast<std::size_t>(i)) * Real(wt, static_cast<std::size_t>(i) * l_out + j);
    }
    q.push_back(ToGrid(y, out));
  }
  return QuantTensor({l_out}, std::move(q), out);
}

// |DFT| by direct summation, bins 0..N/2.
inline std::vector<double> DftMagnitude(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t % n) /
                                        static_cast<double>(n));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

}  // namespace tinymm::oracle

#endif  // TINYMM_TESTS_ORACLES_H_
