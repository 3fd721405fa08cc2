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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "tinymm/audio.h"
#include "tinymm/error.h"

namespace tinymm {

namespace {

constexpr double kLogFloor = 1e-10;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& FftwPlannerMutex() {
  static std::mutex mu;
  return mu;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    in_ = fftw_alloc_real(static_cast<std::size_t>(n));
    out_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(FftwPlannerMutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::vector<double> Magnitude(std::span<const double> frame) {
    std::copy(frame.begin(), frame.end(), in_);
    fftw_execute(plan_);
    std::vector<double> mag(static_cast<std::size_t>(n_ / 2 + 1));
    for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::hypot(out_[k][0], out_[k][1]);
    return mag;
  }

 private:
  int n_;
  double* in_ = nullptr;
  fftw_complex* out_ = nullptr;
  fftw_plan plan_ = nullptr;
};

// numpy-style "reflect" (edge sample not repeated), folded for short inputs.
std::size_t ReflectIndex(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

std::vector<double> LogMel(const std::vector<double>& magnitude,
                           const std::vector<double>& filterbank, int num_filters) {
  const std::size_t bins = magnitude.size();
  std::vector<double> out(static_cast<std::size_t>(num_filters));
  for (int f = 0; f < num_filters; ++f) {
    double e = 0.0;
    for (std::size_t k = 0; k < bins; ++k) e += filterbank[f * bins + k] * magnitude[k];
    out[static_cast<std::size_t>(f)] = std::log(std::max(e, kLogFloor));
  }
  return out;
}

}  // namespace

void MfccConfig::Validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (sample_rate <= 0) fail("sample_rate must be positive");
  if (frame_length < 2 || hop_length < 1) fail("frame_length >= 2 and hop_length >= 1 required");
  if (frame_length < hop_length) fail("frame_length must be >= hop_length");
  if (num_mel_filters < 1 || num_coefficients < 1) fail("filter/coefficient counts must be >= 1");
  if (num_coefficients > num_mel_filters) fail("num_coefficients exceeds num_mel_filters");
  if (fmin < 0.0 || fmax <= fmin) fail("need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) fail("fmax exceeds the Nyquist frequency");
}

int MfccConfig::NumFrames(std::size_t num_samples) const {
  if (center_padding) return static_cast<int>(num_samples / hop_length) + 1;
  if (num_samples < static_cast<std::size_t>(frame_length)) return 0;
  return static_cast<int>((num_samples - frame_length) / hop_length) + 1;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> MelFilterbank(const MfccConfig& cfg) {
  cfg.Validate();
  const int bins = cfg.frame_length / 2 + 1;
  const int n = cfg.num_mel_filters;
  const double mel_lo = HzToMel(cfg.fmin);
  const double mel_hi = HzToMel(cfg.fmax);
  std::vector<double> edges(static_cast<std::size_t>(n + 2));
  for (int j = 0; j < n + 2; ++j) {
    edges[static_cast<std::size_t>(j)] = MelToHz(mel_lo + (mel_hi - mel_lo) * j / (n + 1));
  }
  std::vector<double> fb(static_cast<std::size_t>(n) * bins, 0.0);
  for (int f = 0; f < n; ++f) {
    const double lo = edges[f], center = edges[f + 1], hi = edges[f + 2];
    double row_sum = 0.0;
    for (int k = 0; k < bins; ++k) {
      const double hz = static_cast<double>(k) * cfg.sample_rate / cfg.frame_length;
      double w = 0.0;
      if (hz > lo && hz <= center) {
        w = (hz - lo) / (center - lo);
      } else if (hz > center && hz < hi) {
        w = (hi - hz) / (hi - center);
      }
      fb[static_cast<std::size_t>(f) * bins + k] = w;
      row_sum += w;
    }
    if (!(row_sum > 0.0)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "mel filter " + std::to_string(f) + " covers no FFT bin; use fewer filters "
                  "or a longer frame");
    }
  }
  return fb;
}

std::vector<double> DctMatrix(int n_out, int n_in) {
  std::vector<double> d(static_cast<std::size_t>(n_out) * n_in);
  for (int k = 0; k < n_out; ++k) {
    const double norm = k == 0 ? std::sqrt(1.0 / n_in) : std::sqrt(2.0 / n_in);
    for (int n = 0; n < n_in; ++n) {
      d[static_cast<std::size_t>(k) * n_in + n] =
          norm * std::cos(std::numbers::pi * k * (2.0 * n + 1.0) / (2.0 * n_in));
    }
  }
  return d;
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / length);
  }
  return w;
}

std::vector<double> MagnitudeSpectrum(std::span<const double> frame) {
  RealFft fft(static_cast<int>(frame.size()));
  return fft.Magnitude(frame);
}

std::vector<double> LogMelEnergies(std::span<const double> windowed_frame,
                                   const MfccConfig& cfg) {
  if (windowed_frame.size() != static_cast<std::size_t>(cfg.frame_length)) {
    throw Error(ErrorCode::kShapeMismatch, "frame length differs from config");
  }
  return LogMel(MagnitudeSpectrum(windowed_frame), MelFilterbank(cfg), cfg.num_mel_filters);
}

Tensor Mfcc(const AudioClip& clip, const MfccConfig& cfg) {
  cfg.Validate();
  if (clip.sample_rate != cfg.sample_rate) {
    throw Error(ErrorCode::kSampleRateMismatch,
                "clip is " + std::to_string(clip.sample_rate) + " Hz, model expects " +
                    std::to_string(cfg.sample_rate) + " Hz");
  }
  const std::size_t len = clip.samples.size();
  const int frames = len == 0 ? 0 : cfg.NumFrames(len);
  if (frames < 1) {
    throw Error(ErrorCode::kClipTooShort,
                std::to_string(len) + " samples yield no " + std::to_string(cfg.frame_length) +
                    "-sample frame");
  }

  const std::vector<double> window = HannWindow(cfg.frame_length);
  const std::vector<double> fb = MelFilterbank(cfg);
  const std::vector<double> dct = DctMatrix(cfg.num_coefficients, cfg.num_mel_filters);
  const std::ptrdiff_t offset = cfg.center_padding ? -(cfg.frame_length / 2) : 0;

  RealFft fft(cfg.frame_length);
  std::vector<double> frame(static_cast<std::size_t>(cfg.frame_length));
  std::vector<float> out(static_cast<std::size_t>(frames) * cfg.num_coefficients);
  for (int t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = offset + static_cast<std::ptrdiff_t>(t) * cfg.hop_length;
    for (int i = 0; i < cfg.frame_length; ++i) {
      frame[static_cast<std::size_t>(i)] =
          clip.samples[ReflectIndex(start + i, len)] * window[static_cast<std::size_t>(i)];
    }
    const std::vector<double> log_mel = LogMel(fft.Magnitude(frame), fb, cfg.num_mel_filters);
    for (int c = 0; c < cfg.num_coefficients; ++c) {
      double acc = 0.0;
      for (int m = 0; m < cfg.num_mel_filters; ++m) {
        acc += dct[static_cast<std::size_t>(c) * cfg.num_mel_filters + m] *
               log_mel[static_cast<std::size_t>(m)];
      }
      out[static_cast<std::size_t>(t) * cfg.num_coefficients + c] = static_cast<float>(acc);
    }
  }
  return Tensor({frames, cfg.num_coefficients}, std::move(out));
}

std::vector<AudioClip> ChunkAudio(const AudioClip& clip, double seconds) {
  if (!(seconds > 0.0)) throw Error(ErrorCode::kInvalidArgument, "chunk length must be positive");
  const auto chunk = static_cast<std::size_t>(std::llround(seconds * clip.sample_rate));
  if (chunk == 0) throw Error(ErrorCode::kInvalidArgument, "chunk shorter than one sample");
  std::vector<AudioClip> out;
  for (std::size_t start = 0; start + chunk <= clip.samples.size(); start += chunk) {
    AudioClip c;
    c.sample_rate = clip.sample_rate;
    c.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     clip.samples.begin() + static_cast<std::ptrdiff_t>(start + chunk));
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace tinymm
