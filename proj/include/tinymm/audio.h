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

#ifndef TINYMM_AUDIO_H_
#define TINYMM_AUDIO_H_

#include <filesystem>
#include <span>
#include <vector>

#include "tinymm/tensor.h"

namespace tinymm {

struct MfccConfig {
  int sample_rate = 22050;
  int frame_length = 2048;
  int hop_length = 512;
  int num_mel_filters = 40;
  int num_coefficients = 13;
  double fmin = 0.0;
  double fmax = 11025.0;
  bool center_padding = true;

  // Throws InvalidConfig.
  void Validate() const;
  // Frames produced for a clip of `num_samples` samples.
  int NumFrames(std::size_t num_samples) const;
  bool operator==(const MfccConfig&) const = default;
};

struct AudioClip {
  std::vector<float> samples;
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// HTK mel scale.
double HzToMel(double hz);
double MelToHz(double mel);

// Triangular filters, num_mel_filters x (frame_length / 2 + 1), row-major.
// Throws InvalidConfig if a filter covers no FFT bin.
std::vector<double> MelFilterbank(const MfccConfig& cfg);

// Orthonormal DCT-II, n_out x n_in, row-major.
std::vector<double> DctMatrix(int n_out, int n_in);

// Periodic Hann window.
std::vector<double> HannWindow(int length);

// |rfft(frame)|, frame.size() / 2 + 1 bins.
std::vector<double> MagnitudeSpectrum(std::span<const double> frame);

// Log-mel energies for one already-windowed frame.
std::vector<double> LogMelEnergies(std::span<const double> windowed_frame, const MfccConfig& cfg);

// (frames, num_coefficients). Throws SampleRateMismatch, ClipTooShort.
Tensor Mfcc(const AudioClip& clip, const MfccConfig& cfg);

// PCM16 mono RIFF/WAVE. Throws UnsupportedFormat, CorruptFile, IoError.
AudioClip LoadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const AudioClip& clip);

// Non-overlapping chunks of round(seconds * sample_rate) samples; the
// remainder is dropped.
std::vector<AudioClip> ChunkAudio(const AudioClip& clip, double seconds);

}  // namespace tinymm

#endif  // TINYMM_AUDIO_H_
