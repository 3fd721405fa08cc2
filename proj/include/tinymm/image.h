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

#ifndef TINYMM_IMAGE_H_
#define TINYMM_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tinymm/tensor.h"

namespace tinymm {

// 8-bit interleaved RGB.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Binary PPM (P6, maxval 255). Throws UnsupportedFormat, CorruptFile, IoError.
RgbImage LoadPpm(const std::filesystem::path& path);
void WritePpm(const std::filesystem::path& path, const RgbImage& image);

// Scales to [0, 1] and resizes to (height, width, 3) with half-pixel-centre
// bilinear interpolation.
Tensor PreprocessImage(const RgbImage& image, int height, int width);

}  // namespace tinymm

#endif  // TINYMM_IMAGE_H_
