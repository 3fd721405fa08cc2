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

#include "tinymm/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "tinymm/error.h"

namespace tinymm {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string NextToken(const std::vector<unsigned char>& buf, std::size_t& pos) {
  while (pos < buf.size()) {
    if (buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
    } else if (std::isspace(buf[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string tok;
  while (pos < buf.size() && !std::isspace(buf[pos])) tok.push_back(static_cast<char>(buf[pos++]));
  return tok;
}

int ParsePositive(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size() && v > 0) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kCorruptFile, "bad PPM header field '" + tok + "'" + where);
}

}  // namespace

RgbImage LoadPpm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  std::size_t pos = 0;
  const std::string magic = NextToken(buf, pos);
  if (magic != "P6") {
    throw Error(ErrorCode::kUnsupportedFormat, "only binary PPM (P6) is supported" + where);
  }
  RgbImage img;
  img.width = ParsePositive(NextToken(buf, pos), where);
  img.height = ParsePositive(NextToken(buf, pos), where);
  if (ParsePositive(NextToken(buf, pos), where) != 255) {
    throw Error(ErrorCode::kUnsupportedFormat, "only maxval 255 is supported" + where);
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * 3;
  if (pos + n > buf.size()) throw Error(ErrorCode::kCorruptFile, "truncated raster" + where);
  img.pixels.assign(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                    buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

void WritePpm(const std::filesystem::path& path, const RgbImage& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorCode::kShapeMismatch, "pixel buffer disagrees with image size");
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f << "P6\n" << image.width << " " << image.height << "\n255\n";
  f.write(reinterpret_cast<const char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
}

Tensor PreprocessImage(const RgbImage& image, int height, int width) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw Error(ErrorCode::kShapeMismatch, "malformed image buffer");
  }
  if (height < 1 || width < 1) throw Error(ErrorCode::kInvalidShape, "target size must be positive");
  const double sy = static_cast<double>(image.height) / height;
  const double sx = static_cast<double>(image.width) / width;
  auto px = [&](int y, int x, int c) {
    return image.pixels[(static_cast<std::size_t>(y) * image.width + x) * 3 + c] / 255.0;
  };
  std::vector<float> out(static_cast<std::size_t>(height) * width * 3);
  for (int oy = 0; oy < height; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, image.height - 1.0);
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int ox = 0; ox < width; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, image.width - 1.0);
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = px(y0, x0, c) * (1 - wx) + px(y0, x1, c) * wx;
        const double bottom = px(y1, x0, c) * (1 - wx) + px(y1, x1, c) * wx;
        out[(static_cast<std::size_t>(oy) * width + ox) * 3 + c] =
            static_cast<float>(top * (1 - wy) + bottom * wy);
      }
    }
  }
  return Tensor({height, width, 3}, std::move(out));
}

}  // namespace tinymm
