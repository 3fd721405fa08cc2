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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tinymm/audio.h"
#include "tinymm/error.h"

namespace tinymm {

namespace {

std::uint32_t ReadU32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kCorruptFile, "missing RIFF/WAVE header" + where);
  }

  bool have_fmt = false;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= buf.size()) {
    const unsigned char* chunk = buf.data() + pos;
    const std::uint32_t size = ReadU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > buf.size()) throw Error(ErrorCode::kCorruptFile, "truncated chunk" + where);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::kCorruptFile, "short fmt chunk" + where);
      const std::uint16_t format = ReadU16(buf.data() + body);
      channels = ReadU16(buf.data() + body + 2);
      sample_rate = ReadU32(buf.data() + body + 4);
      bits = ReadU16(buf.data() + body + 14);
      if (format != 1) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "audio format " + std::to_string(format) + " is not PCM" + where);
      }
      if (channels != 1) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    std::to_string(channels) + " channels, expected mono" + where);
      }
      if (bits != 16) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    std::to_string(bits) + "-bit samples, expected 16-bit" + where);
      }
      if (sample_rate == 0) throw Error(ErrorCode::kCorruptFile, "zero sample rate" + where);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::kCorruptFile, "data chunk before fmt" + where);
      const std::size_t n = size / 2;
      if (n == 0) throw Error(ErrorCode::kCorruptFile, "no samples" + where);
      AudioClip clip;
      clip.sample_rate = static_cast<int>(sample_rate);
      clip.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::int16_t>(ReadU16(buf.data() + body + 2 * i));
        clip.samples[i] = static_cast<float>(v) / 32768.0f;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw Error(ErrorCode::kCorruptFile, "no data chunk" + where);
}

void WriteWav(const std::filesystem::path& path, const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out = "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  PutU32(out, 16);
  PutU16(out, 1);  // PCM
  PutU16(out, 1);  // mono
  PutU32(out, static_cast<std::uint32_t>(clip.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (float s : clip.samples) {
    const long v = std::lround(std::clamp(static_cast<double>(s), -1.0, 1.0) * 32768.0);
    PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(v, -32768L, 32767L))));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace tinymm
