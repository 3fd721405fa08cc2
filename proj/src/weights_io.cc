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

#include "tinymm/weights_io.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tinymm/error.h"

namespace tinymm {

static_assert(std::endian::native == std::endian::little,
              "weight blob I/O assumes a little-endian host");

std::string_view DTypeName(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "f32";
    case DType::kI8: return "i8";
    case DType::kI4: return "i4-packed";
    case DType::kI32: return "i32";
    case DType::kF64: return "f64";
  }
  return "?";
}

WeightRecord WeightRecord::F32(std::string name, const Tensor& t) {
  return {std::move(name), DType::kF32, t.shape(),
          std::vector<float>(t.data().begin(), t.data().end())};
}

WeightRecord WeightRecord::Quantized(std::string name, const QuantTensor& q) {
  return {std::move(name), q.params().bits == 4 ? DType::kI4 : DType::kI8, q.shape(),
          std::vector<std::int8_t>(q.qdata().begin(), q.qdata().end())};
}

WeightRecord WeightRecord::I32(std::string name, std::vector<std::int32_t> values) {
  const int n = static_cast<int>(values.size());
  return {std::move(name), DType::kI32, {n}, std::move(values)};
}

WeightRecord WeightRecord::F64(std::string name, std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return {std::move(name), DType::kF64, {n}, std::move(values)};
}

std::size_t WeightRecord::PayloadBytes() const {
  const std::size_t n = NumElements(shape);
  switch (dtype) {
    case DType::kF32: return 4 * n;
    case DType::kI8: return n;
    case DType::kI4: return (n + 1) / 2;
    case DType::kI32: return 4 * n;
    case DType::kF64: return 8 * n;
  }
  return 0;
}

Tensor WeightRecord::AsTensor() const {
  if (dtype != DType::kF32) {
    throw Error(ErrorCode::kParseError, "record '" + name + "' is not f32");
  }
  return Tensor(shape, std::get<std::vector<float>>(data));
}

const std::vector<std::int8_t>& WeightRecord::AsInts() const {
  if (dtype != DType::kI8 && dtype != DType::kI4) {
    throw Error(ErrorCode::kParseError, "record '" + name + "' is not an integer payload");
  }
  return std::get<std::vector<std::int8_t>>(data);
}

const std::vector<std::int32_t>& WeightRecord::AsI32() const {
  if (dtype != DType::kI32) throw Error(ErrorCode::kParseError, "record '" + name + "' is not i32");
  return std::get<std::vector<std::int32_t>>(data);
}

const std::vector<double>& WeightRecord::AsF64() const {
  if (dtype != DType::kF64) throw Error(ErrorCode::kParseError, "record '" + name + "' is not f64");
  return std::get<std::vector<double>>(data);
}

void WeightStore::Add(WeightRecord record) {
  if (Find(record.name)) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate weight record '" + record.name + "'");
  }
  ValidateShape(record.shape);
  records_.push_back(std::move(record));
}

const WeightRecord* WeightStore::Find(std::string_view name) const {
  for (const auto& r : records_) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

template <typename T>
void Put(std::string& out, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
void PutArray(std::string& out, const std::vector<T>& v) {
  out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
}

std::uint32_t Crc32(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    T v;
    std::memcpy(&v, Take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  std::string_view Take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw Error(ErrorCode::kParseError, "weight blob truncated");
    const std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }
  std::string_view Slice(std::size_t from, std::size_t to) const {
    return bytes_.substr(from, to - from);
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string WeightStore::Serialize() const {
  std::string out = "TMMW";
  Put<std::uint32_t>(out, kWeightBlobVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(records_.size()));
  for (const auto& r : records_) {
    std::string rec;
    Put<std::uint32_t>(rec, static_cast<std::uint32_t>(r.name.size()));
    rec += r.name;
    Put<std::uint8_t>(rec, static_cast<std::uint8_t>(r.dtype));
    Put<std::uint8_t>(rec, static_cast<std::uint8_t>(r.shape.size()));
    for (int d : r.shape) Put<std::uint32_t>(rec, static_cast<std::uint32_t>(d));
    switch (r.dtype) {
      case DType::kF32: PutArray(rec, std::get<std::vector<float>>(r.data)); break;
      case DType::kI8: PutArray(rec, std::get<std::vector<std::int8_t>>(r.data)); break;
      case DType::kI4: {
        const auto& v = std::get<std::vector<std::int8_t>>(r.data);
        for (std::size_t i = 0; i < v.size(); i += 2) {
          const auto lo = static_cast<std::uint8_t>(v[i] & 0x0f);
          const auto hi = static_cast<std::uint8_t>(i + 1 < v.size() ? (v[i + 1] & 0x0f) : 0);
          rec.push_back(static_cast<char>(lo | (hi << 4)));
        }
        break;
      }
      case DType::kI32: PutArray(rec, std::get<std::vector<std::int32_t>>(r.data)); break;
      case DType::kF64: PutArray(rec, std::get<std::vector<double>>(r.data)); break;
    }
    out += rec;
    Put<std::uint32_t>(out, Crc32(rec));
  }
  return out;
}

WeightStore WeightStore::Deserialize(std::string_view bytes) {
  Reader rd(bytes);
  if (rd.Take(4) != "TMMW") throw Error(ErrorCode::kParseError, "bad weight blob magic");
  const auto version = rd.Get<std::uint32_t>();
  if (version != kWeightBlobVersion) {
    throw Error(ErrorCode::kParseError, "unsupported weight blob version " + std::to_string(version));
  }
  const auto count = rd.Get<std::uint32_t>();
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t start = rd.pos();
    WeightRecord r;
    r.name = std::string(rd.Take(rd.Get<std::uint32_t>()));
    const auto tag = rd.Get<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(DType::kF64)) {
      throw Error(ErrorCode::kParseError, "unknown dtype tag " + std::to_string(tag));
    }
    r.dtype = static_cast<DType>(tag);
    const auto rank = rd.Get<std::uint8_t>();
    if (rank < 1 || rank > 4) throw Error(ErrorCode::kParseError, "record '" + r.name + "' rank");
    for (int a = 0; a < rank; ++a) r.shape.push_back(static_cast<int>(rd.Get<std::uint32_t>()));
    ValidateShape(r.shape);
    const std::size_t n = NumElements(r.shape);
    const std::string_view payload = rd.Take(r.PayloadBytes());
    const std::size_t end = rd.pos();
    if (rd.Get<std::uint32_t>() != Crc32(rd.Slice(start, end))) {
      throw Error(ErrorCode::kChecksumMismatch, "CRC mismatch in record '" + r.name + "'");
    }
    auto copy = [&](auto vec) {
      std::memcpy(vec.data(), payload.data(), payload.size());
      return vec;
    };
    switch (r.dtype) {
      case DType::kF32: r.data = copy(std::vector<float>(n)); break;
      case DType::kI8: r.data = copy(std::vector<std::int8_t>(n)); break;
      case DType::kI4: {
        std::vector<std::int8_t> v(n);
        for (std::size_t k = 0; k < n; ++k) {
          const auto byte = static_cast<std::uint8_t>(payload[k / 2]);
          const int nib = (k % 2 == 0) ? (byte & 0x0f) : (byte >> 4);
          v[k] = static_cast<std::int8_t>(nib >= 8 ? nib - 16 : nib);
        }
        r.data = std::move(v);
        break;
      }
      case DType::kI32: r.data = copy(std::vector<std::int32_t>(n)); break;
      case DType::kF64: r.data = copy(std::vector<double>(n)); break;
    }
    store.Add(std::move(r));
  }
  if (!rd.done()) throw Error(ErrorCode::kParseError, "trailing bytes after last weight record");
  return store;
}

void WeightStore::Save(const std::filesystem::path& path) const {
  const std::string bytes = Serialize();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

WeightStore WeightStore::Load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return Deserialize(bytes);
}

}  // namespace tinymm
