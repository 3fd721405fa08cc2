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

#ifndef TINYMM_WEIGHTS_IO_H_
#define TINYMM_WEIGHTS_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tinymm/tensor.h"

namespace tinymm {

// Weight blob layout (little-endian):
//   "TMMW" | version u32 | record count u32 |
//   per record: name_len u32 | name | dtype u8 | rank u8 | dims u32[rank] |
//               payload | crc32 u32 over everything from name_len to payload.
// kInt4 packs two values per byte, low nibble first (two's complement).
enum class DType : std::uint8_t { kF32 = 0, kI8 = 1, kI4 = 2, kI32 = 3, kF64 = 4 };

inline constexpr std::uint32_t kWeightBlobVersion = 1;

std::string_view DTypeName(DType dtype);

struct WeightRecord {
  std::string name;
  DType dtype = DType::kF32;
  Shape shape;
  // kF32: float, kI8/kI4: int8_t, kI32: int32_t, kF64: double.
  std::variant<std::vector<float>, std::vector<std::int8_t>, std::vector<std::int32_t>,
               std::vector<double>>
      data;

  static WeightRecord F32(std::string name, const Tensor& t);
  static WeightRecord Quantized(std::string name, const QuantTensor& q);  // kI8 or kI4
  static WeightRecord I32(std::string name, std::vector<std::int32_t> values);
  static WeightRecord F64(std::string name, std::vector<double> values);

  // Serialized payload size in bytes.
  std::size_t PayloadBytes() const;
  Tensor AsTensor() const;  // kF32 only
  const std::vector<std::int8_t>& AsInts() const;
  const std::vector<std::int32_t>& AsI32() const;
  const std::vector<double>& AsF64() const;
};

class WeightStore {
 public:
  // Throws InvalidArgument on a duplicate name.
  void Add(WeightRecord record);
  const WeightRecord* Find(std::string_view name) const;
  const std::vector<WeightRecord>& records() const { return records_; }

  std::string Serialize() const;
  // Throws ParseError, ChecksumMismatch.
  static WeightStore Deserialize(std::string_view bytes);

  void Save(const std::filesystem::path& path) const;
  static WeightStore Load(const std::filesystem::path& path);

 private:
  std::vector<WeightRecord> records_;
};

}  // namespace tinymm

#endif  // TINYMM_WEIGHTS_IO_H_
