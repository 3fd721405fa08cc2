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

#ifndef TINYMM_TENSOR_H_
#define TINYMM_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tinymm {

// Dimensions in row-major order. Feature maps are (H, W, C).
using Shape = std::vector<int>;

std::size_t NumElements(const Shape& shape);
std::string ShapeToString(const Shape& shape);

// Throws InvalidShape unless 1 <= rank <= 4 and every dim >= 1.
void ValidateShape(const Shape& shape);

// Dense float32 tensor. Immutable once constructed.
class Tensor {
 public:
  Tensor() = default;
  // Throws InvalidShape / ShapeMismatch.
  Tensor(Shape shape, std::vector<float> data);

  static Tensor Zeros(Shape shape);
  static Tensor Filled(Shape shape, float value);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const { return data_.size(); }
  std::span<const float> data() const { return data_; }

  float operator[](std::size_t flat) const { return data_[flat]; }
  float at(std::span<const int> index) const;
  float at(int i, int j) const { return data_[FlatIndex2(i, j)]; }
  float at(int i, int j, int k) const { return data_[FlatIndex3(i, j, k)]; }

  // Same data, new shape with equal element count.
  Tensor Reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t FlatIndex2(int i, int j) const {
    return static_cast<std::size_t>(i) * shape_[1] + j;
  }
  std::size_t FlatIndex3(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * shape_[1] + j) * shape_[2] + k;
  }

  Shape shape_;
  std::vector<float> data_;
};

Tensor CreateTensor(Shape shape, std::span<const float> data);

// Row-major flat index of `index` within `shape`, and its inverse.
std::size_t Flatten(const Shape& shape, std::span<const int> index);
std::vector<int> Unflatten(const Shape& shape, std::size_t flat);

// Concatenates two rank-1 tensors, a first. Throws RankMismatch otherwise.
// An empty operand is represented by a default-constructed Tensor.
Tensor ConcatLastAxis(const Tensor& a, const Tensor& b);

// Signed integer quantization parameters. real = (q - zero_point) * scale.
struct QuantParams {
  double scale = 1.0;
  int zero_point = 0;
  int bits = 8;

  int qmin() const { return -(1 << (bits - 1)); }
  int qmax() const { return (1 << (bits - 1)) - 1; }

  bool operator==(const QuantParams&) const = default;
};

// Throws InvalidArgument when bits is not 4/8, scale is not positive, or
// zero_point is outside [qmin, qmax].
void ValidateQuantParams(const QuantParams& params);

class QuantTensor {
 public:
  QuantTensor() = default;
  // Throws on invalid shape/params or any payload value out of range.
  QuantTensor(Shape shape, std::vector<std::int8_t> qdata, QuantParams params);

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const { return qdata_.size(); }
  std::span<const std::int8_t> qdata() const { return qdata_; }
  const QuantParams& params() const { return params_; }

  QuantTensor Reshaped(Shape shape) const;

  bool operator==(const QuantTensor&) const = default;

 private:
  Shape shape_;
  std::vector<std::int8_t> qdata_;
  QuantParams params_;
};

}  // namespace tinymm

#endif  // TINYMM_TENSOR_H_
