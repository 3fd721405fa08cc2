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

#include "tinymm/tensor.h"

#include <algorithm>
#include <sstream>

#include "tinymm/error.h"

namespace tinymm {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidShape: return "InvalidShape";
    case ErrorCode::kRankMismatch: return "RankMismatch";
    case ErrorCode::kKernelTooLarge: return "KernelTooLarge";
    case ErrorCode::kInputTooSmall: return "InputTooSmall";
    case ErrorCode::kPrecisionMismatch: return "PrecisionMismatch";
    case ErrorCode::kAccumulatorOverflow: return "AccumulatorOverflow";
    case ErrorCode::kMissingAssignment: return "MissingAssignment";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kSearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::kEmptyTensor: return "EmptyTensor";
    case ErrorCode::kMissingStats: return "MissingStats";
    case ErrorCode::kSampleRateMismatch: return "SampleRateMismatch";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kCorruptFile: return "CorruptFile";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kDanglingWeights: return "DanglingWeights";
    case ErrorCode::kMissingWeights: return "MissingWeights";
    case ErrorCode::kMissingCalibration: return "MissingCalibration";
    case ErrorCode::kEmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::size_t NumElements(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string ShapeToString(const Shape& shape) {
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  return os.str();
}

void ValidateShape(const Shape& shape) {
  if (shape.empty() || shape.size() > 4) {
    throw Error(ErrorCode::kInvalidShape,
                "rank must be in [1, 4], got " + std::to_string(shape.size()));
  }
  for (int d : shape) {
    if (d < 1) {
      throw Error(ErrorCode::kInvalidShape,
                  "non-positive dimension in " + ShapeToString(shape));
    }
  }
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  ValidateShape(shape_);
  if (data_.size() != NumElements(shape_)) {
    throw Error(ErrorCode::kShapeMismatch,
                "shape " + ShapeToString(shape_) + " needs " +
                    std::to_string(NumElements(shape_)) + " values, got " +
                    std::to_string(data_.size()));
  }
}

Tensor Tensor::Zeros(Shape shape) { return Filled(std::move(shape), 0.0f); }

Tensor Tensor::Filled(Shape shape, float value) {
  ValidateShape(shape);
  std::vector<float> data(NumElements(shape), value);
  return Tensor(std::move(shape), std::move(data));
}

float Tensor::at(std::span<const int> index) const {
  return data_[Flatten(shape_, index)];
}

Tensor Tensor::Reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

Tensor CreateTensor(Shape shape, std::span<const float> data) {
  return Tensor(std::move(shape), std::vector<float>(data.begin(), data.end()));
}

std::size_t Flatten(const Shape& shape, std::span<const int> index) {
  if (index.size() != shape.size()) {
    throw Error(ErrorCode::kRankMismatch, "index rank differs from tensor rank");
  }
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (index[a] < 0 || index[a] >= shape[a]) {
      throw Error(ErrorCode::kInvalidArgument, "index out of bounds");
    }
    flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(index[a]);
  }
  return flat;
}

std::vector<int> Unflatten(const Shape& shape, std::size_t flat) {
  std::vector<int> index(shape.size());
  for (std::size_t a = shape.size(); a-- > 0;) {
    index[a] = static_cast<int>(flat % static_cast<std::size_t>(shape[a]));
    flat /= static_cast<std::size_t>(shape[a]);
  }
  return index;
}

Tensor ConcatLastAxis(const Tensor& a, const Tensor& b) {
  const bool a_empty = a.shape().empty();
  const bool b_empty = b.shape().empty();
  if ((!a_empty && a.rank() != 1) || (!b_empty && b.rank() != 1)) {
    throw Error(ErrorCode::kRankMismatch, "concat expects rank-1 feature vectors");
  }
  if (a_empty && b_empty) {
    throw Error(ErrorCode::kInvalidShape, "concat of two empty operands");
  }
  std::vector<float> out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.data().begin(), a.data().end());
  out.insert(out.end(), b.data().begin(), b.data().end());
  const int n = static_cast<int>(out.size());
  return Tensor({n}, std::move(out));
}

void ValidateQuantParams(const QuantParams& params) {
  if (params.bits != 4 && params.bits != 8) {
    throw Error(ErrorCode::kInvalidArgument,
                "bits must be 4 or 8, got " + std::to_string(params.bits));
  }
  if (!(params.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  }
  if (params.zero_point < params.qmin() || params.zero_point > params.qmax()) {
    throw Error(ErrorCode::kInvalidArgument, "zero_point outside representable range");
  }
}

QuantTensor::QuantTensor(Shape shape, std::vector<std::int8_t> qdata, QuantParams params)
    : shape_(std::move(shape)), qdata_(std::move(qdata)), params_(params) {
  ValidateShape(shape_);
  ValidateQuantParams(params_);
  if (qdata_.size() != NumElements(shape_)) {
    throw Error(ErrorCode::kShapeMismatch, "payload length disagrees with shape " +
                                               ShapeToString(shape_));
  }
  const int lo = params_.qmin();
  const int hi = params_.qmax();
  if (std::any_of(qdata_.begin(), qdata_.end(),
                  [&](std::int8_t q) { return q < lo || q > hi; })) {
    throw Error(ErrorCode::kInvalidArgument, "payload value outside " +
                                                 std::to_string(params_.bits) + "-bit range");
  }
}

QuantTensor QuantTensor::Reshaped(Shape shape) const {
  return QuantTensor(std::move(shape), qdata_, params_);
}

}  // namespace tinymm
