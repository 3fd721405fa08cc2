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

#ifndef TINYMM_ERROR_H_
#define TINYMM_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tinymm {

enum class ErrorCode {
  kInvalidArgument,
  // tensor
  kShapeMismatch,
  kInvalidShape,
  kRankMismatch,
  // kernels
  kKernelTooLarge,
  kInputTooSmall,
  kPrecisionMismatch,
  kAccumulatorOverflow,
  // cost model / allocator
  kMissingAssignment,
  kInfeasible,
  kSearchSpaceTooLarge,
  // quantizer
  kEmptyTensor,
  kMissingStats,
  // audio / image
  kSampleRateMismatch,
  kClipTooShort,
  kUnsupportedFormat,
  kCorruptFile,
  kInvalidConfig,
  // model
  kParseError,
  kChecksumMismatch,
  kDanglingWeights,
  kMissingWeights,
  kMissingCalibration,
  kEmptyCalibrationSet,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library is an Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tinymm

#endif  // TINYMM_ERROR_H_
