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


#include <vector>

#include "doctest.h"
#include "tinymm/error.h"
#include "tinymm/tensor.h"
#include "test_util.h"

namespace tinymm {
namespace {

using testing::CodeOf;

TEST_CASE("tensor construction validates shape and size") {
  const Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(t.at(1, 2) == 5.0f);
  CHECK(t.size() == 6);
  CHECK(CodeOf([] { Tensor({2, 3}, {1, 2}); }) == ErrorCode::kShapeMismatch);
  CHECK(CodeOf([] { Tensor({2, 0}, {}); }) == ErrorCode::kInvalidShape);
  CHECK(CodeOf([] { Tensor({1, 1, 1, 1, 1}, {1}); }) == ErrorCode::kInvalidShape);
}

TEST_CASE("flat index round-trips through unflatten") {
  const Shape s{3, 4, 5, 2};
  for (std::size_t i = 0; i < NumElements(s); ++i) {
    const auto idx = Unflatten(s, i);
    CHECK(Flatten(s, idx) == i);
  }
  const int idx[] = {1, 2, 3};
  CHECK(Flatten({4, 5, 6}, idx) == (1 * 5 + 2) * 6 + 3);
}

TEST_CASE("reshape keeps data and rejects a different element count") {
  const Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  const Tensor r = t.Reshaped({3, 2});
  CHECK(r.at(2, 1) == 5.0f);
  CHECK(CodeOf([&] { (void)t.Reshaped({4}); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("concat joins rank-1 tensors in order") {
  const Tensor a({2}, {1, 2}), b({3}, {3, 4, 5});
  const Tensor c = ConcatLastAxis(a, b);
  CHECK(c.shape() == Shape{5});
  CHECK(c[0] == 1.0f);
  CHECK(c[4] == 5.0f);
  CHECK(ConcatLastAxis(Tensor(), b) == b);
  CHECK(CodeOf([&] { ConcatLastAxis(Tensor({1, 2}, {1, 2}), b); }) == ErrorCode::kRankMismatch);
}

TEST_CASE("quant tensor rejects out-of-range payloads") {
  const QuantParams p4{0.5, 0, 4};
  CHECK(p4.qmin() == -8);
  CHECK(p4.qmax() == 7);
  CHECK_NOTHROW(QuantTensor({2}, {-8, 7}, p4));
  CHECK(CodeOf([&] { QuantTensor({1}, {8}, p4); }) == ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { QuantTensor({1}, {0}, QuantParams{0.0, 0, 8}); }) ==
        ErrorCode::kInvalidArgument);
  CHECK(CodeOf([] { QuantTensor({1}, {0}, QuantParams{1.0, 0, 6}); }) ==
        ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace tinymm
