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


#ifndef TINYMM_SRC_INTERNAL_RNG_H_
#define TINYMM_SRC_INTERNAL_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

#include "tinymm/tensor.h"

namespace tinymm::internal {

// mt19937 reduced to 24-bit uniforms so streams match across standard
// libraries (std::uniform_real_distribution is implementation-defined).
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    gen_.seed(seq);
  }

  double operator()(double lo, double hi) {
    const double u = static_cast<double>(gen_() >> 8) * 0x1p-24;
    return lo + (hi - lo) * u;
  }

  Tensor Fill(Shape shape, double lo, double hi) {
    std::vector<float> v(NumElements(shape));
    for (float& x : v) x = static_cast<float>((*this)(lo, hi));
    return Tensor(std::move(shape), std::move(v));
  }

 private:
  std::mt19937 gen_;
};

}  // namespace tinymm::internal

#endif  // TINYMM_SRC_INTERNAL_RNG_H_
