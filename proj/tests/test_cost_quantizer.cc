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


#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.h"
#include "test_util.h"
#include "tinymm/cost_model.h"
#include "tinymm/quantizer.h"

namespace tinymm {
namespace {

using testing::CodeOf;

TEST_CASE("layer cost formulas") {
  const LayerCost c = TraditionalConvCost(1, 3, 16, 201, 18);
  CHECK(c.params == 144);
  CHECK(c.macs == 520992);
  CHECK(c.biases == 16);
  const LayerCost d = DsConvCost(16, 3, 32, 199, 16);
  CHECK(d.params == 16 * 9 + 16 * 32);
  CHECK(d.macs == 16ull * 199 * 16 * 9 + 16ull * 199 * 16 * 32);
  const LayerCost f = DenseCost(672, 32);
  CHECK(f.params == 21504);
  CHECK(f.macs == 21504);
  CHECK(f.biases == 32);
}

TEST_CASE("ds to traditional MAC ratio is 1/N + 1/Dk^2 exactly") {
  oracle::Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t m = rng.Int(1, 64), k = rng.Int(1, 7), n = rng.Int(1, 64);
    const std::uint64_t h = rng.Int(1, 32), w = rng.Int(1, 32);
    const std::uint64_t ds = DsConvCost(m, k, n, h, w).macs;
    const std::uint64_t tr = TraditionalConvCost(m, k, n, h, w).macs;
    // ds / tr == (k^2 + n) / (n k^2), cross-multiplied.
    CHECK(ds * n * k * k == tr * (k * k + n));
  }
}

TEST_CASE("size and BOPS under an assignment") {
  CostReport r;
  r.layers = {{"a", 100, 1000, 4}, {"b", 10, 50, 2}};
  const BitAssignment mixed{{"a", "b"}, {8, 4}};
  CHECK(ModelSizeBits(r, mixed) == 100 * 8 + 10 * 4);
  CHECK(Bops(r, mixed) == 1000 * 64 + 50 * 16);
  CHECK(r.total_params() == 110);
  CHECK(r.total_macs() == 1050);
  CHECK(r.overhead_bits() == 6 * 32);
  CHECK(CodeOf([&] { ModelSizeBits(r, BitAssignment{{"a"}, {8}}); }) ==
        ErrorCode::kMissingAssignment);
  const std::string table = FormatCostTable(r, mixed);
  CHECK(table.find("total") != std::string::npos);
  CHECK(table.find("840") != std::string::npos);
}

TEST_CASE("uniform assignment helper") {
  const BitAssignment a = BitAssignment::Uniform({"x", "y"}, 4);
  CHECK(a.BitsFor("y") == 4);
  CHECK_FALSE(a.BitsFor("z").has_value());
}

// ---- quantizer -------------------------------------------------------------

TEST_CASE("symmetric 8-bit example") {
  const Tensor t({3}, {-1.0f, 0.5f, 1.0f});
  const QuantTensor q = QuantizeTensor(t, 8, QuantMode::kSymmetricWeights);
  CHECK(q.params().scale == doctest::Approx(1.0 / 127));
  CHECK(q.params().zero_point == 0);
  CHECK(std::vector<int>(q.qdata().begin(), q.qdata().end()) == std::vector<int>{-127, 64, 127});
}

TEST_CASE("all-zero tensor quantizes to zeros with unit scale") {
  const QuantTensor q = QuantizeTensor(Tensor::Zeros({4}), 4, QuantMode::kSymmetricWeights);
  CHECK(q.params().scale == 1.0);
  for (auto v : q.qdata()) CHECK(v == 0);
  CalibrationStats s;
  s.Observe(Tensor::Zeros({3}));
  const QuantParams a = AffineParams(s, 8);
  CHECK(a.scale == 1.0);
  CHECK(QuantizeTensor(Tensor::Zeros({3}), 8, QuantMode::kAffineActivations, s).qdata()[0] ==
        a.zero_point);
}

TEST_CASE("affine params map the range ends to the grid ends and zero exactly") {
  CalibrationStats s;
  s.Observe(Tensor({3}, {0.5f, 2.0f, 6.0f}));
  const QuantParams p = AffineParams(s, 8);
  // Range widened to [0, 6].
  CHECK(p.scale == doctest::Approx(6.0 / 255));
  CHECK(p.zero_point == -128);
  CalibrationStats n;
  n.Observe(Tensor({2}, {-3.0f, 1.0f}));
  const QuantParams q = AffineParams(n, 4);
  const QuantTensor z = QuantizeWithParams(Tensor({1}, {0.0f}), q);
  CHECK(Dequantize(z)[0] == 0.0f);
}

TEST_CASE("quantizer error cases") {
  CHECK(CodeOf([] { QuantizeTensor(Tensor(), 8, QuantMode::kSymmetricWeights); }) ==
        ErrorCode::kEmptyTensor);
  CHECK(CodeOf([] { QuantizeTensor(Tensor::Zeros({2}), 8, QuantMode::kAffineActivations); }) ==
        ErrorCode::kMissingStats);
  CHECK(CodeOf([] { SymmetricParams(1.0f, 3); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("calibration stats merge like a single pass") {
  oracle::Rng rng(32);
  CalibrationStats all, a, b;
  const Tensor x = rng.Fill({50}, -3, 2), y = rng.Fill({20}, -1, 5);
  all.Observe(x);
  all.Observe(y);
  a.Observe(x);
  b.Observe(y);
  a.Merge(b);
  CHECK(a == all);
  CHECK(all.count == 70);
}

// Per-element error inside the representable range of `p`.
void CheckRoundTrip(const Tensor& t, const QuantTensor& q) {
  const QuantParams& p = q.params();
  const double lo = (p.qmin() - p.zero_point) * p.scale;
  const double hi = (p.qmax() - p.zero_point) * p.scale;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double x = t[i];
    if (x < lo || x > hi) continue;
    const double back = (q.qdata()[i] - p.zero_point) * p.scale;
    REQUIRE(std::fabs(back - x) <= p.scale / 2 * (1 + 1e-12));
  }
}

TEST_CASE("round-trip error is at most half a step") {
  oracle::Rng rng(33);
  for (int i = 0; i < 200; ++i) {
    const double lo = rng.Uniform(-5, 1), hi = lo + rng.Uniform(0.01, 6);
    const Tensor t = rng.Fill({rng.Int(1, 300)}, lo, hi);
    CalibrationStats s;
    s.Observe(t);
    for (int bits : {4, 8}) {
      CheckRoundTrip(t, QuantizeTensor(t, bits, QuantMode::kSymmetricWeights));
      CheckRoundTrip(t, QuantizeTensor(t, bits, QuantMode::kAffineActivations, s));
    }
  }
}

TEST_CASE("perturbation shrinks with more bits on realistic tensors") {
  oracle::Rng rng(34);
  const Tensor w = rng.Fill({3, 3, 16, 32}, -0.3, 0.3);
  const double p4 = QuantizationPerturbation(w, 4), p8 = QuantizationPerturbation(w, 8);
  CHECK(p4 > p8);
  CHECK(p8 > 0.0);
  CHECK(LayerSensitivity(w, 4, 2.5) == doctest::Approx(2.5 * p4));
  CHECK(LayerSensitivity(w, 4) == p4);
}

TEST_CASE("sensitivity table never reports coarser precision as safer") {
  SensitivityTable t;
  t.Add("a", {{4, 1.0}, {8, 3.0}});
  t.Add("b", {{4, 2.0}, {8, 0.5}});
  CHECK(t.omega(0, 8) == 1.0);
  CHECK(t.omega(0, 4) == 1.0);
  CHECK(t.omega(1, 8) == 0.5);
  CHECK(CodeOf([&] { t.omega(0, 2); }) == ErrorCode::kMissingAssignment);
  CHECK(CodeOf([&] { t.Add("c", {{4, -1.0}}); }) == ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace tinymm
