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
#include <mutex>
#include <set>

#include "doctest.h"
#include "test_util.h"
#include "tinymm/executor.h"

namespace tinymm {
namespace {

using testing::CodeOf;

// Two small branches (conv + batch norm, ds-conv) meeting at a dense head.
ModelConfig Tiny() {
  return ParseModelConfigText(R"({
    "format": "tinymm-model-v1", "name": "tiny",
    "layers": [
      {"name": "a", "kind": "input", "shape": [9, 8, 1]},
      {"name": "a_conv", "kind": "conv2d", "input": "a", "filters": 4, "kernel_size": 3},
      {"name": "a_bn", "kind": "batchnorm", "input": "a_conv"},
      {"name": "a_relu", "kind": "relu", "input": "a_bn"},
      {"name": "a_pool", "kind": "maxpool", "input": "a_relu", "pool_size": 2},
      {"name": "a_flat", "kind": "flatten", "input": "a_pool"},
      {"name": "b", "kind": "input", "shape": [6, 6, 3]},
      {"name": "b_sep", "kind": "ds_conv2d", "input": "b", "filters": 5, "kernel_size": 3,
       "padding": "same"},
      {"name": "b_relu", "kind": "relu", "input": "b_sep"},
      {"name": "b_drop", "kind": "dropout", "input": "b_relu", "rate": 0.3},
      {"name": "b_flat", "kind": "flatten", "input": "b_drop"},
      {"name": "cat", "kind": "concat", "inputs": ["a_flat", "b_flat"]},
      {"name": "h", "kind": "dense", "input": "cat", "units": 8},
      {"name": "h_relu", "kind": "relu", "input": "h"},
      {"name": "out", "kind": "dense", "input": "h_relu", "units": 3},
      {"name": "prob", "kind": "softmax", "input": "out"}
    ]})");
}

ModelGraph TinyGraph(std::uint64_t seed = 3) { return ModelGraph::Build(Tiny(), RandomWeights(Tiny(), seed)); }

std::vector<InputPair> Inputs(const Topology& t, int n, std::uint64_t base) {
  std::vector<InputPair> v;
  for (int i = 0; i < n; ++i) v.push_back(RandomInputs(t, base + i));
  return v;
}

int ArgMax(const Tensor& p) {
  return static_cast<int>(std::max_element(p.data().begin(), p.data().end()) - p.data().begin());
}

double MaxAbsDiff(const Tensor& a, const Tensor& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, static_cast<double>(std::fabs(a[i] - b[i])));
  return d;
}

TEST_CASE("float inference gives a distribution and ignores threading") {
  const ModelGraph g = TinyGraph();
  const InputPair in = RandomInputs(g.topology(), 1);
  const Tensor p = InferFloat(g, in);
  CHECK(p.shape() == Shape{3});
  double sum = 0.0;
  for (float v : p.data()) sum += v;
  CHECK(std::fabs(sum - 1.0) <= 1e-6);
  CHECK(InferFloat(g, in, {true}) == p);
  CHECK(Infer(g, in, FloatMode{}) == p);
}

TEST_CASE("float inference matches a hand-chained kernel pipeline") {
  const ModelGraph g = TinyGraph();
  const Topology& t = g.topology();
  const InputPair in = RandomInputs(t, 2);
  const NodeWeights& ac = g.weights(t.Find("a_conv"));
  const NodeWeights& bs = g.weights(t.Find("b_sep"));
  const NodeWeights& h = g.weights(t.Find("h"));
  const NodeWeights& o = g.weights(t.Find("out"));
  ConvSpec a{1, 4, 3, 1, Padding::kValid, ConvKind::kTraditional};
  ConvSpec b{3, 5, 3, 1, Padding::kSame, ConvKind::kDepthwiseSeparable};
  const Tensor xa = MaxPool2d(Relu(Conv2d(in.first, ac.kernel, ac.bias, a)), {2});
  const Tensor xb = Relu(DepthwiseSeparableConv2d(in.second, bs.depthwise, bs.pointwise, bs.bias, b));
  const Tensor cat = ConcatLastAxis(xa.Reshaped({static_cast<int>(xa.size())}),
                                    xb.Reshaped({static_cast<int>(xb.size())}));
  const Tensor want = Softmax(Dense(Relu(Dense(cat, h.kernel, h.bias)), o.kernel, o.bias));
  CHECK(InferFloat(g, in) == want);
}

TEST_CASE("inputs of the wrong shape are rejected") {
  const ModelGraph g = TinyGraph();
  InputPair in = RandomInputs(g.topology(), 1);
  in.second = Tensor::Zeros({6, 6, 2});
  CHECK(CodeOf([&] { InferFloat(g, in); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("calibration records the envelope of every activation") {
  const ModelGraph g = TinyGraph();
  const auto set = Inputs(g.topology(), 5, 10);
  const CalibrationTable table = Calibrate(g, set);
  CHECK(Calibrate(g, set) == table);
  CHECK(table.count("b_sep:depthwise") == 1);

  // Replay through an observer and recompute min/max independently.
  std::map<std::string, std::pair<float, float>> seen;
  std::mutex mu;
  for (const auto& in : set) {
    InferFloat(g, in, {}, [&](const std::string& key, const Tensor& v) {
      const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
      std::lock_guard<std::mutex> lock(mu);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen[key] = {*lo, *hi};
      } else {
        it->second = {std::min(it->second.first, *lo), std::max(it->second.second, *hi)};
      }
    });
  }
  for (const auto& [key, mm] : seen) {
    if (key == "prob") continue;
    REQUIRE_MESSAGE(table.count(key) == 1, key);
    CHECK(table.at(key).min == mm.first);
    CHECK(table.at(key).max == mm.second);
  }
  CHECK(CodeOf([&] { Calibrate(g, std::span<const InputPair>()); }) ==
        ErrorCode::kEmptyCalibrationSet);
}

TEST_CASE("quantized model tracks the float model") {
  const ModelGraph g = TinyGraph();
  const CalibrationTable cal = Calibrate(g, Inputs(g.topology(), 16, 100));
  const auto names = g.topology().WeightedLayerNames();
  for (int bits : {8, 4}) {
    const QuantizedModel q = QuantizedModel::Prepare(g, BitAssignment::Uniform(names, bits), cal);
    double worst = 0.0;
    for (std::uint64_t s = 200; s < 220; ++s) {
      const InputPair in = RandomInputs(g.topology(), s);
      const Tensor pq = q.Infer(in);
      double sum = 0.0;
      for (float v : pq.data()) sum += v;
      CHECK(std::fabs(sum - 1.0) <= 1e-6);
      worst = std::max(worst, MaxAbsDiff(pq, InferFloat(g, in)));
    }
    CHECK(worst <= (bits == 8 ? 0.05 : 0.3));
  }
}

TEST_CASE("mixed precision runs and requantizes at precision boundaries") {
  const ModelGraph g = TinyGraph();
  const CalibrationTable cal = Calibrate(g, Inputs(g.topology(), 8, 100));
  const BitAssignment mixed{{"a_conv", "b_sep", "h", "out"}, {4, 8, 4, 8}};
  const QuantizedModel q = QuantizedModel::Prepare(g, mixed, cal);
  const InputPair in = RandomInputs(g.topology(), 5);
  const Tensor p = q.Infer(in);
  CHECK(q.Infer(in, {true}) == p);
  CHECK(Infer(g, in, mixed, &cal) == p);
  CHECK(q.activation(g.topology().Find("a_conv")).bits == 4);
  CHECK(q.activation(g.topology().Find("b_sep")).bits == 8);
}

TEST_CASE("export and reload give identical outputs") {
  const ModelGraph g = TinyGraph();
  const CalibrationTable cal = Calibrate(g, Inputs(g.topology(), 8, 100));
  const BitAssignment mixed{{"a_conv", "b_sep", "h", "out"}, {8, 4, 4, 8}};
  const QuantizedModel q = QuantizedModel::Prepare(g, mixed, cal);
  const WeightStore blob = WeightStore::Deserialize(q.Export().Serialize());
  CHECK(IsQuantizedBlob(blob));
  const QuantizedModel r = QuantizedModel::FromBlob(Tiny(), blob);
  CHECK(r.assignment().bits == mixed.bits);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const InputPair in = RandomInputs(g.topology(), s);
    CHECK(r.Infer(in) == q.Infer(in));
  }
  WeightStore missing;
  for (const auto& rec : blob.records()) {
    if (rec.name != "h/bias") missing.Add(rec);
  }
  CHECK(CodeOf([&] { QuantizedModel::FromBlob(Tiny(), missing); }) == ErrorCode::kMissingWeights);
  WeightStore extra = blob;
  extra.Add(WeightRecord::I32("zz/bias", {1}));
  CHECK(CodeOf([&] { QuantizedModel::FromBlob(Tiny(), extra); }) == ErrorCode::kDanglingWeights);
}

TEST_CASE("weight payload shrinks to a quarter and an eighth") {
  const ModelGraph g = TinyGraph();
  const CalibrationTable cal = Calibrate(g, Inputs(g.topology(), 4, 100));
  const auto names = g.topology().WeightedLayerNames();
  auto payload = [&](const WeightStore& s) {
    std::size_t bytes = 0;
    for (const auto& r : s.records()) {
      if (r.name.ends_with("/kernel") || r.name.ends_with("/depthwise") ||
          r.name.ends_with("/pointwise")) {
        bytes += r.PayloadBytes();
      }
    }
    return bytes;
  };
  const std::size_t fp = 4 * g.Costs().total_params();
  CHECK(payload(QuantizedModel::Prepare(g, BitAssignment::Uniform(names, 8), cal).Export()) * 4 == fp);
  CHECK(payload(QuantizedModel::Prepare(g, BitAssignment::Uniform(names, 4), cal).Export()) * 8 >= fp);
}

TEST_CASE("prepare errors") {
  const ModelGraph g = TinyGraph();
  const CalibrationTable cal = Calibrate(g, Inputs(g.topology(), 2, 100));
  const InputPair in = RandomInputs(g.topology(), 1);
  CHECK(CodeOf([&] { QuantizedModel::Prepare(g, BitAssignment{{"a_conv"}, {8}}, cal); }) ==
        ErrorCode::kMissingAssignment);
  const auto all8 = BitAssignment::Uniform(g.topology().WeightedLayerNames(), 8);
  CalibrationTable partial = cal;
  partial.erase("h_relu");
  CHECK(CodeOf([&] { QuantizedModel::Prepare(g, all8, partial); }) ==
        ErrorCode::kMissingCalibration);
  CHECK(CodeOf([&] { Infer(g, in, all8); }) == ErrorCode::kMissingCalibration);
  auto bad = all8;
  bad.bits[0] = 5;
  CHECK(CodeOf([&] { QuantizedModel::Prepare(g, bad, cal); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("synthesized inputs are deterministic and shaped for the model") {
  const Topology t = Topology::Resolve(ReferenceConfig(ReferenceModel::kBattlefield));
  const InputPair a = SynthesizeInputs(t, 4), b = SynthesizeInputs(t, 4);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.first.shape() == Shape{44, 13, 1});
  CHECK(a.second.shape() == Shape{32, 32, 3});
  CHECK_FALSE(SynthesizeInputs(t, 5).first == a.first);
  const AudioClip clip = SynthesizeClip(22050, 1.0, 9);
  CHECK(clip.samples.size() == 22050);
  for (float s : clip.samples) REQUIRE(std::fabs(s) <= 1.0f);
}

TEST_CASE("reference models: quantized argmax agrees with float") {
  for (ReferenceModel which : {ReferenceModel::kCovid, ReferenceModel::kBattlefield}) {
    const ModelGraph g = BuildReference(which);
    std::vector<InputPair> calib;
    for (std::uint64_t s = 0; s < 8; ++s) calib.push_back(SynthesizeInputs(g.topology(), 1000 + s));
    const CalibrationTable cal = Calibrate(g, calib);
    const QuantizedModel q = QuantizedModel::Prepare(
        g, BitAssignment::Uniform(g.topology().WeightedLayerNames(), 8), cal);
    int agree = 0;
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const InputPair in = SynthesizeInputs(g.topology(), 50 + s);
      const Tensor pf = InferFloat(g, in), pq = q.Infer(in);
      agree += ArgMax(pf) == ArgMax(pq);
      worst = std::max(worst, MaxAbsDiff(pf, pq));
    }
    CHECK(agree >= 18);
    CHECK(worst <= 0.05);
  }
}

}  // namespace
}  // namespace tinymm
