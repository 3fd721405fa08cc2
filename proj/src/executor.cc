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


#include "tinymm/executor.h"

#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <set>

#include "internal/rng.h"
#include "tinymm/error.h"

namespace tinymm {

namespace {

void CheckInputShape(const Node& node, const Tensor& t) {
  if (t.shape() != node.output_shape) {
    throw Error(ErrorCode::kShapeMismatch, "input '" + node.spec.name + "' expects " +
                                               ShapeToString(node.output_shape) + ", got " +
                                               ShapeToString(t.shape()));
  }
}

Tensor RunFloatNode(const ModelGraph& g, int i, const std::vector<const Tensor*>& in,
                    const ActivationObserver& observe) {
  const Node& n = g.topology().node(i);
  const LayerSpec& s = n.spec;
  switch (s.kind) {
    case LayerKind::kConv2d: {
      const NodeWeights& w = g.weights(i);
      return Conv2d(*in[0], w.kernel, w.bias, s.conv);
    }
    case LayerKind::kDsConv2d: {
      const NodeWeights& w = g.weights(i);
      Tensor mid = DepthwiseConv2d(*in[0], w.depthwise, s.conv);
      if (observe) observe(s.name + ":depthwise", mid);
      return PointwiseConv2d(mid, w.pointwise, w.bias);
    }
    case LayerKind::kDense: {
      const NodeWeights& w = g.weights(i);
      return Dense(*in[0], w.kernel, w.bias);
    }
    case LayerKind::kMaxPool: return MaxPool2d(*in[0], s.pool);
    case LayerKind::kRelu: return Relu(*in[0]);
    case LayerKind::kSoftmax: return Softmax(*in[0]);
    case LayerKind::kFlatten: return in[0]->Reshaped({static_cast<int>(in[0]->size())});
    case LayerKind::kConcat: return ConcatLastAxis(*in[0], *in[1]);
    case LayerKind::kDropout:
    case LayerKind::kBatchNorm:
    case LayerKind::kInput:
      return *in[0];
  }
  throw Error(ErrorCode::kInvalidArgument, "unhandled layer kind");
}

Tensor RunFloatBranch(const ModelGraph& g, int branch, const Tensor& input,
                      const ActivationObserver& observe) {
  const auto& chain = g.topology().branch(branch);
  CheckInputShape(g.topology().node(chain.front()), input);
  Tensor cur = input;
  if (observe) observe(g.topology().node(chain.front()).spec.name, cur);
  for (std::size_t k = 1; k < chain.size(); ++k) {
    cur = RunFloatNode(g, chain[k], {&cur}, observe);
    if (observe) observe(g.topology().node(chain[k]).spec.name, cur);
  }
  return cur;
}

}  // namespace

Tensor InferFloat(const ModelGraph& graph, const InputPair& inputs, const ExecOptions& options,
                  const ActivationObserver& observer) {
  Tensor a, b;
  if (options.concurrent_branches) {
    auto first = std::async(std::launch::async, [&] {
      return RunFloatBranch(graph, 0, inputs.first, observer);
    });
    b = RunFloatBranch(graph, 1, inputs.second, observer);
    a = first.get();
  } else {
    a = RunFloatBranch(graph, 0, inputs.first, observer);
    b = RunFloatBranch(graph, 1, inputs.second, observer);
  }
  const auto& head = graph.topology().head();
  Tensor cur = RunFloatNode(graph, head.front(), {&a, &b}, observer);
  if (observer) observer(graph.topology().node(head.front()).spec.name, cur);
  for (std::size_t k = 1; k < head.size(); ++k) {
    cur = RunFloatNode(graph, head[k], {&cur}, observer);
    if (observer) observer(graph.topology().node(head[k]).spec.name, cur);
  }
  return cur;
}

CalibrationTable Calibrate(const ModelGraph& graph, std::span<const InputPair> inputs) {
  if (inputs.empty()) {
    throw Error(ErrorCode::kEmptyCalibrationSet, "calibration needs at least one input pair");
  }
  CalibrationTable table;
  const ActivationObserver observe = [&](const std::string& key, const Tensor& t) {
    table[key].Observe(t);
  };
  for (const InputPair& pair : inputs) InferFloat(graph, pair, {}, observe);
  return table;
}

// ---------------------------------------------------------------------------
// Quantized model.

namespace {

std::vector<int> NextNodes(const Topology& t) {
  std::vector<int> next(t.nodes().size(), -1);
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    for (int src : t.nodes()[i].inputs) next[static_cast<std::size_t>(src)] = static_cast<int>(i);
  }
  return next;
}

// Bit width of the tensor leaving node i: that of the weighted layer that
// consumes it, or for the logits, of the layer producing them.
int EdgeBits(const Topology& t, const std::vector<int>& next, const std::vector<int>& bits, int i) {
  for (int cur = next[static_cast<std::size_t>(i)]; cur >= 0; cur = next[static_cast<std::size_t>(cur)]) {
    if (IsWeighted(t.node(cur).spec.kind)) return bits[static_cast<std::size_t>(cur)];
  }
  int cur = i;
  while (!IsWeighted(t.node(cur).spec.kind)) cur = t.node(cur).inputs.at(0);
  return bits[static_cast<std::size_t>(cur)];
}

const CalibrationStats& Stats(const CalibrationTable& table, const std::string& key) {
  const auto it = table.find(key);
  if (it == table.end() || it->second.count == 0) {
    throw Error(ErrorCode::kMissingCalibration, "no calibration statistics for '" + key + "'");
  }
  return it->second;
}

std::vector<std::int32_t> QuantizeBias(const Tensor& bias, double scale, const std::string& layer) {
  std::vector<std::int32_t> out(bias.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double q = std::nearbyint(static_cast<double>(bias[i]) / scale);
    if (std::abs(q) > std::numeric_limits<std::int32_t>::max()) {
      throw Error(ErrorCode::kAccumulatorOverflow, "bias of '" + layer + "' overflows int32");
    }
    out[i] = static_cast<std::int32_t>(q);
  }
  return out;
}

std::vector<double> ParamsToF64(const QuantParams& p) {
  return {p.scale, static_cast<double>(p.zero_point), static_cast<double>(p.bits)};
}

std::int64_t MaxAbs(const std::vector<std::int32_t>& v) {
  std::int64_t m = 0;
  for (std::int32_t x : v) m = std::max<std::int64_t>(m, std::llabs(x));
  return m;
}

}  // namespace

QuantizedModel QuantizedModel::Prepare(const ModelGraph& graph, const BitAssignment& assignment,
                                       const CalibrationTable& calibration) {
  QuantizedModel qm;
  qm.topology_ = std::make_shared<const Topology>(graph.topology());
  qm.config_ = std::make_shared<const ModelConfig>(graph.config());
  const Topology& t = *qm.topology_;
  const std::size_t count = t.nodes().size();
  const std::vector<int> next = NextNodes(t);

  std::vector<int> bits(count, 0);
  for (int i : t.WeightedNodes()) {
    const LayerSpec& s = t.node(i).spec;
    const auto b = assignment.BitsFor(s.name);
    if (!b) throw Error(ErrorCode::kMissingAssignment, "no bit width for layer '" + s.name + "'");
    if (*b != 4 && *b != 8) {
      throw Error(ErrorCode::kInvalidArgument, "layer '" + s.name + "' assigned " +
                                                   std::to_string(*b) + " bits");
    }
    if (s.fixed_bits && *s.fixed_bits != *b) {
      throw Error(ErrorCode::kInvalidArgument, "layer '" + s.name + "' is fixed at " +
                                                   std::to_string(*s.fixed_bits) + " bits");
    }
    bits[static_cast<std::size_t>(i)] = *b;
    qm.assignment_.layers.push_back(s.name);
    qm.assignment_.bits.push_back(*b);
  }

  // Each weighted layer emits at its own precision; inputs and the concat emit
  // at the precision of their consumer. key[i] names the statistics behind
  // node i's output parameters.
  qm.acts_.resize(count);
  qm.layers_.resize(count);
  std::vector<std::string> key(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Node& n = t.nodes()[i];
    const LayerSpec& s = n.spec;
    const int idx = static_cast<int>(i);
    switch (s.kind) {
      case LayerKind::kInput:
      case LayerKind::kConcat:
        key[i] = s.name;
        qm.acts_[i] = AffineParams(Stats(calibration, key[i]), EdgeBits(t, next, bits, idx));
        break;
      case LayerKind::kConv2d:
      case LayerKind::kDsConv2d:
      case LayerKind::kDense: {
        const int b = bits[i];
        // A following ReLU is fused into the output range.
        const int after = next[i];
        const bool fused = after >= 0 && t.node(after).spec.kind == LayerKind::kRelu;
        key[i] = fused ? t.node(after).spec.name : s.name;
        qm.acts_[i] = AffineParams(Stats(calibration, key[i]), b);

        Layer& layer = qm.layers_[i];
        const auto src = static_cast<std::size_t>(n.inputs[0]);
        QuantParams in = qm.acts_[src];
        if (in.bits != b) {
          in = AffineParams(Stats(calibration, key[src]), b);
          layer.in = in;
        }
        const NodeWeights& w = graph.weights(idx);
        if (s.kind == LayerKind::kDsConv2d) {
          layer.depthwise = QuantizeTensor(w.depthwise, b, QuantMode::kSymmetricWeights);
          layer.pointwise = QuantizeTensor(w.pointwise, b, QuantMode::kSymmetricWeights);
          layer.mid = AffineParams(Stats(calibration, s.name + ":depthwise"), b);
          layer.bias = QuantizeBias(w.bias, layer.mid.scale * layer.pointwise.params().scale, s.name);
        } else {
          layer.kernel = QuantizeTensor(w.kernel, b, QuantMode::kSymmetricWeights);
          layer.bias = QuantizeBias(w.bias, in.scale * layer.kernel.params().scale, s.name);
        }
        break;
      }
      case LayerKind::kSoftmax:
        break;
      default:
        key[i] = key[static_cast<std::size_t>(n.inputs[0])];
        qm.acts_[i] = qm.acts_[static_cast<std::size_t>(n.inputs[0])];
        break;
    }
  }
  qm.CheckAccumulators();
  return qm;
}

void QuantizedModel::CheckAccumulators() const {
  for (int i : topology_->WeightedNodes()) {
    const LayerSpec& s = topology_->node(i).spec;
    const Layer& l = layers_[static_cast<std::size_t>(i)];
    const int b = l.in ? l.in->bits : acts_[static_cast<std::size_t>(topology_->node(i).inputs[0])].bits;
    const std::int64_t k = s.conv.kernel_size;
    try {
      switch (s.kind) {
        case LayerKind::kConv2d: CheckAccumulatorFits(k * k * s.conv.in_channels, b, MaxAbs(l.bias)); break;
        case LayerKind::kDsConv2d:
          CheckAccumulatorFits(k * k, b, 0);
          CheckAccumulatorFits(s.conv.in_channels, b, MaxAbs(l.bias));
          break;
        default: CheckAccumulatorFits(s.dense.in_features, b, MaxAbs(l.bias)); break;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "layer '" + s.name + "': " + e.what());
    }
  }
}

QuantTensor QuantizedModel::RunNode(int i, const std::vector<const QuantTensor*>& in) const {
  const LayerSpec& s = topology_->node(i).spec;
  const Layer& l = layers_[static_cast<std::size_t>(i)];
  const QuantParams& out = acts_[static_cast<std::size_t>(i)];
  QuantTensor requantized;
  const QuantTensor* x = in[0];
  if (l.in) {
    requantized = Requantize(*in[0], *l.in);
    x = &requantized;
  }
  switch (s.kind) {
    case LayerKind::kConv2d: return Conv2dInt(*x, l.kernel, l.bias, out, s.conv);
    case LayerKind::kDsConv2d:
      return DepthwiseSeparableConv2dInt(*x, l.depthwise, l.pointwise, l.bias, l.mid, out, s.conv);
    case LayerKind::kDense: return DenseInt(*x, l.kernel, l.bias, out);
    case LayerKind::kMaxPool: return MaxPool2dInt(*in[0], s.pool);
    case LayerKind::kRelu: return ReluInt(*in[0]);
    case LayerKind::kFlatten: return in[0]->Reshaped({static_cast<int>(in[0]->size())});
    case LayerKind::kConcat: {
      const QuantTensor a = Requantize(*in[0], out);
      const QuantTensor b = Requantize(*in[1], out);
      std::vector<std::int8_t> joined(a.qdata().begin(), a.qdata().end());
      joined.insert(joined.end(), b.qdata().begin(), b.qdata().end());
      const int width = static_cast<int>(joined.size());
      return QuantTensor({width}, std::move(joined), out);
    }
    default:
      return *in[0];
  }
}

QuantTensor QuantizedModel::RunBranch(int branch, const Tensor& input) const {
  const auto& chain = topology_->branch(branch);
  CheckInputShape(topology_->node(chain.front()), input);
  QuantTensor cur = QuantizeWithParams(input, acts_[static_cast<std::size_t>(chain.front())]);
  for (std::size_t k = 1; k < chain.size(); ++k) cur = RunNode(chain[k], {&cur});
  return cur;
}

Tensor QuantizedModel::Infer(const InputPair& inputs, const ExecOptions& options) const {
  QuantTensor a, b;
  if (options.concurrent_branches) {
    auto first = std::async(std::launch::async, [&] { return RunBranch(0, inputs.first); });
    b = RunBranch(1, inputs.second);
    a = first.get();
  } else {
    a = RunBranch(0, inputs.first);
    b = RunBranch(1, inputs.second);
  }
  const auto& head = topology_->head();
  QuantTensor cur = RunNode(head.front(), {&a, &b});
  for (std::size_t k = 1; k + 1 < head.size(); ++k) cur = RunNode(head[k], {&cur});
  return Softmax(Dequantize(cur));
}

WeightStore QuantizedModel::Export() const {
  WeightStore store;
  const Topology& t = *topology_;
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    const LayerSpec& s = t.nodes()[i].spec;
    const Layer& l = layers_[i];
    auto put = [&](const std::string& name, const QuantTensor& q) {
      store.Add(WeightRecord::Quantized(name, q));
      store.Add(WeightRecord::F64(name + ".qparams", ParamsToF64(q.params())));
    };
    if (s.kind == LayerKind::kDsConv2d) {
      put(s.name + "/depthwise", l.depthwise);
      put(s.name + "/pointwise", l.pointwise);
      store.Add(WeightRecord::F64(s.name + "/mid.qparams", ParamsToF64(l.mid)));
    } else if (IsWeighted(s.kind)) {
      put(s.name + "/kernel", l.kernel);
    }
    if (IsWeighted(s.kind)) store.Add(WeightRecord::I32(s.name + "/bias", l.bias));
    if (l.in) store.Add(WeightRecord::F64(s.name + "/in.qparams", ParamsToF64(*l.in)));
    if (s.kind != LayerKind::kSoftmax) {
      store.Add(WeightRecord::F64(s.name + "/act.qparams", ParamsToF64(acts_[i])));
    }
  }
  return store;
}

namespace {

class QuantLookup {
 public:
  explicit QuantLookup(const WeightStore& store) : store_(store) {}

  const WeightRecord& Get(const std::string& name) {
    const WeightRecord* r = store_.Find(name);
    if (!r) throw Error(ErrorCode::kMissingWeights, "quantized blob has no record '" + name + "'");
    used_.insert(name);
    return *r;
  }

  bool Has(const std::string& name) const { return store_.Find(name) != nullptr; }

  QuantParams Params(const std::string& name) {
    const WeightRecord& r = Get(name);
    const auto& v = r.AsF64();
    if (v.size() != 3) throw Error(ErrorCode::kParseError, "record '" + name + "' must hold 3 values");
    QuantParams p;
    p.scale = v[0];
    p.zero_point = static_cast<int>(v[1]);
    p.bits = static_cast<int>(v[2]);
    if (p.zero_point != v[1] || p.bits != v[2]) {
      throw Error(ErrorCode::kParseError, "record '" + name + "' has non-integer fields");
    }
    try {
      ValidateQuantParams(p);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParseError, "record '" + name + "': " + e.what());
    }
    return p;
  }

  QuantTensor Weights(const std::string& name, const Shape& shape) {
    const WeightRecord& r = Get(name);
    if (r.shape != shape) {
      throw Error(ErrorCode::kShapeMismatch, "record '" + name + "' is " + ShapeToString(r.shape) +
                                                 ", layer expects " + ShapeToString(shape));
    }
    const QuantParams p = Params(name + ".qparams");
    if ((r.dtype == DType::kI4) != (p.bits == 4)) {
      throw Error(ErrorCode::kParseError, "record '" + name + "' dtype disagrees with its bits");
    }
    const auto& q = r.AsInts();
    return QuantTensor(r.shape, std::vector<std::int8_t>(q.begin(), q.end()), p);
  }

  void CheckAllUsed() const {
    for (const auto& r : store_.records()) {
      if (!used_.contains(r.name)) {
        throw Error(ErrorCode::kDanglingWeights, "record '" + r.name + "' does not belong to any layer");
      }
    }
  }

 private:
  const WeightStore& store_;
  std::set<std::string> used_;
};

}  // namespace

QuantizedModel QuantizedModel::FromBlob(ModelConfig config, const WeightStore& blob) {
  QuantizedModel qm;
  qm.topology_ = std::make_shared<const Topology>(Topology::Resolve(config));
  qm.config_ = std::make_shared<const ModelConfig>(std::move(config));
  const Topology& t = *qm.topology_;
  const std::size_t count = t.nodes().size();
  qm.acts_.resize(count);
  qm.layers_.resize(count);
  QuantLookup lookup(blob);
  for (std::size_t i = 0; i < count; ++i) {
    const LayerSpec& s = t.nodes()[i].spec;
    if (s.kind != LayerKind::kSoftmax) qm.acts_[i] = lookup.Params(s.name + "/act.qparams");
    if (!IsWeighted(s.kind)) continue;
    Layer& l = qm.layers_[i];
    const int k = s.conv.kernel_size;
    int out = 0;
    int bits = 0;
    if (s.kind == LayerKind::kDsConv2d) {
      out = s.conv.out_channels;
      l.depthwise = lookup.Weights(s.name + "/depthwise", {k, k, s.conv.in_channels});
      l.pointwise = lookup.Weights(s.name + "/pointwise", {1, 1, s.conv.in_channels, out});
      l.mid = lookup.Params(s.name + "/mid.qparams");
      bits = l.pointwise.params().bits;
    } else if (s.kind == LayerKind::kConv2d) {
      out = s.conv.out_channels;
      l.kernel = lookup.Weights(s.name + "/kernel", {k, k, s.conv.in_channels, out});
      bits = l.kernel.params().bits;
    } else {
      out = s.dense.out_features;
      l.kernel = lookup.Weights(s.name + "/kernel", {s.dense.in_features, out});
      bits = l.kernel.params().bits;
    }
    const WeightRecord& bias = lookup.Get(s.name + "/bias");
    if (bias.shape != Shape{out}) {
      throw Error(ErrorCode::kShapeMismatch, "record '" + bias.name + "' must have " +
                                                 std::to_string(out) + " entries");
    }
    l.bias = bias.AsI32();
    if (lookup.Has(s.name + "/in.qparams")) l.in = lookup.Params(s.name + "/in.qparams");
    qm.assignment_.layers.push_back(s.name);
    qm.assignment_.bits.push_back(bits);
  }
  lookup.CheckAllUsed();
  qm.CheckAccumulators();
  return qm;
}

Tensor Infer(const ModelGraph& graph, const InputPair& inputs, const InferMode& mode,
             const CalibrationTable* calibration, const ExecOptions& options) {
  if (std::holds_alternative<FloatMode>(mode)) return InferFloat(graph, inputs, options);
  if (!calibration) {
    throw Error(ErrorCode::kMissingCalibration, "quantized inference needs calibration statistics");
  }
  return QuantizedModel::Prepare(graph, std::get<BitAssignment>(mode), *calibration)
      .Infer(inputs, options);
}

// ---------------------------------------------------------------------------
// Synthetic inputs.

AudioClip SynthesizeClip(int sample_rate, double seconds, std::uint64_t seed) {
  internal::UniformRng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  struct Tone {
    double freq, amp, phase;
  };
  std::vector<Tone> tones;
  const double top = std::min(4000.0, sample_rate / 2.0 - 1.0);
  for (int i = 0; i < 3; ++i) {
    tones.push_back({rng(80.0, top), rng(0.1, 0.25), rng(0.0, 2 * std::numbers::pi)});
  }
  AudioClip clip;
  clip.sample_rate = sample_rate;
  clip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double time = static_cast<double>(i) / sample_rate;
    double v = rng(-0.05, 0.05);
    for (const Tone& t : tones) v += t.amp * std::sin(2 * std::numbers::pi * t.freq * time + t.phase);
    clip.samples[i] = static_cast<float>(v);
  }
  return clip;
}

RgbImage SynthesizeImage(int height, int width, std::uint64_t seed) {
  internal::UniformRng rng(seed);
  RgbImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  double fx[3], fy[3], ph[3];
  for (int c = 0; c < 3; ++c) {
    fx[c] = rng(0.05, 0.5);
    fy[c] = rng(0.05, 0.5);
    ph[c] = rng(0.0, 2 * std::numbers::pi);
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v = 128.0 + 55.0 * std::sin(fx[c] * x + ph[c]) + 55.0 * std::cos(fy[c] * y) +
                         rng(-15.0, 15.0);
        img.pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return img;
}

InputPair SynthesizeInputs(const Topology& topology, std::uint64_t seed) {
  Tensor out[2];
  for (int b = 0; b < 2; ++b) {
    const LayerSpec& s = topology.node(topology.input_node(b)).spec;
    const std::uint64_t sub = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(b + 1);
    if (s.audio) {
      const AudioClip clip = SynthesizeClip(s.audio->mfcc.sample_rate, s.audio->clip_seconds, sub);
      out[b] = PreprocessAudio(s, clip);
    } else if (s.image) {
      out[b] = PreprocessImageInput(s, SynthesizeImage(s.image->height, s.image->width, sub));
    } else {
      internal::UniformRng rng(sub);
      out[b] = rng.Fill(s.input_shape, -1.0, 1.0);
    }
  }
  return {std::move(out[0]), std::move(out[1])};
}

InputPair RandomInputs(const Topology& topology, std::uint64_t seed) {
  internal::UniformRng rng(seed);
  Tensor a = rng.Fill(topology.node(topology.input_node(0)).output_shape, -1.0, 1.0);
  Tensor b = rng.Fill(topology.node(topology.input_node(1)).output_shape, -1.0, 1.0);
  return {std::move(a), std::move(b)};
}

}  // namespace tinymm
