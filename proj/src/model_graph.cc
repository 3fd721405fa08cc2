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
#include <map>
#include <set>

#include "tinymm/error.h"
#include "tinymm/model.h"

namespace tinymm {

namespace {

[[noreturn]] void ParseFail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

[[noreturn]] void ShapeFail(const LayerSpec& layer, const std::string& what) {
  throw Error(ErrorCode::kShapeMismatch, "layer '" + layer.name + "': " + what);
}

Shape InferShape(LayerSpec& spec, const std::vector<const Shape*>& in) {
  auto need_rank = [&](const Shape& s, std::size_t rank) {
    if (s.size() != rank) {
      ShapeFail(spec, "expects a rank-" + std::to_string(rank) + " input, got " + ShapeToString(s));
    }
  };
  switch (spec.kind) {
    case LayerKind::kInput: {
      try {
        ValidateShape(spec.input_shape);
      } catch (const Error& e) {
        ShapeFail(spec, e.what());
      }
      if (spec.audio && spec.image) ParseFail("layer '" + spec.name + "': two preprocessors");
      if (spec.audio) {
        const MfccConfig& m = spec.audio->mfcc;
        m.Validate();
        if (!(spec.audio->clip_seconds > 0.0)) ParseFail("layer '" + spec.name + "': clip_seconds");
        const auto samples =
            static_cast<std::size_t>(std::llround(spec.audio->clip_seconds * m.sample_rate));
        const Shape expected{m.NumFrames(samples), m.num_coefficients, 1};
        if (spec.input_shape != expected) {
          ShapeFail(spec, "MFCC settings produce " + ShapeToString(expected) +
                              " but the input declares " + ShapeToString(spec.input_shape));
        }
      }
      if (spec.image) {
        const Shape expected{spec.image->height, spec.image->width, 3};
        if (spec.input_shape != expected) {
          ShapeFail(spec, "image preprocessing produces " + ShapeToString(expected));
        }
      }
      return spec.input_shape;
    }
    case LayerKind::kConv2d:
    case LayerKind::kDsConv2d: {
      const Shape& s = *in[0];
      need_rank(s, 3);
      spec.conv.in_channels = s[2];
      try {
        ValidateConvSpec(spec.conv);
      } catch (const Error& e) {
        ParseFail("layer '" + spec.name + "': " + e.what());
      }
      const ConvSpec& c = spec.conv;
      return {ConvOutputDim(s[0], c.kernel_size, c.stride, c.padding),
              ConvOutputDim(s[1], c.kernel_size, c.stride, c.padding), c.out_channels};
    }
    case LayerKind::kMaxPool: {
      const Shape& s = *in[0];
      need_rank(s, 3);
      const int p = spec.pool.pool_size;
      if (s[0] < p || s[1] < p) {
        throw Error(ErrorCode::kInputTooSmall, "layer '" + spec.name + "': " + ShapeToString(s) +
                                                   " smaller than pool " + std::to_string(p));
      }
      return {s[0] / p, s[1] / p, s[2]};
    }
    case LayerKind::kDense: {
      need_rank(*in[0], 1);
      spec.dense.in_features = (*in[0])[0];
      return {spec.dense.out_features};
    }
    case LayerKind::kFlatten:
      return {static_cast<int>(NumElements(*in[0]))};
    case LayerKind::kConcat: {
      need_rank(*in[0], 1);
      need_rank(*in[1], 1);
      return {(*in[0])[0] + (*in[1])[0]};
    }
    case LayerKind::kSoftmax:
      need_rank(*in[0], 1);
      return *in[0];
    case LayerKind::kRelu:
    case LayerKind::kDropout:
    case LayerKind::kBatchNorm:
      return *in[0];
  }
  ParseFail("unreachable layer kind");
}

}  // namespace

Topology Topology::Resolve(const ModelConfig& config) {
  const auto& layers = config.layers;
  std::map<std::string, int> index;
  int inputs = 0, concats = 0, softmaxes = 0;
  std::vector<int> consumers(layers.size(), 0);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (!index.emplace(l.name, static_cast<int>(i)).second) {
      ParseFail("duplicate layer name '" + l.name + "'");
    }
    const std::size_t want = l.kind == LayerKind::kInput ? 0 : l.kind == LayerKind::kConcat ? 2 : 1;
    if (l.inputs.size() != want) {
      ParseFail("layer '" + l.name + "' needs " + std::to_string(want) + " input(s)");
    }
    for (const auto& src : l.inputs) {
      const auto it = index.find(src);
      if (it == index.end() || it->second == static_cast<int>(i)) {
        ParseFail("layer '" + l.name + "' reads '" + src + "', which is not declared before it");
      }
      ++consumers[static_cast<std::size_t>(it->second)];
      if (l.kind == LayerKind::kBatchNorm &&
          !IsWeighted(layers[static_cast<std::size_t>(it->second)].kind)) {
        ParseFail("batchnorm '" + l.name + "' must directly follow a conv or dense layer");
      }
    }
    inputs += l.kind == LayerKind::kInput;
    concats += l.kind == LayerKind::kConcat;
    softmaxes += l.kind == LayerKind::kSoftmax;
  }
  if (inputs != 2) ParseFail("model needs exactly two input layers, found " + std::to_string(inputs));
  if (concats != 1) ParseFail("model needs exactly one concat layer");
  if (softmaxes != 1) ParseFail("model needs exactly one softmax layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const bool terminal = layers[i].kind == LayerKind::kSoftmax;
    if (consumers[i] != (terminal ? 0 : 1)) {
      ParseFail("layer '" + layers[i].name + "' has " + std::to_string(consumers[i]) +
                " consumers; every layer except the softmax feeds exactly one layer");
    }
  }

  Topology t;
  std::vector<int> node_of(layers.size(), -1);
  std::vector<int> consumer_of(layers.size(), -1);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    if (l.kind == LayerKind::kBatchNorm) {
      const int producer = node_of[static_cast<std::size_t>(index.at(l.inputs[0]))];
      t.nodes_[static_cast<std::size_t>(producer)].folded.push_back(l.name);
      node_of[i] = producer;
      continue;
    }
    Node n;
    n.spec = l;
    std::vector<const Shape*> in_shapes;
    for (const auto& src : l.inputs) {
      const int src_node = node_of[static_cast<std::size_t>(index.at(src))];
      n.inputs.push_back(src_node);
      in_shapes.push_back(&t.nodes_[static_cast<std::size_t>(src_node)].output_shape);
    }
    n.output_shape = InferShape(n.spec, in_shapes);
    node_of[i] = static_cast<int>(t.nodes_.size());
    t.nodes_.push_back(std::move(n));
  }

  // Every node has one consumer except the softmax, so chains are well defined.
  std::vector<int> next(t.nodes_.size(), -1);
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    for (int src : t.nodes_[i].inputs) next[static_cast<std::size_t>(src)] = static_cast<int>(i);
  }
  int concat = -1;
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    if (t.nodes_[i].spec.kind != LayerKind::kInput) continue;
    std::vector<int> chain;
    int cur = static_cast<int>(i);
    while (cur >= 0 && t.nodes_[static_cast<std::size_t>(cur)].spec.kind != LayerKind::kConcat) {
      chain.push_back(cur);
      cur = next[static_cast<std::size_t>(cur)];
    }
    if (cur < 0) ParseFail("input '" + t.nodes_[i].spec.name + "' never reaches the concat layer");
    concat = cur;
    t.branches_.push_back(std::move(chain));
  }
  for (int cur = concat; cur >= 0; cur = next[static_cast<std::size_t>(cur)]) {
    t.head_.push_back(cur);
  }
  if (t.nodes_[static_cast<std::size_t>(t.head_.back())].spec.kind != LayerKind::kSoftmax) {
    ParseFail("the head must end in the softmax layer");
  }
  return t;
}

int Topology::Find(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].spec.name == name) return static_cast<int>(i);
  }
  return -1;
}

int Topology::num_classes() const {
  return nodes_[static_cast<std::size_t>(head_.back())].output_shape[0];
}

std::vector<int> Topology::WeightedNodes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (IsWeighted(nodes_[i].spec.kind)) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<std::string> Topology::WeightedLayerNames() const {
  std::vector<std::string> out;
  for (int i : WeightedNodes()) out.push_back(node(i).spec.name);
  return out;
}

CostReport Topology::Costs() const {
  CostReport report;
  for (int i : WeightedNodes()) {
    const Node& n = node(i);
    const auto& s = n.spec;
    const auto& out = n.output_shape;
    LayerCost c;
    if (s.kind == LayerKind::kConv2d) {
      c = TraditionalConvCost(s.conv.in_channels, s.conv.kernel_size, s.conv.out_channels,
                              out[0], out[1]);
    } else if (s.kind == LayerKind::kDsConv2d) {
      c = DsConvCost(s.conv.in_channels, s.conv.kernel_size, s.conv.out_channels, out[0], out[1]);
    } else {
      c = DenseCost(s.dense.in_features, s.dense.out_features);
    }
    c.name = s.name;
    report.layers.push_back(std::move(c));
  }
  return report;
}

namespace {

class WeightLookup {
 public:
  explicit WeightLookup(const WeightStore& store) : store_(store) {}

  Tensor Take(const std::string& name, const Shape& shape) {
    const WeightRecord* r = store_.Find(name);
    if (!r) throw Error(ErrorCode::kMissingWeights, "weight blob has no record '" + name + "'");
    if (r->dtype != DType::kF32) {
      throw Error(ErrorCode::kShapeMismatch, "record '" + name + "' is " +
                                                 std::string(DTypeName(r->dtype)) + ", expected f32");
    }
    if (r->shape != shape) {
      throw Error(ErrorCode::kShapeMismatch, "record '" + name + "' is " +
                                                 ShapeToString(r->shape) + ", layer expects " +
                                                 ShapeToString(shape));
    }
    used_.insert(name);
    return r->AsTensor();
  }

  void CheckAllUsed() const {
    for (const auto& r : store_.records()) {
      if (!used_.contains(r.name)) {
        throw Error(ErrorCode::kDanglingWeights,
                    "record '" + r.name + "' does not belong to any layer");
      }
    }
  }

 private:
  const WeightStore& store_;
  std::set<std::string> used_;
};

// Scales the last axis of `t` by `scale` per channel.
Tensor ScaleLastAxis(const Tensor& t, const std::vector<double>& scale) {
  const std::size_t c = scale.size();
  std::vector<float> out(t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(t[i] * scale[i % c]);
  }
  return Tensor(t.shape(), std::move(out));
}

}  // namespace

ModelGraph ModelGraph::Build(ModelConfig config, const WeightStore& weights) {
  ModelGraph g;
  auto topology = std::make_shared<Topology>(Topology::Resolve(config));
  WeightLookup lookup(weights);
  g.weights_.resize(topology->nodes().size());

  for (std::size_t i = 0; i < topology->nodes().size(); ++i) {
    const Node& n = topology->nodes()[i];
    const LayerSpec& s = n.spec;
    if (!IsWeighted(s.kind)) continue;
    NodeWeights& w = g.weights_[i];
    const int k = s.conv.kernel_size;
    int channels = 0;
    if (s.kind == LayerKind::kConv2d) {
      channels = s.conv.out_channels;
      w.kernel = lookup.Take(s.name + "/kernel", {k, k, s.conv.in_channels, channels});
    } else if (s.kind == LayerKind::kDsConv2d) {
      channels = s.conv.out_channels;
      w.depthwise = lookup.Take(s.name + "/depthwise", {k, k, s.conv.in_channels});
      w.pointwise = lookup.Take(s.name + "/pointwise", {1, 1, s.conv.in_channels, channels});
    } else {
      channels = s.dense.out_features;
      w.kernel = lookup.Take(s.name + "/kernel", {s.dense.in_features, channels});
    }
    w.bias = lookup.Take(s.name + "/bias", {channels});

    for (const std::string& bn_name : n.folded) {
      double eps = kBatchNormEpsilon;
      for (const auto& l : config.layers) {
        if (l.name == bn_name) eps = l.epsilon;
      }
      const Tensor gamma = lookup.Take(bn_name + "/gamma", {channels});
      const Tensor beta = lookup.Take(bn_name + "/beta", {channels});
      const Tensor mean = lookup.Take(bn_name + "/mean", {channels});
      const Tensor var = lookup.Take(bn_name + "/variance", {channels});
      std::vector<double> scale(static_cast<std::size_t>(channels));
      std::vector<float> bias(static_cast<std::size_t>(channels));
      for (std::size_t c = 0; c < scale.size(); ++c) {
        if (var[c] + eps <= 0.0) {
          throw Error(ErrorCode::kInvalidArgument, "batchnorm '" + bn_name + "' has variance <= -eps");
        }
        scale[c] = gamma[c] / std::sqrt(static_cast<double>(var[c]) + eps);
        bias[c] = static_cast<float>((static_cast<double>(w.bias[c]) - mean[c]) * scale[c] + beta[c]);
      }
      if (s.kind == LayerKind::kDsConv2d) {
        w.pointwise = ScaleLastAxis(w.pointwise, scale);
      } else {
        w.kernel = ScaleLastAxis(w.kernel, scale);
      }
      w.bias = Tensor({channels}, std::move(bias));
    }
  }
  lookup.CheckAllUsed();

  g.config_ = std::make_shared<const ModelConfig>(std::move(config));
  g.topology_ = std::move(topology);
  g.source_ = std::make_shared<const WeightStore>(weights);
  return g;
}

SensitivityTable ModelGraph::Sensitivities(const std::vector<int>& options) const {
  SensitivityTable table;
  for (int i : topology_->WeightedNodes()) {
    const LayerSpec& s = topology_->node(i).spec;
    const NodeWeights& w = weights(i);
    std::map<int, double> row;
    for (int bits : options) {
      const auto override_it = s.omega_override.find(bits);
      if (override_it != s.omega_override.end()) {
        row[bits] = override_it->second;
        continue;
      }
      double perturbation = 0.0;
      if (s.kind == LayerKind::kDsConv2d) {
        perturbation = QuantizationPerturbation(w.depthwise, bits) +
                       QuantizationPerturbation(w.pointwise, bits);
      } else {
        perturbation = QuantizationPerturbation(w.kernel, bits);
      }
      row[bits] = s.hessian_trace ? *s.hessian_trace * perturbation : perturbation;
    }
    table.Add(s.name, std::move(row));
  }
  return table;
}

bool IsQuantizedBlob(const WeightStore& weights) {
  for (const auto& r : weights.records()) {
    if (r.name.ends_with(".qparams")) return true;
  }
  return false;
}

ModelGraph LoadModel(const std::filesystem::path& config_path,
                     const std::filesystem::path& weights_path) {
  ModelConfig config = LoadModelConfig(config_path);
  const WeightStore weights = WeightStore::Load(weights_path);
  if (IsQuantizedBlob(weights)) {
    throw Error(ErrorCode::kParseError,
                weights_path.string() + " holds a quantized model, not float weights");
  }
  return ModelGraph::Build(std::move(config), weights);
}

Tensor PreprocessAudio(const LayerSpec& input, const AudioClip& clip) {
  if (input.kind != LayerKind::kInput || !input.audio) {
    throw Error(ErrorCode::kInvalidArgument, "layer '" + input.name + "' does not take audio");
  }
  const auto& pre = *input.audio;
  if (clip.sample_rate != pre.mfcc.sample_rate) {
    throw Error(ErrorCode::kSampleRateMismatch,
                "clip is " + std::to_string(clip.sample_rate) + " Hz, input '" + input.name +
                    "' expects " + std::to_string(pre.mfcc.sample_rate) + " Hz");
  }
  const auto chunks = ChunkAudio(clip, pre.clip_seconds);
  if (chunks.empty()) {
    throw Error(ErrorCode::kClipTooShort, "input '" + input.name + "' needs " +
                                              std::to_string(pre.clip_seconds) + " s of audio, got " +
                                              std::to_string(clip.duration()) + " s");
  }
  const Tensor features = Mfcc(chunks.front(), pre.mfcc);
  Tensor out = features.Reshaped({features.dim(0), features.dim(1), 1});
  if (out.shape() != input.input_shape) {
    throw Error(ErrorCode::kShapeMismatch, "features " + ShapeToString(out.shape()) +
                                               " do not match input " +
                                               ShapeToString(input.input_shape));
  }
  return out;
}

Tensor PreprocessImageInput(const LayerSpec& input, const RgbImage& image) {
  if (input.kind != LayerKind::kInput || !input.image) {
    throw Error(ErrorCode::kInvalidArgument, "layer '" + input.name + "' does not take images");
  }
  return PreprocessImage(image, input.image->height, input.image->width);
}

}  // namespace tinymm
