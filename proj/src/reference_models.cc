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

#include "tinymm/error.h"
#include "tinymm/model.h"
#include "internal/rng.h"

namespace tinymm {

namespace {

constexpr double kDropout = 0.2;

class Builder {
 public:
  explicit Builder(std::string name) { config_.name = std::move(name); }

  Builder& Input(const std::string& name, Shape shape) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kInput;
    s.input_shape = std::move(shape);
    prev_ = name;
    return Push(std::move(s));
  }

  Builder& Audio(const MfccConfig& mfcc, double clip_seconds) {
    config_.layers.back().audio = AudioPreprocess{mfcc, clip_seconds};
    return *this;
  }

  Builder& Image(int height, int width) {
    config_.layers.back().image = ImagePreprocess{height, width};
    return *this;
  }

  Builder& Conv(const std::string& name, LayerKind kind, int filters, int k, Padding pad) {
    LayerSpec s = Next(name, kind);
    s.conv.out_channels = filters;
    s.conv.kernel_size = k;
    s.conv.padding = pad;
    s.conv.kind = kind == LayerKind::kConv2d ? ConvKind::kTraditional : ConvKind::kDepthwiseSeparable;
    return Push(std::move(s));
  }

  Builder& Dense(const std::string& name, int units) {
    LayerSpec s = Next(name, LayerKind::kDense);
    s.dense.out_features = units;
    return Push(std::move(s));
  }

  Builder& Pool(const std::string& name, int p) {
    LayerSpec s = Next(name, LayerKind::kMaxPool);
    s.pool.pool_size = p;
    return Push(std::move(s));
  }

  Builder& Dropout(const std::string& name) {
    LayerSpec s = Next(name, LayerKind::kDropout);
    s.dropout_rate = kDropout;
    return Push(std::move(s));
  }

  Builder& Simple(const std::string& name, LayerKind kind) { return Push(Next(name, kind)); }

  Builder& Concat(const std::string& name, const std::string& a, const std::string& b) {
    LayerSpec s;
    s.name = name;
    s.kind = LayerKind::kConcat;
    s.inputs = {a, b};
    prev_ = name;
    return Push(std::move(s));
  }

  const std::string& last() const { return prev_; }
  ModelConfig Take() { return std::move(config_); }

 private:
  LayerSpec Next(const std::string& name, LayerKind kind) {
    LayerSpec s;
    s.name = name;
    s.kind = kind;
    s.inputs = {prev_};
    prev_ = name;
    return s;
  }

  Builder& Push(LayerSpec s) {
    config_.layers.push_back(std::move(s));
    return *this;
  }

  ModelConfig config_;
  std::string prev_;
};

// Conv + BN + ReLU stem, as both reference models open each audio/image branch.
void Stem(Builder& b, const std::string& p, int filters, Padding pad) {
  b.Conv(p + "_conv", LayerKind::kConv2d, filters, 3, pad)
      .Simple(p + "_bn", LayerKind::kBatchNorm)
      .Simple(p + "_conv_relu", LayerKind::kRelu);
}

void SepBlock(Builder& b, const std::string& name, int filters, int k, Padding pad, int pool) {
  b.Conv(name, LayerKind::kDsConv2d, filters, k, pad)
      .Simple(name + "_relu", LayerKind::kRelu)
      .Pool(name + "_pool", pool)
      .Dropout(name + "_drop");
}

void DenseBlock(Builder& b, const std::string& name, int units) {
  b.Dense(name, units).Simple(name + "_relu", LayerKind::kRelu).Dropout(name + "_drop");
}

void Tail(Builder& b, const std::string& p, int units) {
  b.Simple(p + "_flatten", LayerKind::kFlatten);
  DenseBlock(b, p + "_dense", units);
}

MfccConfig AudioConfig(int sr, int frame, int hop, int coeffs) {
  MfccConfig m;
  m.sample_rate = sr;
  m.frame_length = frame;
  m.hop_length = hop;
  m.num_mel_filters = 40;
  m.num_coefficients = coeffs;
  m.fmin = 0.0;
  m.fmax = sr / 2.0;
  m.center_padding = true;
  return m;
}

ModelConfig CovidConfig() {
  Builder b("covid");
  // Cough: 2 s at 44.1 kHz, hop 436 -> 203 frames of 20 coefficients.
  b.Input("cough", {203, 20, 1}).Audio(AudioConfig(44100, 2048, 436, 20), 2.0);
  Stem(b, "cough", 16, Padding::kValid);
  SepBlock(b, "cough_sep1", 32, 3, Padding::kValid, 3);
  SepBlock(b, "cough_sep2", 32, 3, Padding::kValid, 3);
  Tail(b, "cough", 32);
  const std::string cough = b.last();

  // Speech: 2 s at 44.1 kHz, hop 265 -> 333 frames of 13 coefficients.
  b.Input("speech", {333, 13, 1}).Audio(AudioConfig(44100, 1024, 265, 13), 2.0);
  Stem(b, "speech", 64, Padding::kSame);
  // A 5x5 valid kernel is the one that takes 333x13 to the tabulated 329x9.
  SepBlock(b, "speech_sep1", 32, 5, Padding::kValid, 2);
  SepBlock(b, "speech_sep2", 16, 3, Padding::kValid, 2);
  Tail(b, "speech", 32);
  const std::string speech = b.last();

  b.Concat("fusion", cough, speech);
  DenseBlock(b, "head_dense1", 256);
  DenseBlock(b, "head_dense2", 128);
  b.Dense("head_out", 2).Simple("softmax", LayerKind::kSoftmax);
  return b.Take();
}

ModelConfig BattlefieldConfig() {
  Builder b("battlefield");
  b.Input("audio", {44, 13, 1}).Audio(AudioConfig(22050, 2048, 512, 13), 1.0);
  Stem(b, "audio", 64, Padding::kSame);
  SepBlock(b, "audio_sep1", 32, 3, Padding::kSame, 2);
  SepBlock(b, "audio_sep2", 64, 3, Padding::kSame, 2);
  Tail(b, "audio", 64);
  const std::string audio = b.last();

  b.Input("image", {32, 32, 3}).Image(32, 32);
  Stem(b, "image", 64, Padding::kSame);
  // 32 filters: the pooled map that follows is 16x16x32.
  SepBlock(b, "image_sep1", 32, 3, Padding::kSame, 2);
  SepBlock(b, "image_sep2", 64, 3, Padding::kSame, 2);
  Tail(b, "image", 64);
  const std::string image = b.last();

  b.Concat("fusion", audio, image);
  DenseBlock(b, "head_dense1", 64);
  b.Dense("head_out", 4).Simple("softmax", LayerKind::kSoftmax);
  return b.Take();
}

}  // namespace

std::optional<ReferenceModel> ParseReferenceModel(std::string_view name) {
  if (name == "covid") return ReferenceModel::kCovid;
  if (name == "battlefield") return ReferenceModel::kBattlefield;
  return std::nullopt;
}

ModelConfig ReferenceConfig(ReferenceModel which) {
  return which == ReferenceModel::kCovid ? CovidConfig() : BattlefieldConfig();
}

WeightStore RandomWeights(const ModelConfig& config, std::uint64_t seed) {
  const Topology topology = Topology::Resolve(config);
  internal::UniformRng rng(seed);
  WeightStore store;
  auto he = [](int fan_in) { return std::sqrt(6.0 / fan_in); };
  for (const LayerSpec& raw : config.layers) {
    if (raw.kind == LayerKind::kBatchNorm) {
      const Node& producer = topology.node(topology.Find(raw.inputs[0]));
      const int c = producer.output_shape.back();
      store.Add(WeightRecord::F32(raw.name + "/gamma", rng.Fill({c}, 0.8, 1.2)));
      store.Add(WeightRecord::F32(raw.name + "/beta", rng.Fill({c}, -0.1, 0.1)));
      store.Add(WeightRecord::F32(raw.name + "/mean", rng.Fill({c}, -0.1, 0.1)));
      store.Add(WeightRecord::F32(raw.name + "/variance", rng.Fill({c}, 0.5, 1.5)));
      continue;
    }
    if (!IsWeighted(raw.kind)) continue;
    // Shape inference fills in the input side of the spec.
    const LayerSpec& s = topology.node(topology.Find(raw.name)).spec;
    const int k = s.conv.kernel_size;
    const int m = s.conv.in_channels;
    int out = 0;
    if (s.kind == LayerKind::kConv2d) {
      out = s.conv.out_channels;
      const double a = he(k * k * m);
      store.Add(WeightRecord::F32(s.name + "/kernel", rng.Fill({k, k, m, out}, -a, a)));
    } else if (s.kind == LayerKind::kDsConv2d) {
      out = s.conv.out_channels;
      const double a = he(k * k);
      store.Add(WeightRecord::F32(s.name + "/depthwise", rng.Fill({k, k, m}, -a, a)));
      const double b = he(m);
      store.Add(WeightRecord::F32(s.name + "/pointwise", rng.Fill({1, 1, m, out}, -b, b)));
    } else {
      out = s.dense.out_features;
      const double a = he(s.dense.in_features);
      store.Add(WeightRecord::F32(s.name + "/kernel",
                                  rng.Fill({s.dense.in_features, out}, -a, a)));
    }
    store.Add(WeightRecord::F32(s.name + "/bias", rng.Fill({out}, -0.05, 0.05)));
  }
  return store;
}

ModelGraph BuildReference(ReferenceModel which, std::uint64_t seed) {
  ModelConfig config = ReferenceConfig(which);
  const WeightStore weights = RandomWeights(config, seed);
  return ModelGraph::Build(std::move(config), weights);
}

}  // namespace tinymm
