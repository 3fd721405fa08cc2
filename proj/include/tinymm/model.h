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

#ifndef TINYMM_MODEL_H_
#define TINYMM_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tinymm/audio.h"
#include "tinymm/cost_model.h"
#include "tinymm/image.h"
#include "tinymm/kernels.h"
#include "tinymm/quantizer.h"
#include "tinymm/tensor.h"
#include "tinymm/weights_io.h"

namespace tinymm {

inline constexpr std::string_view kModelFormat = "tinymm-model-v1";
inline constexpr std::uint64_t kDefaultSeed = 20220101;
inline constexpr double kBatchNormEpsilon = 1e-3;

enum class LayerKind {
  kInput,
  kConv2d,
  kDsConv2d,
  kMaxPool,
  kDense,
  kRelu,
  kSoftmax,
  kFlatten,
  kDropout,
  kBatchNorm,
  kConcat,
};

std::string_view LayerKindName(LayerKind kind);
bool IsWeighted(LayerKind kind);

struct AudioPreprocess {
  MfccConfig mfcc;
  double clip_seconds = 1.0;
  bool operator==(const AudioPreprocess&) const = default;
};

struct ImagePreprocess {
  int height = 32;
  int width = 32;
  bool operator==(const ImagePreprocess&) const = default;
};

// One row of the model description. Channel / feature counts on the input
// side are filled in by shape inference.
struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::kInput;
  std::vector<std::string> inputs;

  Shape input_shape;                         // kInput
  std::optional<AudioPreprocess> audio;      // kInput
  std::optional<ImagePreprocess> image;      // kInput
  ConvSpec conv;                             // kConv2d, kDsConv2d
  DenseSpec dense;                           // kDense
  PoolSpec pool;                             // kMaxPool
  double dropout_rate = 0.0;                 // kDropout, identity at inference
  double epsilon = kBatchNormEpsilon;        // kBatchNorm

  // Weighted layers: fixed precision, or empty to let the allocator decide.
  std::optional<int> fixed_bits;
  std::optional<double> hessian_trace;
  std::map<int, double> omega_override;
};

struct ModelConfig {
  std::string name;
  std::vector<LayerSpec> layers;
};

// Throws ParseError on schema violations.
ModelConfig ParseModelConfig(const nlohmann::json& doc);
ModelConfig ParseModelConfigText(std::string_view text);
ModelConfig LoadModelConfig(const std::filesystem::path& path);
nlohmann::json ModelConfigToJson(const ModelConfig& config);

// An executable layer after shape inference and batch-norm removal.
struct Node {
  LayerSpec spec;
  std::vector<int> inputs;  // node indices
  Shape output_shape;
  // Original layers folded into this node (batch norms), for diagnostics.
  std::vector<std::string> folded;
};

// Validated two-branch structure: two input chains that meet at the single
// concat node, then a head chain ending in the single softmax.
class Topology {
 public:
  // Throws ParseError / ShapeMismatch / KernelTooLarge / InputTooSmall.
  static Topology Resolve(const ModelConfig& config);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  int Find(std::string_view name) const;  // -1 when absent

  // Node indices of input i's chain (input first, concat excluded).
  const std::vector<int>& branch(int i) const { return branches_[static_cast<std::size_t>(i)]; }
  // concat through softmax.
  const std::vector<int>& head() const { return head_; }
  int input_node(int i) const { return branches_[static_cast<std::size_t>(i)].front(); }
  int num_classes() const;

  // Weighted layers in execution order.
  std::vector<int> WeightedNodes() const;
  std::vector<std::string> WeightedLayerNames() const;
  CostReport Costs() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<int>> branches_;
  std::vector<int> head_;
};

// Float weights of one weighted node (batch norm already folded in).
struct NodeWeights {
  Tensor kernel;     // conv (D_k,D_k,M,N) or dense (K,L)
  Tensor depthwise;  // ds-conv (D_k,D_k,M)
  Tensor pointwise;  // ds-conv (1,1,M,N)
  Tensor bias;
};

class ModelGraph {
 public:
  // Validates `weights` against the config and folds batch norms:
  //   w' = w * g / sqrt(var + eps),  b' = (b - mean) * g / sqrt(var + eps) + beta.
  // Throws ShapeMismatch, MissingWeights, DanglingWeights.
  static ModelGraph Build(ModelConfig config, const WeightStore& weights);

  const ModelConfig& config() const { return *config_; }
  const Topology& topology() const { return *topology_; }
  const NodeWeights& weights(int node) const { return weights_.at(static_cast<std::size_t>(node)); }
  int num_classes() const { return topology_->num_classes(); }
  CostReport Costs() const { return topology_->Costs(); }

  // The unfolded weights as loaded, for saving the model back out.
  const WeightStore& source_weights() const { return *source_; }

  // Per-layer Omega(bits) for bits in `options`: the configured override if
  // present, else the summed quantization perturbation of the layer's
  // tensors times the configured Hessian trace (1 when absent).
  SensitivityTable Sensitivities(const std::vector<int>& options = {4, 8}) const;

 private:
  std::shared_ptr<const ModelConfig> config_;
  std::shared_ptr<const Topology> topology_;
  std::shared_ptr<const WeightStore> source_;
  std::vector<NodeWeights> weights_;
};

// Reads the JSON config and a float weight blob.
ModelGraph LoadModel(const std::filesystem::path& config_path,
                     const std::filesystem::path& weights_path);

// Blob written by the quantizer rather than a float checkpoint.
bool IsQuantizedBlob(const WeightStore& weights);

enum class ReferenceModel { kCovid, kBattlefield };
std::optional<ReferenceModel> ParseReferenceModel(std::string_view name);

// Built-in two-branch architectures (cough + speech audio, or audio + image).
ModelConfig ReferenceConfig(ReferenceModel which);

// Deterministic random float weights for every weighted and batch-norm layer.
WeightStore RandomWeights(const ModelConfig& config, std::uint64_t seed);

ModelGraph BuildReference(ReferenceModel which, std::uint64_t seed = kDefaultSeed);

// Raw input -> model input tensor for one input layer.
Tensor PreprocessAudio(const LayerSpec& input, const AudioClip& clip);
Tensor PreprocessImageInput(const LayerSpec& input, const RgbImage& image);

}  // namespace tinymm

#endif  // TINYMM_MODEL_H_
