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


#ifndef TINYMM_EXECUTOR_H_
#define TINYMM_EXECUTOR_H_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tinymm/model.h"

namespace tinymm {

// Model inputs in declaration order of the two input layers.
struct InputPair {
  Tensor first;
  Tensor second;
};

struct ExecOptions {
  // Run the two branches on separate threads. Results are bit-identical to
  // sequential execution.
  bool concurrent_branches = false;
};

// Receives every intermediate activation in float mode, keyed by node name.
// A ds-conv also reports its depthwise output under "<name>:depthwise".
// Must be thread-safe when branches run concurrently.
using ActivationObserver = std::function<void(const std::string& key, const Tensor& value)>;

// Float reference forward pass. Throws ShapeMismatch on non-conforming inputs.
Tensor InferFloat(const ModelGraph& graph, const InputPair& inputs, const ExecOptions& options = {},
                  const ActivationObserver& observer = nullptr);

using CalibrationTable = std::map<std::string, CalibrationStats>;

// Min/max of every activation over a float sweep. Throws EmptyCalibrationSet.
CalibrationTable Calibrate(const ModelGraph& graph, std::span<const InputPair> inputs);

// Integer-only execution of a model at a fixed bit assignment.
class QuantizedModel {
 public:
  // Quantizes weights (symmetric), biases (int32 at s_in * s_w) and fixes
  // every activation's affine parameters from `calibration`.
  // Throws MissingAssignment, MissingCalibration, AccumulatorOverflow.
  static QuantizedModel Prepare(const ModelGraph& graph, const BitAssignment& assignment,
                                const CalibrationTable& calibration);

  // Rebuilds a model from a blob written by Export(). Throws MissingWeights,
  // DanglingWeights, ShapeMismatch, ParseError.
  static QuantizedModel FromBlob(ModelConfig config, const WeightStore& blob);

  // Probabilities; the softmax input is the only dequantized tensor.
  Tensor Infer(const InputPair& inputs, const ExecOptions& options = {}) const;

  WeightStore Export() const;

  const ModelConfig& config() const { return *config_; }
  const Topology& topology() const { return *topology_; }
  const BitAssignment& assignment() const { return assignment_; }
  // Quantization of node i's output (not defined for the softmax).
  const QuantParams& activation(int node) const { return acts_.at(static_cast<std::size_t>(node)); }

 private:
  struct Layer {
    QuantTensor kernel;  // conv / dense
    QuantTensor depthwise;
    QuantTensor pointwise;
    std::vector<std::int32_t> bias;
    QuantParams mid;  // ds-conv intermediate
    // Set when the producer upstream runs at another precision: the input
    // is requantized to these parameters first.
    std::optional<QuantParams> in;
  };

  void CheckAccumulators() const;
  QuantTensor RunBranch(int branch, const Tensor& input) const;
  QuantTensor RunNode(int node, const std::vector<const QuantTensor*>& in) const;

  std::shared_ptr<const ModelConfig> config_;
  std::shared_ptr<const Topology> topology_;
  BitAssignment assignment_;
  std::vector<Layer> layers_;    // by node index; empty for unweighted nodes
  std::vector<QuantParams> acts_;  // by node index
};

struct FloatMode {};
using InferMode = std::variant<FloatMode, BitAssignment>;

// One-shot inference. Quantized mode needs `calibration` (MissingCalibration
// otherwise) and prepares the integer model on every call.
Tensor Infer(const ModelGraph& graph, const InputPair& inputs, const InferMode& mode,
             const CalibrationTable* calibration = nullptr, const ExecOptions& options = {});

// Deterministic synthetic raw inputs (tones plus noise, or a textured image)
// run through each input layer's preprocessing.
InputPair SynthesizeInputs(const Topology& topology, std::uint64_t seed);
// Uniform [-1, 1) tensors of the input layers' shapes, for benchmarking.
InputPair RandomInputs(const Topology& topology, std::uint64_t seed);
AudioClip SynthesizeClip(int sample_rate, double seconds, std::uint64_t seed);
RgbImage SynthesizeImage(int height, int width, std::uint64_t seed);

}  // namespace tinymm

#endif  // TINYMM_EXECUTOR_H_
