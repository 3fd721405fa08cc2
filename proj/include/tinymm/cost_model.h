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

#ifndef TINYMM_COST_MODEL_H_
#define TINYMM_COST_MODEL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tinymm {

// Per-layer precision choice. Weights and activations of a layer share the
// same bit width.
struct BitAssignment {
  std::vector<std::string> layers;
  std::vector<int> bits;
  // Filled in by the allocator; zero otherwise.
  double objective = 0.0;
  std::uint64_t size_bits = 0;
  std::uint64_t bops = 0;

  static BitAssignment Uniform(std::vector<std::string> layers, int bits);
  std::optional<int> BitsFor(std::string_view layer) const;
  bool operator==(const BitAssignment&) const = default;
};

// Weight count and multiply-accumulate count of one layer. Biases are kept
// apart because they stay at 32 bits under every assignment.
struct LayerCost {
  std::string name;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  std::uint64_t biases = 0;
};

struct CostReport {
  std::vector<LayerCost> layers;

  std::uint64_t total_params() const;
  std::uint64_t total_macs() const;
  std::uint64_t total_biases() const;
  // Assignment-independent overhead: biases at 32 bits each.
  std::uint64_t overhead_bits() const { return total_biases() * 32; }
};

// params = M * D_k^2 * N, macs = M * D_k^2 * D_p_h * D_p_w * N.
LayerCost TraditionalConvCost(std::uint64_t in_channels, std::uint64_t kernel_size,
                              std::uint64_t out_channels, std::uint64_t out_h,
                              std::uint64_t out_w);

// params = M * D_k^2 + M * N,
// macs = M * D_p_h * D_p_w * D_k^2 + M * D_p_h * D_p_w * N.
LayerCost DsConvCost(std::uint64_t in_channels, std::uint64_t kernel_size,
                     std::uint64_t out_channels, std::uint64_t out_h, std::uint64_t out_w);

// params = macs = K * L.
LayerCost DenseCost(std::uint64_t in_features, std::uint64_t out_features);

// Sum over layers of params_i * bits_i. Throws MissingAssignment when a
// report layer has no entry in `assignment`.
std::uint64_t ModelSizeBits(const CostReport& report, const BitAssignment& assignment);

// Sum over layers of macs_i * bits_i^2.
std::uint64_t Bops(const CostReport& report, const BitAssignment& assignment);

// Fixed-width table: name, params, macs, bits, size_bits, bops, then totals.
// Without an assignment every layer is shown at 32 bits.
std::string FormatCostTable(const CostReport& report,
                            const std::optional<BitAssignment>& assignment = std::nullopt);

}  // namespace tinymm

#endif  // TINYMM_COST_MODEL_H_
