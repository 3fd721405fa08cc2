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

#include "tinymm/cost_model.h"

#include <iomanip>
#include <sstream>

#include "tinymm/error.h"

namespace tinymm {

BitAssignment BitAssignment::Uniform(std::vector<std::string> layers, int bits) {
  BitAssignment a;
  a.bits.assign(layers.size(), bits);
  a.layers = std::move(layers);
  return a;
}

std::optional<int> BitAssignment::BitsFor(std::string_view layer) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i] == layer) return bits[i];
  }
  return std::nullopt;
}

std::uint64_t CostReport::total_params() const {
  std::uint64_t s = 0;
  for (const auto& l : layers) s += l.params;
  return s;
}

std::uint64_t CostReport::total_macs() const {
  std::uint64_t s = 0;
  for (const auto& l : layers) s += l.macs;
  return s;
}

std::uint64_t CostReport::total_biases() const {
  std::uint64_t s = 0;
  for (const auto& l : layers) s += l.biases;
  return s;
}

LayerCost TraditionalConvCost(std::uint64_t in_channels, std::uint64_t kernel_size,
                              std::uint64_t out_channels, std::uint64_t out_h,
                              std::uint64_t out_w) {
  LayerCost c;
  c.params = in_channels * kernel_size * kernel_size * out_channels;
  c.macs = c.params * out_h * out_w;
  c.biases = out_channels;
  return c;
}

LayerCost DsConvCost(std::uint64_t in_channels, std::uint64_t kernel_size,
                     std::uint64_t out_channels, std::uint64_t out_h, std::uint64_t out_w) {
  const std::uint64_t pixels = out_h * out_w;
  LayerCost c;
  c.params = in_channels * kernel_size * kernel_size + in_channels * out_channels;
  c.macs = in_channels * pixels * kernel_size * kernel_size + in_channels * pixels * out_channels;
  c.biases = out_channels;
  return c;
}

LayerCost DenseCost(std::uint64_t in_features, std::uint64_t out_features) {
  LayerCost c;
  c.params = in_features * out_features;
  c.macs = c.params;
  c.biases = out_features;
  return c;
}

namespace {

int RequireBits(const BitAssignment& assignment, const std::string& layer) {
  const auto bits = assignment.BitsFor(layer);
  if (!bits) throw Error(ErrorCode::kMissingAssignment, "no bit width for layer '" + layer + "'");
  if (*bits < 1) throw Error(ErrorCode::kInvalidArgument, "bit width must be positive");
  return *bits;
}

}  // namespace

std::uint64_t ModelSizeBits(const CostReport& report, const BitAssignment& assignment) {
  std::uint64_t total = 0;
  for (const auto& l : report.layers) {
    total += l.params * static_cast<std::uint64_t>(RequireBits(assignment, l.name));
  }
  return total;
}

std::uint64_t Bops(const CostReport& report, const BitAssignment& assignment) {
  std::uint64_t total = 0;
  for (const auto& l : report.layers) {
    const auto b = static_cast<std::uint64_t>(RequireBits(assignment, l.name));
    total += l.macs * b * b;
  }
  return total;
}

std::string FormatCostTable(const CostReport& report,
                            const std::optional<BitAssignment>& assignment) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "layer" << std::right << std::setw(12) << "params"
     << std::setw(14) << "macs" << std::setw(6) << "bits" << std::setw(14) << "size_bits"
     << std::setw(18) << "bops" << "\n";
  std::uint64_t size = 0, bops = 0;
  for (const auto& l : report.layers) {
    const std::uint64_t b =
        assignment ? static_cast<std::uint64_t>(RequireBits(*assignment, l.name)) : 32;
    size += l.params * b;
    bops += l.macs * b * b;
    os << std::left << std::setw(20) << l.name << std::right << std::setw(12) << l.params
       << std::setw(14) << l.macs << std::setw(6) << b << std::setw(14) << l.params * b
       << std::setw(18) << l.macs * b * b << "\n";
  }
  os << std::left << std::setw(20) << "total" << std::right << std::setw(12)
     << report.total_params() << std::setw(14) << report.total_macs() << std::setw(6) << "-"
     << std::setw(14) << size << std::setw(18) << bops << "\n";
  os << "overhead: " << report.total_biases() << " biases, " << report.overhead_bits()
     << " bits at 32-bit\n";
  return os.str();
}

}  // namespace tinymm
