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

#ifndef TINYMM_ALLOCATOR_H_
#define TINYMM_ALLOCATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinymm/cost_model.h"
#include "tinymm/quantizer.h"

namespace tinymm {

// One precision choice for a layer: its sensitivity, weight size in bits and
// bit operations.
struct BitOption {
  int bits = 8;
  double omega = 0.0;
  std::uint64_t size_bits = 0;
  std::uint64_t bops = 0;
};

struct AllocatorLayer {
  std::string name;
  std::vector<BitOption> options;
};

// Choose one option per layer minimizing total sensitivity subject to the
// optional total-size and total-BOPS budgets.
struct AllocatorProblem {
  std::vector<AllocatorLayer> layers;
  std::optional<std::uint64_t> size_budget_bits;
  std::optional<std::uint64_t> bops_budget;

  // Throws InvalidArgument on empty layers/options, duplicate bit options,
  // or negative / non-finite sensitivities.
  void Validate() const;
  std::uint64_t SearchSpaceSize() const;  // saturates at UINT64_MAX
};

// Builds the problem from analytic costs: size = params * bits and
// bops = macs * bits^2 for every bit option listed in `sensitivity`.
// `fixed_bits` pins a layer to a single option.
AllocatorProblem MakeAllocatorProblem(const CostReport& costs, const SensitivityTable& sensitivity,
                                      std::optional<std::uint64_t> size_budget_bits,
                                      std::optional<std::uint64_t> bops_budget,
                                      const std::map<std::string, int>& fixed_bits = {});

// Exact depth-first branch and bound. Among optimal assignments the one with
// higher precision at the first differing layer wins. Throws Infeasible.
BitAssignment SolveExact(const AllocatorProblem& problem);

// Enumerates every assignment; same contract as SolveExact. Throws
// SearchSpaceTooLarge beyond 2^24 assignments.
BitAssignment SolveBruteForce(const AllocatorProblem& problem);

struct SweepEntry {
  std::uint64_t size_budget_bits = 0;
  std::optional<BitAssignment> assignment;  // empty when infeasible
  std::string error;
};

// Solves once per size budget (ascending), keeping the problem's BOPS budget.
std::vector<SweepEntry> BudgetSweep(const AllocatorProblem& problem,
                                    std::span<const std::uint64_t> size_budgets);

}  // namespace tinymm

#endif  // TINYMM_ALLOCATOR_H_
