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

#include "tinymm/allocator.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <set>

#include "tinymm/error.h"

namespace tinymm {

void AllocatorProblem::Validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "allocator problem has no layers");
  std::set<std::string> names;
  for (const auto& layer : layers) {
    if (!names.insert(layer.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate layer '" + layer.name + "'");
    }
    if (layer.options.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "layer '" + layer.name + "' has no bit options");
    }
    std::set<int> bits;
    for (const auto& opt : layer.options) {
      if (!bits.insert(opt.bits).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "layer '" + layer.name + "' lists a bit width twice");
      }
      if (!std::isfinite(opt.omega) || opt.omega < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "layer '" + layer.name + "' has an invalid sensitivity");
      }
    }
  }
}

std::uint64_t AllocatorProblem::SearchSpaceSize() const {
  std::uint64_t total = 1;
  for (const auto& layer : layers) {
    const std::uint64_t n = layer.options.size();
    if (n != 0 && total > std::numeric_limits<std::uint64_t>::max() / n) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    total *= n;
  }
  return total;
}

AllocatorProblem MakeAllocatorProblem(const CostReport& costs, const SensitivityTable& sensitivity,
                                      std::optional<std::uint64_t> size_budget_bits,
                                      std::optional<std::uint64_t> bops_budget,
                                      const std::map<std::string, int>& fixed_bits) {
  AllocatorProblem p;
  p.size_budget_bits = size_budget_bits;
  p.bops_budget = bops_budget;
  for (const auto& cost : costs.layers) {
    std::size_t row = sensitivity.size();
    for (std::size_t i = 0; i < sensitivity.size(); ++i) {
      if (sensitivity.layer(i) == cost.name) row = i;
    }
    if (row == sensitivity.size()) {
      throw Error(ErrorCode::kMissingAssignment, "no sensitivity for layer '" + cost.name + "'");
    }
    AllocatorLayer layer{cost.name, {}};
    const auto fixed = fixed_bits.find(cost.name);
    for (const auto& [bits, omega] : sensitivity.row(row)) {
      if (fixed != fixed_bits.end() && fixed->second != bits) continue;
      const auto b = static_cast<std::uint64_t>(bits);
      layer.options.push_back({bits, omega, cost.params * b, cost.macs * b * b});
    }
    if (layer.options.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "fixed bit width for '" + cost.name + "' has no sensitivity entry");
    }
    p.layers.push_back(std::move(layer));
  }
  p.Validate();
  return p;
}

namespace {

BitAssignment MakeResult(const AllocatorProblem& p, const std::vector<const BitOption*>& chosen,
                         double objective) {
  BitAssignment a;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    a.layers.push_back(p.layers[i].name);
    a.bits.push_back(chosen[i]->bits);
    a.size_bits += chosen[i]->size_bits;
    a.bops += chosen[i]->bops;
  }
  a.objective = objective;
  return a;
}

[[noreturn]] void ThrowInfeasible(const AllocatorProblem& p) {
  std::string msg = "no assignment satisfies";
  if (p.size_budget_bits) msg += " size budget " + std::to_string(*p.size_budget_bits) + " bits";
  if (p.bops_budget) msg += " BOPS budget " + std::to_string(*p.bops_budget);
  throw Error(ErrorCode::kInfeasible, msg);
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const AllocatorProblem& p) : p_(p) {
    const std::size_t n = p.layers.size();
    order_.resize(n);
    suffix_omega_.assign(n + 1, 0.0);
    suffix_size_.assign(n + 1, 0);
    suffix_bops_.assign(n + 1, 0);
    for (std::size_t i = n; i-- > 0;) {
      for (const auto& opt : p.layers[i].options) order_[i].push_back(&opt);
      // Higher precision first realizes the tie-break: later equal leaves never replace.
      std::sort(order_[i].begin(), order_[i].end(),
                [](const BitOption* a, const BitOption* b) { return a->bits > b->bits; });
      double min_omega = std::numeric_limits<double>::infinity();
      std::uint64_t min_size = std::numeric_limits<std::uint64_t>::max();
      std::uint64_t min_bops = std::numeric_limits<std::uint64_t>::max();
      for (const auto* opt : order_[i]) {
        min_omega = std::min(min_omega, opt->omega);
        min_size = std::min(min_size, opt->size_bits);
        min_bops = std::min(min_bops, opt->bops);
      }
      suffix_omega_[i] = suffix_omega_[i + 1] + min_omega;
      suffix_size_[i] = suffix_size_[i + 1] + min_size;
      suffix_bops_[i] = suffix_bops_[i + 1] + min_bops;
    }
    chosen_.resize(n);
  }

  BitAssignment Solve() {
    if ((p_.size_budget_bits && suffix_size_[0] > *p_.size_budget_bits) ||
        (p_.bops_budget && suffix_bops_[0] > *p_.bops_budget)) {
      ThrowInfeasible(p_);
    }
    Search(0, 0.0, 0, 0);
    if (!found_) ThrowInfeasible(p_);
    return MakeResult(p_, best_, best_objective_);
  }

 private:
  void Search(std::size_t i, double objective, std::uint64_t size, std::uint64_t bops) {
    if (i == p_.layers.size()) {
      if (!found_ || objective < best_objective_) {
        found_ = true;
        best_objective_ = objective;
        best_ = chosen_;
      }
      return;
    }
    for (const BitOption* opt : order_[i]) {
      const std::uint64_t s = size + opt->size_bits;
      const std::uint64_t b = bops + opt->bops;
      if (p_.size_budget_bits && s + suffix_size_[i + 1] > *p_.size_budget_bits) continue;
      if (p_.bops_budget && b + suffix_bops_[i + 1] > *p_.bops_budget) continue;
      const double next = objective + opt->omega;
      if (found_) {
        // The relative margin absorbs summation-order rounding in the bound,
        // so pruning never discards a strictly better leaf.
        const double bound = next + suffix_omega_[i + 1];
        if (bound - 1e-12 * std::fabs(bound) > best_objective_) continue;
      }
      chosen_[i] = opt;
      Search(i + 1, next, s, b);
    }
  }

  const AllocatorProblem& p_;
  std::vector<std::vector<const BitOption*>> order_;
  std::vector<double> suffix_omega_;
  std::vector<std::uint64_t> suffix_size_;
  std::vector<std::uint64_t> suffix_bops_;
  std::vector<const BitOption*> chosen_;
  std::vector<const BitOption*> best_;
  double best_objective_ = 0.0;
  bool found_ = false;
};

}  // namespace

BitAssignment SolveExact(const AllocatorProblem& problem) {
  problem.Validate();
  return BranchAndBound(problem).Solve();
}

BitAssignment SolveBruteForce(const AllocatorProblem& problem) {
  problem.Validate();
  constexpr std::uint64_t kMaxAssignments = std::uint64_t{1} << 24;
  const std::uint64_t total = problem.SearchSpaceSize();
  if (total > kMaxAssignments) {
    throw Error(ErrorCode::kSearchSpaceTooLarge,
                "brute force limited to 2^24 assignments, problem has " + std::to_string(total));
  }
  const std::size_t n = problem.layers.size();
  std::vector<std::size_t> digits(n, 0);
  std::vector<const BitOption*> current(n), best;
  double best_objective = 0.0;
  bool found = false;

  for (std::uint64_t k = 0; k < total; ++k) {
    double objective = 0.0;
    std::uint64_t size = 0, bops = 0;
    for (std::size_t i = 0; i < n; ++i) {
      current[i] = &problem.layers[i].options[digits[i]];
      objective += current[i]->omega;
      size += current[i]->size_bits;
      bops += current[i]->bops;
    }
    const bool feasible = (!problem.size_budget_bits || size <= *problem.size_budget_bits) &&
                          (!problem.bops_budget || bops <= *problem.bops_budget);
    if (feasible) {
      bool better = !found || objective < best_objective;
      if (found && objective == best_objective) {
        for (std::size_t i = 0; i < n; ++i) {
          if (current[i]->bits != best[i]->bits) {
            better = current[i]->bits > best[i]->bits;
            break;
          }
        }
      }
      if (better) {
        found = true;
        best_objective = objective;
        best = current;
      }
    }
    for (std::size_t i = n; i-- > 0;) {
      if (++digits[i] < problem.layers[i].options.size()) break;
      digits[i] = 0;
    }
  }
  if (!found) ThrowInfeasible(problem);
  return MakeResult(problem, best, best_objective);
}

std::vector<SweepEntry> BudgetSweep(const AllocatorProblem& problem,
                                    std::span<const std::uint64_t> size_budgets) {
  if (!std::is_sorted(size_budgets.begin(), size_budgets.end())) {
    throw Error(ErrorCode::kInvalidArgument, "sweep budgets must be sorted ascending");
  }
  problem.Validate();
  std::vector<std::future<SweepEntry>> pending;
  for (std::uint64_t budget : size_budgets) {
    pending.push_back(std::async(std::launch::async, [&problem, budget] {
      AllocatorProblem p = problem;
      p.size_budget_bits = budget;
      SweepEntry entry;
      entry.size_budget_bits = budget;
      try {
        entry.assignment = SolveExact(p);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasible) throw;
        entry.error = e.what();
      }
      return entry;
    }));
  }
  std::vector<SweepEntry> out;
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

}  // namespace tinymm
