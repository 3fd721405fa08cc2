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

#include "doctest.h"
#include "oracles.h"
#include "test_util.h"
#include "tinymm/allocator.h"

namespace tinymm {
namespace {

using testing::CodeOf;

AllocatorLayer Layer(std::string name, std::uint64_t params, std::uint64_t macs, double omega4,
                     double omega8) {
  return {std::move(name),
          {{4, omega4, params * 4, macs * 16}, {8, omega8, params * 8, macs * 64}}};
}

AllocatorProblem TwoLayer(std::optional<std::uint64_t> size_budget) {
  AllocatorProblem p;
  p.layers = {Layer("a", 1000, 0, 0.9, 0.1), Layer("b", 2000, 0, 0.1, 0.02)};
  p.size_budget_bits = size_budget;
  return p;
}

// A problem with Y <= 12 layers, two options each, and budgets drawn so
// that some instances are infeasible and many are tight. Sensitivities are
// drawn from a small set so that ties occur.
AllocatorProblem RandomProblem(oracle::Rng& rng) {
  AllocatorProblem p;
  const int y = rng.Int(1, 12);
  std::uint64_t min_size = 0, max_size = 0, min_bops = 0, max_bops = 0;
  for (int i = 0; i < y; ++i) {
    const std::uint64_t params = rng.Int(1, 5000), macs = rng.Int(1, 100000);
    const bool coarse = rng.Int(0, 2) == 0;
    const double o8 = coarse ? rng.Int(0, 3) * 0.25 : rng.Uniform(0, 1);
    const double o4 = coarse ? o8 + rng.Int(0, 3) * 0.25 : o8 + rng.Uniform(0, 2);
    p.layers.push_back(Layer("l" + std::to_string(i), params, macs, o4, o8));
    min_size += params * 4;
    max_size += params * 8;
    min_bops += macs * 16;
    max_bops += macs * 64;
  }
  const int mode = rng.Int(0, 3);
  auto between = [&](std::uint64_t lo, std::uint64_t hi) {
    return static_cast<std::uint64_t>(rng.Uniform(0.9 * static_cast<double>(lo),
                                                  1.05 * static_cast<double>(hi)));
  };
  if (mode != 1) p.size_budget_bits = between(min_size, max_size);
  if (mode != 0) p.bops_budget = between(min_bops, max_bops);
  return p;
}

bool WithinBudgets(const AllocatorProblem& p, const BitAssignment& a) {
  std::uint64_t size = 0, bops = 0;
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    for (const auto& o : p.layers[i].options) {
      if (o.bits == a.bits[i]) {
        size += o.size_bits;
        bops += o.bops;
      }
    }
  }
  return size == a.size_bits && bops == a.bops &&
         (!p.size_budget_bits || size <= *p.size_budget_bits) &&
         (!p.bops_budget || bops <= *p.bops_budget);
}

TEST_CASE("two-layer example picks (8, 4)") {
  const BitAssignment a = SolveExact(TwoLayer(18000));
  CHECK(a.bits == std::vector<int>{8, 4});
  CHECK(a.objective == doctest::Approx(0.2));
  CHECK(a.size_bits == 16000);
  CHECK(SolveBruteForce(TwoLayer(18000)) == a);
}

TEST_CASE("no budget gives all 8-bit; too small a budget is infeasible") {
  CHECK(SolveExact(TwoLayer(std::nullopt)).bits == std::vector<int>{8, 8});
  CHECK(CodeOf([] { SolveExact(TwoLayer(11999)); }) == ErrorCode::kInfeasible);
  CHECK(CodeOf([] { SolveBruteForce(TwoLayer(11999)); }) == ErrorCode::kInfeasible);
}

TEST_CASE("ties resolve to higher precision from the first layer") {
  AllocatorProblem p;
  p.layers = {Layer("a", 10, 0, 0.5, 0.5), Layer("b", 10, 0, 0.5, 0.5)};
  CHECK(SolveExact(p).bits == std::vector<int>{8, 8});
  p.size_budget_bits = 120;
  CHECK(SolveExact(p).bits == std::vector<int>{8, 4});
  CHECK(SolveBruteForce(p).bits == std::vector<int>{8, 4});
}

TEST_CASE("single layer with one option") {
  AllocatorProblem p;
  p.layers = {{"only", {{4, 0.3, 40, 16}}}};
  p.size_budget_bits = 40;
  CHECK(SolveExact(p).bits == std::vector<int>{4});
}

TEST_CASE("branch and bound agrees with enumeration on random problems") {
  oracle::Rng rng(41);
  int feasible = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const AllocatorProblem p = RandomProblem(rng);
    std::optional<BitAssignment> exact, brute;
    const auto e1 = CodeOf([&] { exact = SolveExact(p); });
    const auto e2 = CodeOf([&] { brute = SolveBruteForce(p); });
    REQUIRE(e1 == e2);
    if (e1) {
      REQUIRE(*e1 == ErrorCode::kInfeasible);
      continue;
    }
    ++feasible;
    REQUIRE(exact->objective == brute->objective);
    REQUIRE(exact->bits == brute->bits);
    REQUIRE(WithinBudgets(p, *exact));
    REQUIRE(SolveExact(p) == *exact);
  }
  CHECK(feasible > 500);
}

TEST_CASE("relaxing the budget never raises the objective") {
  oracle::Rng rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    AllocatorProblem p = RandomProblem(rng);
    p.bops_budget.reset();
    std::uint64_t lo = 0, hi = 0;
    for (const auto& l : p.layers) {
      lo += l.options[0].size_bits;
      hi += l.options[1].size_bits;
    }
    std::vector<std::uint64_t> budgets;
    for (int i = 0; i <= 8; ++i) budgets.push_back(lo + (hi - lo) * i / 8);
    const auto sweep = BudgetSweep(p, budgets);
    REQUIRE(sweep.size() == budgets.size());
    CHECK(sweep.front().assignment->bits == std::vector<int>(p.layers.size(), 4));
    CHECK(sweep.back().assignment->bits == std::vector<int>(p.layers.size(), 8));
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      CHECK(sweep[i].assignment->objective <= sweep[i - 1].assignment->objective);
    }
  }
}

TEST_CASE("sweep on the two-layer example") {
  const std::uint64_t budgets[] = {12000, 16000, 16000, 24000, 1};
  CHECK(CodeOf([&] { BudgetSweep(TwoLayer(std::nullopt), budgets); }) ==
        ErrorCode::kInvalidArgument);
  const auto sweep = BudgetSweep(TwoLayer(std::nullopt), std::span(budgets, 4));
  CHECK(sweep[0].assignment->bits == std::vector<int>{4, 4});
  CHECK(sweep[1].assignment->bits == std::vector<int>{8, 4});
  CHECK(*sweep[2].assignment == *sweep[1].assignment);
  CHECK(sweep[3].assignment->bits == std::vector<int>{8, 8});
  const std::uint64_t tight[] = {100, 12000};
  const auto partial = BudgetSweep(TwoLayer(std::nullopt), tight);
  CHECK_FALSE(partial[0].assignment.has_value());
  CHECK_FALSE(partial[0].error.empty());
  CHECK(partial[1].assignment.has_value());
}

TEST_CASE("brute force refuses huge search spaces; validation catches bad input") {
  AllocatorProblem p;
  for (int i = 0; i < 25; ++i) p.layers.push_back(Layer("l" + std::to_string(i), 1, 1, 1, 0));
  CHECK(p.SearchSpaceSize() == (1u << 25));
  CHECK(CodeOf([&] { SolveBruteForce(p); }) == ErrorCode::kSearchSpaceTooLarge);
  CHECK_NOTHROW(SolveExact(p));
  AllocatorProblem bad = TwoLayer(100000);
  bad.layers[0].options[0].omega = -1;
  CHECK(CodeOf([&] { SolveExact(bad); }) == ErrorCode::kInvalidArgument);
  bad = TwoLayer(100000);
  bad.layers[1].name = "a";
  CHECK(CodeOf([&] { SolveExact(bad); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("problem built from costs and sensitivities") {
  CostReport costs;
  costs.layers = {{"a", 1000, 50, 1}, {"b", 2000, 70, 1}};
  SensitivityTable t;
  t.Add("a", {{4, 0.9}, {8, 0.1}});
  t.Add("b", {{4, 0.1}, {8, 0.02}});
  const AllocatorProblem p = MakeAllocatorProblem(costs, t, 20000, std::nullopt, {{"b", 8}});
  REQUIRE(p.layers[1].options.size() == 1);
  CHECK(p.layers[0].options[1].bops == 50 * 64);
  CHECK(SolveExact(p).bits == std::vector<int>{4, 8});
}

}  // namespace
}  // namespace tinymm
