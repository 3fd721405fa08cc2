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


#ifndef TINYMM_FORMATS_H_
#define TINYMM_FORMATS_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tinymm/allocator.h"
#include "tinymm/cost_model.h"
#include "tinymm/model.h"

// Machine-readable documents exchanged between CLI commands. All are JSON,
// like the model config, and carry a "format" tag.
namespace tinymm {

inline constexpr std::string_view kAssignmentFormat = "tinymm-assignment-v1";
inline constexpr std::string_view kSweepFormat = "tinymm-sweep-v1";
inline constexpr std::string_view kProblemFormat = "tinymm-alloc-problem-v1";
inline constexpr std::string_view kInspectFormat = "tinymm-inspect-v1";
inline constexpr std::string_view kInferFormat = "tinymm-infer-v1";
inline constexpr std::string_view kBenchFormat = "tinymm-bench-v1";

nlohmann::json AssignmentToJson(const BitAssignment& a, std::string_view model);
// Throws ParseError.
BitAssignment AssignmentFromJson(const nlohmann::json& doc);

nlohmann::json SweepToJson(std::span<const SweepEntry> entries, std::string_view model);

// Layers carry name, params, macs and omega {"4": .., "8": ..}; sizes and
// BOPS follow from params * bits and macs * bits^2.
nlohmann::json ProblemToJson(const AllocatorProblem& p, const CostReport& costs);
AllocatorProblem ProblemFromJson(const nlohmann::json& doc);

nlohmann::json CostReportToJson(const CostReport& report, const Topology& topology,
                                std::string_view model);

// Throws IoError / ParseError.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace tinymm

#endif  // TINYMM_FORMATS_H_
