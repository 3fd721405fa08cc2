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


#include "tinymm/formats.h"

#include <fstream>
#include <sstream>

#include "tinymm/error.h"

namespace tinymm {

using nlohmann::json;

namespace {

[[noreturn]] void Fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

void ExpectFormat(const json& doc, std::string_view format) {
  if (!doc.is_object() || doc.value("format", std::string()) != format) {
    Fail("expected a '" + std::string(format) + "' document");
  }
}

template <typename F>
auto Guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    Fail(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

json AssignmentToJson(const BitAssignment& a, std::string_view model) {
  json layers = json::array();
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    layers.push_back({{"name", a.layers[i]}, {"bits", a.bits[i]}});
  }
  return {{"format", std::string(kAssignmentFormat)},
          {"model", std::string(model)},
          {"layers", layers},
          {"objective", a.objective},
          {"size_bits", a.size_bits},
          {"bops", a.bops}};
}

BitAssignment AssignmentFromJson(const json& doc) {
  ExpectFormat(doc, kAssignmentFormat);
  return Guarded([&] {
    BitAssignment a;
    for (const json& l : doc.at("layers")) {
      a.layers.push_back(l.at("name").get<std::string>());
      a.bits.push_back(l.at("bits").get<int>());
    }
    a.objective = doc.value("objective", 0.0);
    a.size_bits = doc.value("size_bits", std::uint64_t{0});
    a.bops = doc.value("bops", std::uint64_t{0});
    return a;
  });
}

json SweepToJson(std::span<const SweepEntry> entries, std::string_view model) {
  json out = json::array();
  for (const SweepEntry& e : entries) {
    json j = {{"size_budget_bits", e.size_budget_bits}, {"feasible", e.assignment.has_value()}};
    if (e.assignment) {
      j["assignment"] = AssignmentToJson(*e.assignment, model);
    } else {
      j["error"] = e.error;
    }
    out.push_back(std::move(j));
  }
  return {{"format", std::string(kSweepFormat)}, {"model", std::string(model)}, {"entries", out}};
}

json ProblemToJson(const AllocatorProblem& p, const CostReport& costs) {
  json layers = json::array();
  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    json omega = json::object();
    std::vector<int> bits;
    for (const BitOption& o : p.layers[i].options) {
      omega[std::to_string(o.bits)] = o.omega;
      bits.push_back(o.bits);
    }
    layers.push_back({{"name", p.layers[i].name},
                      {"params", costs.layers.at(i).params},
                      {"macs", costs.layers.at(i).macs},
                      {"bits", bits},
                      {"omega", omega}});
  }
  json doc = {{"format", std::string(kProblemFormat)}, {"layers", layers}};
  if (p.size_budget_bits) doc["size_budget_bits"] = *p.size_budget_bits;
  if (p.bops_budget) doc["bops_budget"] = *p.bops_budget;
  return doc;
}

AllocatorProblem ProblemFromJson(const json& doc) {
  ExpectFormat(doc, kProblemFormat);
  AllocatorProblem p = Guarded([&] {
    AllocatorProblem p;
    for (const json& l : doc.at("layers")) {
      AllocatorLayer layer;
      layer.name = l.at("name").get<std::string>();
      const auto params = l.at("params").get<std::uint64_t>();
      const auto macs = l.at("macs").get<std::uint64_t>();
      const json& omega = l.at("omega");
      const std::vector<int> bits = l.value("bits", std::vector<int>{8, 4});
      for (int b : bits) {
        const std::string key = std::to_string(b);
        if (!omega.contains(key)) Fail("layer '" + layer.name + "' has no omega for " + key + " bits");
        const auto ub = static_cast<std::uint64_t>(b);
        layer.options.push_back({b, omega.at(key).get<double>(), params * ub, macs * ub * ub});
      }
      p.layers.push_back(std::move(layer));
    }
    if (doc.contains("size_budget_bits")) p.size_budget_bits = doc.at("size_budget_bits").get<std::uint64_t>();
    if (doc.contains("bops_budget")) p.bops_budget = doc.at("bops_budget").get<std::uint64_t>();
    return p;
  });
  try {
    p.Validate();
  } catch (const Error& e) {
    Fail(e.what());
  }
  return p;
}

json CostReportToJson(const CostReport& report, const Topology& topology, std::string_view model) {
  json layers = json::array();
  for (const LayerCost& c : report.layers) {
    const Node& n = topology.node(topology.Find(c.name));
    layers.push_back({{"name", c.name},
                      {"kind", std::string(LayerKindName(n.spec.kind))},
                      {"output_shape", n.output_shape},
                      {"params", c.params},
                      {"macs", c.macs},
                      {"biases", c.biases}});
  }
  json shapes = json::array();
  for (const Node& n : topology.nodes()) {
    shapes.push_back({{"name", n.spec.name}, {"shape", n.output_shape}});
  }
  return {{"format", std::string(kInspectFormat)},
          {"model", std::string(model)},
          {"layers", layers},
          {"shapes", shapes},
          {"total_params", report.total_params()},
          {"total_macs", report.total_macs()},
          {"overhead_bits", report.overhead_bits()}};
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    Fail(path.string() + " is not valid JSON: " + e.what());
  }
}

void WriteJsonFile(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

}  // namespace tinymm
