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


#include "tinymm/cli.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <optional>

#include "CLI11.hpp"
#include "tinymm/error.h"
#include "tinymm/executor.h"
#include "tinymm/formats.h"

namespace tinymm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kCalibrationSamples = 8;

// Carries the exit code chosen by the failing stage.
struct CliFailure {
  int code;
  std::string message;
};

// Runs `f`, converting library errors into a CliFailure with `code`.
template <typename F>
auto Stage(int code, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw CliFailure{code, e.what()};
  } catch (const fs::filesystem_error& e) {
    throw CliFailure{code, e.what()};
  }
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct LoadedModel {
  std::string name;
  ModelConfig config;
  std::optional<ModelGraph> graph;
  std::optional<QuantizedModel> quantized;

  const Topology& topology() const { return graph ? graph->topology() : quantized->topology(); }
};

ModelConfig ResolveConfig(const std::string& model) {
  if (fs::exists(model)) return LoadModelConfig(model);
  if (const auto ref = ParseReferenceModel(model)) return ReferenceConfig(*ref);
  throw Error(ErrorCode::kIoError, "cannot open model '" + model +
                                       "' (not a file and not a built-in: covid, battlefield)");
}

// Without --weights the model gets deterministic random weights from `seed`.
LoadedModel LoadFor(const std::string& model, const std::string& weights, std::uint64_t seed) {
  return Stage(kExitLoad, [&] {
    LoadedModel m;
    m.config = ResolveConfig(model);
    m.name = m.config.name;
    if (weights.empty()) {
      const WeightStore store = RandomWeights(m.config, seed);
      m.graph = ModelGraph::Build(m.config, store);
      return m;
    }
    const WeightStore store = WeightStore::Load(weights);
    if (IsQuantizedBlob(store)) {
      m.quantized = QuantizedModel::FromBlob(m.config, store);
    } else {
      m.graph = ModelGraph::Build(m.config, store);
    }
    return m;
  });
}

const ModelGraph& NeedFloat(const LoadedModel& m, const char* command) {
  if (!m.graph) {
    throw CliFailure{kExitLoad, std::string(command) + " needs float weights, not a quantized blob"};
  }
  return *m.graph;
}

BitAssignment LoadAssignment(const std::string& path) {
  return Stage(kExitLoad, [&] { return AssignmentFromJson(ReadJsonFile(path)); });
}

// Files named <sample>.<input-layer>.wav or .ppm; every sample needs both inputs.
std::vector<InputPair> LoadCalibrationDir(const std::string& dir, const Topology& t) {
  return Stage(kExitCalibration, [&] {
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kIoError, "calibration directory '" + dir + "' does not exist");
    }
    const std::string names[2] = {t.node(t.input_node(0)).spec.name, t.node(t.input_node(1)).spec.name};
    std::map<std::string, std::map<int, fs::path>> samples;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const fs::path& p = entry.path();
      const std::string stem = p.stem().string();
      const auto dot = stem.rfind('.');
      if (dot == std::string::npos) continue;
      const std::string input = stem.substr(dot + 1);
      const int slot = input == names[0] ? 0 : input == names[1] ? 1 : -1;
      if (slot < 0) continue;
      samples[stem.substr(0, dot)][slot] = p;
    }
    std::vector<InputPair> pairs;
    for (const auto& [sample, files] : samples) {
      if (files.size() != 2) {
        throw Error(ErrorCode::kMissingCalibration,
                    "calibration sample '" + sample + "' lacks one of its two inputs");
      }
      Tensor tensors[2];
      for (int b = 0; b < 2; ++b) {
        const LayerSpec& s = t.node(t.input_node(b)).spec;
        const fs::path& p = files.at(b);
        tensors[b] = s.image ? PreprocessImageInput(s, LoadPpm(p)) : PreprocessAudio(s, LoadWav(p));
      }
      pairs.push_back({std::move(tensors[0]), std::move(tensors[1])});
    }
    if (pairs.empty()) {
      throw Error(ErrorCode::kEmptyCalibrationSet,
                  "no <sample>.<" + names[0] + "|" + names[1] + ">.wav/.ppm files in '" + dir + "'");
    }
    return pairs;
  });
}

std::vector<InputPair> CalibrationSet(const std::string& dir, const Topology& t, std::uint64_t seed,
                                      bool random_tensors) {
  if (!dir.empty()) return LoadCalibrationDir(dir, t);
  return Stage(kExitCalibration, [&] {
    std::vector<InputPair> pairs;
    for (int i = 0; i < kCalibrationSamples; ++i) {
      const std::uint64_t s = seed + 1000 + static_cast<std::uint64_t>(i);
      pairs.push_back(random_tensors ? RandomInputs(t, s) : SynthesizeInputs(t, s));
    }
    return pairs;
  });
}

QuantizedModel PrepareQuantized(const ModelGraph& graph, const BitAssignment& assignment,
                                const std::vector<InputPair>& calibration) {
  const CalibrationTable table = Stage(kExitCalibration, [&] { return Calibrate(graph, calibration); });
  try {
    return QuantizedModel::Prepare(graph, assignment, table);
  } catch (const Error& e) {
    const int code = e.code() == ErrorCode::kMissingCalibration ? kExitCalibration : kExitLoad;
    throw CliFailure{code, e.what()};
  }
}

void PrintAssignment(std::ostream& out, const BitAssignment& a) {
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    out << "  " << a.layers[i] << ": " << a.bits[i] << "\n";
  }
  out << "objective " << Num(a.objective) << ", size " << a.size_bits << " bits, bops " << a.bops
      << "\n";
}

// --- subcommands -----------------------------------------------------------

struct Common {
  std::string model;
  std::string weights;
  std::string out;
  std::uint64_t seed = kDefaultSeed;
};

void AddCommon(CLI::App* cmd, Common& c, bool model_required = true) {
  auto* m = cmd->add_option("model", c.model, "model config path or built-in name (covid, battlefield)");
  if (model_required) m->required();
  cmd->add_option("--weights", c.weights, "weight blob (float or quantized); default: seeded random");
  cmd->add_option("--seed", c.seed, "seed for random weights and synthesized inputs");
}

int Inspect(const Common& c, const std::string& assignment_path, std::ostream& out) {
  const ModelConfig config = Stage(kExitLoad, [&] { return ResolveConfig(c.model); });
  const Topology t = Stage(kExitLoad, [&] { return Topology::Resolve(config); });
  std::optional<BitAssignment> assignment;
  if (!assignment_path.empty()) assignment = LoadAssignment(assignment_path);
  const CostReport report = t.Costs();
  out << "model " << config.name << "\n";
  for (const Node& n : t.nodes()) {
    out << "  " << n.spec.name << " (" << LayerKindName(n.spec.kind) << ") -> "
        << ShapeToString(n.output_shape) << "\n";
  }
  out << Stage(kExitLoad, [&] { return FormatCostTable(report, assignment); });
  if (!c.out.empty()) {
    Stage(kExitLoad, [&] { WriteJsonFile(c.out, CostReportToJson(report, t, config.name)); });
  }
  return kExitOk;
}

struct AllocateArgs {
  std::string problem;
  std::string write_problem;
  std::optional<std::uint64_t> size_budget;
  std::optional<std::uint64_t> bops_budget;
  std::vector<std::uint64_t> sweep;
};

int Allocate(const Common& c, const AllocateArgs& a, std::ostream& out, std::ostream& err) {
  AllocatorProblem problem;
  std::string name = "problem";
  CostReport costs;
  if (!a.problem.empty()) {
    problem = Stage(kExitLoad, [&] { return ProblemFromJson(ReadJsonFile(a.problem)); });
    if (a.size_budget) problem.size_budget_bits = a.size_budget;
    if (a.bops_budget) problem.bops_budget = a.bops_budget;
  } else {
    if (c.model.empty()) throw CliFailure{kExitUsage, "allocate needs a model or --problem"};
    const LoadedModel m = LoadFor(c.model, c.weights, c.seed);
    const ModelGraph& g = NeedFloat(m, "allocate");
    name = m.name;
    costs = g.Costs();
    std::map<std::string, int> fixed;
    for (int i : g.topology().WeightedNodes()) {
      const LayerSpec& s = g.topology().node(i).spec;
      if (s.fixed_bits) fixed[s.name] = *s.fixed_bits;
    }
    problem = Stage(kExitLoad, [&] {
      return MakeAllocatorProblem(costs, g.Sensitivities(), a.size_budget, a.bops_budget, fixed);
    });
    if (!a.write_problem.empty()) {
      Stage(kExitLoad, [&] { WriteJsonFile(a.write_problem, ProblemToJson(problem, costs)); });
    }
  }

  if (!a.sweep.empty()) {
    const auto entries = Stage(kExitUsage, [&] { return BudgetSweep(problem, a.sweep); });
    bool any = false;
    for (const SweepEntry& e : entries) {
      out << "budget " << e.size_budget_bits << ": ";
      if (e.assignment) {
        any = true;
        out << "objective " << Num(e.assignment->objective) << ", size " << e.assignment->size_bits
            << ", bits";
        for (int b : e.assignment->bits) out << " " << b;
        out << "\n";
      } else {
        out << "infeasible\n";
      }
    }
    if (!c.out.empty()) Stage(kExitLoad, [&] { WriteJsonFile(c.out, SweepToJson(entries, name)); });
    if (!any) {
      err << "error: no budget in the sweep is feasible\n";
      return kExitInfeasible;
    }
    return kExitOk;
  }

  BitAssignment result;
  try {
    result = SolveExact(problem);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInfeasible) throw CliFailure{kExitInfeasible, e.what()};
    throw CliFailure{kExitLoad, e.what()};
  }
  out << "assignment for " << name << ":\n";
  PrintAssignment(out, result);
  if (!c.out.empty()) Stage(kExitLoad, [&] { WriteJsonFile(c.out, AssignmentToJson(result, name)); });
  return kExitOk;
}

int Quantize(const Common& c, const std::string& assignment_path, const std::string& calib_dir,
             std::ostream& out) {
  if (c.out.empty()) throw CliFailure{kExitUsage, "quantize needs --out"};
  const LoadedModel m = LoadFor(c.model, c.weights, c.seed);
  const ModelGraph& g = NeedFloat(m, "quantize");
  const BitAssignment assignment = LoadAssignment(assignment_path);
  const auto calibration = CalibrationSet(calib_dir, g.topology(), c.seed, false);
  const QuantizedModel qm = PrepareQuantized(g, assignment, calibration);
  const WeightStore blob = qm.Export();
  Stage(kExitLoad, [&] { blob.Save(c.out); });

  std::uint64_t float_bytes = 0, quant_bytes = 0;
  for (const WeightRecord& r : blob.records()) {
    if (r.dtype == DType::kI8 || r.dtype == DType::kI4) {
      quant_bytes += r.PayloadBytes();
      float_bytes += 4 * NumElements(r.shape);
    }
  }
  BitAssignment summary = qm.assignment();
  summary.objective = assignment.objective;
  summary.size_bits = ModelSizeBits(g.Costs(), summary);
  summary.bops = Bops(g.Costs(), summary);
  out << "quantized " << m.name << " with " << calibration.size() << " calibration samples\n";
  PrintAssignment(out, summary);
  out << "weight payload " << quant_bytes << " bytes (float32: " << float_bytes << " bytes, ratio "
      << Num(static_cast<double>(quant_bytes) / static_cast<double>(float_bytes)) << ")\n";
  out << "wrote " << c.out << "\n";
  return kExitOk;
}

struct InferArgs {
  std::string audio;
  std::string audio2;
  std::string image;
  std::string quantized;
  std::string calibration_dir;
  bool synthesize = false;
  bool concurrent = false;
};

InputPair GatherInputs(const Topology& t, const InferArgs& a, std::uint64_t seed) {
  return Stage(kExitInput, [&] {
    std::vector<std::string> audio;
    if (!a.audio.empty()) audio.push_back(a.audio);
    if (!a.audio2.empty()) audio.push_back(a.audio2);
    std::size_t next_audio = 0;
    bool image_used = false;
    const InputPair synth = a.synthesize ? SynthesizeInputs(t, seed) : InputPair{};
    Tensor tensors[2];
    for (int b = 0; b < 2; ++b) {
      const LayerSpec& s = t.node(t.input_node(b)).spec;
      if (s.image && !a.image.empty()) {
        tensors[b] = PreprocessImageInput(s, LoadPpm(a.image));
        image_used = true;
      } else if (s.audio && next_audio < audio.size()) {
        tensors[b] = PreprocessAudio(s, LoadWav(audio[next_audio++]));
      } else if (a.synthesize) {
        tensors[b] = b == 0 ? synth.first : synth.second;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "input '" + s.name + "' needs " + (s.image ? "--image" : "--audio/--audio2") +
                        " (or --synthesize)");
      }
    }
    if (next_audio < audio.size() || (!a.image.empty() && !image_used)) {
      throw Error(ErrorCode::kInvalidArgument, "more inputs given than the model declares");
    }
    return InputPair{std::move(tensors[0]), std::move(tensors[1])};
  });
}

int InferCmd(const Common& c, const InferArgs& a, std::ostream& out) {
  const LoadedModel m = LoadFor(c.model, c.weights, c.seed);
  const InputPair inputs = GatherInputs(m.topology(), a, c.seed);
  const ExecOptions options{a.concurrent};
  Tensor probs;
  std::string mode = "float32";
  if (m.quantized) {
    mode = "quantized";
    probs = Stage(kExitInput, [&] { return m.quantized->Infer(inputs, options); });
  } else if (!a.quantized.empty()) {
    mode = "quantized";
    const BitAssignment assignment = LoadAssignment(a.quantized);
    const auto calibration = CalibrationSet(a.calibration_dir, m.graph->topology(), c.seed, false);
    const QuantizedModel qm = PrepareQuantized(*m.graph, assignment, calibration);
    probs = Stage(kExitInput, [&] { return qm.Infer(inputs, options); });
  } else {
    probs = Stage(kExitInput, [&] { return InferFloat(*m.graph, inputs, options); });
  }
  const auto p = probs.data();
  const auto label = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  out << "label: " << label << "\n" << "probabilities:";
  for (float v : p) out << " " << Num(v);
  out << "\n";
  if (!c.out.empty()) {
    const json doc = {{"format", std::string(kInferFormat)}, {"model", m.name}, {"mode", mode},
                      {"label", label}, {"probabilities", std::vector<float>(p.begin(), p.end())}};
    Stage(kExitLoad, [&] { WriteJsonFile(c.out, doc); });
  }
  return kExitOk;
}

struct BenchArgs {
  int reps = 10;
  int warmup = 1;
  std::string quantized;
  bool concurrent = false;
};

int Bench(const Common& c, const BenchArgs& a, std::ostream& out) {
  const LoadedModel m = LoadFor(c.model, c.weights, c.seed);
  const InputPair inputs = Stage(kExitInput, [&] { return RandomInputs(m.topology(), c.seed); });
  const ExecOptions options{a.concurrent};
  std::optional<QuantizedModel> qm = m.quantized;
  if (!qm && !a.quantized.empty()) {
    const auto calibration = CalibrationSet("", m.graph->topology(), c.seed, true);
    qm = PrepareQuantized(*m.graph, LoadAssignment(a.quantized), calibration);
  }
  auto run = [&] { return qm ? qm->Infer(inputs, options) : InferFloat(*m.graph, inputs, options); };

  std::vector<double> ms;
  Stage(kExitInput, [&] {
    for (int i = 0; i < a.warmup; ++i) run();
    for (int i = 0; i < a.reps; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const Tensor probs = run();
      const auto t1 = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return 0;
  });
  std::vector<double> sorted = ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const double mean = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(n);
  const std::string mode = qm ? "quantized" : "float32";

  out << "bench " << m.name << " (" << mode << ", batch size 1, " << n << " reps)\n"
      << "  min " << sorted.front() << " ms, median " << median << " ms, mean " << mean
      << " ms, max " << sorted.back() << " ms\n";
  if (!c.out.empty()) {
    json doc = {{"format", std::string(kBenchFormat)},
                {"model", m.name},
                {"mode", mode},
                {"batch_size", 1},
                {"reps", n},
                {"unit", "ms"},
                {"min_ms", sorted.front()},
                {"median_ms", median},
                {"mean_ms", mean},
                {"max_ms", sorted.back()},
                {"timings_ms", ms}};
    if (qm) doc["assignment"] = AssignmentToJson(qm->assignment(), m.name);
    Stage(kExitLoad, [&] { WriteJsonFile(c.out, doc); });
  }
  return kExitOk;
}

int Synth(const Common& c, const std::string& dir, int count, std::ostream& out) {
  const ModelConfig config = Stage(kExitLoad, [&] { return ResolveConfig(c.model); });
  const Topology t = Stage(kExitLoad, [&] { return Topology::Resolve(config); });
  Stage(kExitLoad, [&] {
    fs::create_directories(dir);
    for (int i = 0; i < count; ++i) {
      char sample[32];
      std::snprintf(sample, sizeof(sample), "sample%03d", i);
      for (int b = 0; b < 2; ++b) {
        const LayerSpec& s = t.node(t.input_node(b)).spec;
        const std::uint64_t seed = c.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(2 * i + b);
        const fs::path base = fs::path(dir) / (std::string(sample) + "." + s.name);
        if (s.audio) {
          fs::path p = base;
          p += ".wav";
          WriteWav(p, SynthesizeClip(s.audio->mfcc.sample_rate, s.audio->clip_seconds, seed));
          out << p.string() << "\n";
        } else if (s.image) {
          fs::path p = base;
          p += ".ppm";
          WritePpm(p, SynthesizeImage(s.image->height, s.image->width, seed));
          out << p.string() << "\n";
        } else {
          throw Error(ErrorCode::kInvalidArgument, "input '" + s.name + "' has no raw format");
        }
      }
    }
    return 0;
  });
  return kExitOk;
}

int Export(const Common& c, const std::string& config_out, const std::string& weights_out,
           std::ostream& out) {
  const ModelConfig config = Stage(kExitLoad, [&] { return ResolveConfig(c.model); });
  Stage(kExitLoad, [&] {
    if (!config_out.empty()) {
      WriteJsonFile(config_out, ModelConfigToJson(config));
      out << "wrote " << config_out << "\n";
    }
    if (!weights_out.empty()) {
      RandomWeights(config, c.seed).Save(weights_out);
      out << "wrote " << weights_out << "\n";
    }
    return 0;
  });
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"tinymm: multimodal quantized inference and mixed-precision toolkit", "tinymm"};
  app.require_subcommand(1);
  Common common;

  auto* inspect = app.add_subcommand("inspect", "per-layer shapes, parameters and MACs");
  AddCommon(inspect, common);
  std::string inspect_assignment;
  inspect->add_option("--assignment", inspect_assignment, "show sizes under this bit assignment");
  inspect->add_option("--out", common.out, "write the report as JSON");

  auto* allocate = app.add_subcommand("allocate", "optimal 4/8-bit assignment under budgets");
  AddCommon(allocate, common, false);
  AllocateArgs alloc;
  allocate->add_option("--problem", alloc.problem, "allocator problem JSON instead of a model");
  allocate->add_option("--size-budget", alloc.size_budget, "weight size budget in bits")
      ->check(CLI::PositiveNumber);
  allocate->add_option("--bops-budget", alloc.bops_budget, "BOPS budget")->check(CLI::PositiveNumber);
  allocate->add_option("--sweep", alloc.sweep, "ascending size budgets (bits), comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  allocate->add_option("--write-problem", alloc.write_problem, "save the allocator problem JSON");
  allocate->add_option("--out", common.out, "write the assignment (or sweep) JSON");

  auto* quantize = app.add_subcommand("quantize", "write an integer weight blob");
  AddCommon(quantize, common);
  std::string q_assignment, q_calib;
  quantize->add_option("--assignment", q_assignment, "assignment JSON from allocate")->required();
  quantize->add_option("--calibration-dir", q_calib,
                       "<sample>.<input>.wav|.ppm files; default: seeded synthetic set");
  quantize->add_option("--out", common.out, "quantized blob path")->required();

  auto* infer = app.add_subcommand("infer", "class probabilities for one input pair");
  AddCommon(infer, common);
  InferArgs ia;
  infer->add_option("--audio", ia.audio, "WAV for the first audio input");
  infer->add_option("--audio2", ia.audio2, "WAV for the second audio input");
  infer->add_option("--image", ia.image, "PPM (P6) for the image input");
  infer->add_option("--quantized", ia.quantized, "run integer kernels at this assignment");
  infer->add_option("--calibration-dir", ia.calibration_dir, "calibration set for --quantized");
  infer->add_flag("--synthesize", ia.synthesize, "synthesize any input not given (seeded)");
  infer->add_flag("--concurrent", ia.concurrent, "run the two branches on separate threads");
  infer->add_option("--out", common.out, "write the result as JSON");

  auto* bench = app.add_subcommand("bench", "wall-clock latency per inference (batch size 1)");
  AddCommon(bench, common);
  BenchArgs ba;
  bench->add_option("--reps", ba.reps, "timed repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", ba.warmup, "untimed warm-up runs")->check(CLI::NonNegativeNumber);
  bench->add_option("--quantized", ba.quantized, "benchmark integer kernels at this assignment");
  bench->add_flag("--concurrent", ba.concurrent, "run the two branches on separate threads");
  bench->add_option("--out", common.out, "write the latency report as JSON");

  auto* synth = app.add_subcommand("synth", "write synthetic WAV/PPM inputs for a model");
  AddCommon(synth, common);
  std::string synth_dir;
  int synth_count = 1;
  synth->add_option("--out-dir", synth_dir, "output directory")->required();
  synth->add_option("--count", synth_count, "number of samples")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "write a model's config and seeded random weights");
  AddCommon(exp, common);
  std::string config_out, weights_out;
  exp->add_option("--config-out", config_out, "config JSON path");
  exp->add_option("--weights-out", weights_out, "float weight blob path");

  std::vector<std::string> storage{"tinymm"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (inspect->parsed()) return Inspect(common, inspect_assignment, out);
    if (allocate->parsed()) return Allocate(common, alloc, out, err);
    if (quantize->parsed()) return Quantize(common, q_assignment, q_calib, out);
    if (infer->parsed()) return InferCmd(common, ia, out);
    if (bench->parsed()) return Bench(common, ba, out);
    if (synth->parsed()) return Synth(common, synth_dir, synth_count, out);
    if (exp->parsed()) return Export(common, config_out, weights_out, out);
  } catch (const CliFailure& f) {
    err << "error: " << f.message << "\n";
    return f.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoad;
  }
  return kExitUsage;
}

}  // namespace tinymm
