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

#include <fstream>
#include <sstream>

#include "tinymm/error.h"
#include "tinymm/model.h"

namespace tinymm {

using nlohmann::json;

namespace {

struct KindName {
  LayerKind kind;
  std::string_view name;
};

constexpr KindName kKinds[] = {
    {LayerKind::kInput, "input"},         {LayerKind::kConv2d, "conv2d"},
    {LayerKind::kDsConv2d, "ds_conv2d"},  {LayerKind::kMaxPool, "maxpool"},
    {LayerKind::kDense, "dense"},         {LayerKind::kRelu, "relu"},
    {LayerKind::kSoftmax, "softmax"},     {LayerKind::kFlatten, "flatten"},
    {LayerKind::kDropout, "dropout"},     {LayerKind::kBatchNorm, "batchnorm"},
    {LayerKind::kConcat, "concat"},
};

[[noreturn]] void Fail(const std::string& what) { throw Error(ErrorCode::kParseError, what); }

LayerKind ParseKind(const std::string& s, const std::string& layer) {
  for (const auto& k : kKinds) {
    if (k.name == s) return k.kind;
  }
  Fail("layer '" + layer + "': unknown kind '" + s + "'");
}

Padding ParsePadding(const std::string& s, const std::string& layer) {
  if (s == "valid") return Padding::kValid;
  if (s == "same") return Padding::kSame;
  Fail("layer '" + layer + "': padding must be 'valid' or 'same'");
}

int PositiveInt(const json& j, const char* key, const std::string& layer) {
  if (!j.contains(key)) Fail("layer '" + layer + "': missing '" + key + "'");
  const int v = j.at(key).get<int>();
  if (v < 1) Fail("layer '" + layer + "': '" + key + "' must be >= 1");
  return v;
}

MfccConfig ParseMfcc(const json& j) {
  MfccConfig c;
  c.sample_rate = j.at("sample_rate").get<int>();
  c.frame_length = j.at("frame_length").get<int>();
  c.hop_length = j.at("hop_length").get<int>();
  c.num_mel_filters = j.at("num_mel_filters").get<int>();
  c.num_coefficients = j.at("num_coefficients").get<int>();
  c.fmin = j.value("fmin", 0.0);
  c.fmax = j.value("fmax", c.sample_rate / 2.0);
  c.center_padding = j.value("center_padding", true);
  return c;
}

json MfccToJson(const MfccConfig& c) {
  return {{"sample_rate", c.sample_rate},           {"frame_length", c.frame_length},
          {"hop_length", c.hop_length},             {"num_mel_filters", c.num_mel_filters},
          {"num_coefficients", c.num_coefficients}, {"fmin", c.fmin},
          {"fmax", c.fmax},                         {"center_padding", c.center_padding}};
}

LayerSpec ParseLayer(const json& j) {
  LayerSpec s;
  s.name = j.at("name").get<std::string>();
  if (s.name.empty()) Fail("layer with empty name");
  s.kind = ParseKind(j.at("kind").get<std::string>(), s.name);
  if (j.contains("inputs")) {
    s.inputs = j.at("inputs").get<std::vector<std::string>>();
  } else if (j.contains("input")) {
    s.inputs.push_back(j.at("input").get<std::string>());
  }

  switch (s.kind) {
    case LayerKind::kInput: {
      s.input_shape = j.at("shape").get<Shape>();
      if (j.contains("preprocess")) {
        const json& p = j.at("preprocess");
        const std::string type = p.at("type").get<std::string>();
        if (type == "mfcc") {
          s.audio = AudioPreprocess{ParseMfcc(p), p.at("clip_seconds").get<double>()};
        } else if (type == "image") {
          s.image = ImagePreprocess{p.at("height").get<int>(), p.at("width").get<int>()};
        } else {
          Fail("layer '" + s.name + "': unknown preprocess type '" + type + "'");
        }
      }
      break;
    }
    case LayerKind::kConv2d:
    case LayerKind::kDsConv2d:
      s.conv.out_channels = PositiveInt(j, "filters", s.name);
      s.conv.kernel_size = PositiveInt(j, "kernel_size", s.name);
      s.conv.stride = j.value("stride", 1);
      s.conv.padding = ParsePadding(j.value("padding", std::string("valid")), s.name);
      s.conv.kind = s.kind == LayerKind::kConv2d ? ConvKind::kTraditional
                                                 : ConvKind::kDepthwiseSeparable;
      break;
    case LayerKind::kDense:
      s.dense.out_features = PositiveInt(j, "units", s.name);
      break;
    case LayerKind::kMaxPool:
      s.pool.pool_size = PositiveInt(j, "pool_size", s.name);
      break;
    case LayerKind::kDropout:
      s.dropout_rate = j.value("rate", 0.0);
      break;
    case LayerKind::kBatchNorm:
      s.epsilon = j.value("epsilon", kBatchNormEpsilon);
      if (!(s.epsilon > 0.0)) Fail("layer '" + s.name + "': epsilon must be positive");
      break;
    default:
      break;
  }

  if (IsWeighted(s.kind)) {
    if (j.contains("bits")) {
      const json& b = j.at("bits");
      if (b.is_string()) {
        if (b.get<std::string>() != "allocator") {
          Fail("layer '" + s.name + "': bits must be 4, 8 or \"allocator\"");
        }
      } else {
        const int bits = b.get<int>();
        if (bits != 4 && bits != 8) Fail("layer '" + s.name + "': bits must be 4 or 8");
        s.fixed_bits = bits;
      }
    }
    if (j.contains("hessian_trace")) {
      s.hessian_trace = j.at("hessian_trace").get<double>();
      if (*s.hessian_trace < 0.0) Fail("layer '" + s.name + "': negative hessian_trace");
    }
    if (j.contains("omega")) {
      for (const auto& [key, value] : j.at("omega").items()) {
        s.omega_override[std::stoi(key)] = value.get<double>();
      }
    }
  }
  return s;
}

json LayerToJson(const LayerSpec& s) {
  json j = {{"name", s.name}, {"kind", std::string(LayerKindName(s.kind))}};
  if (s.kind == LayerKind::kConcat) {
    j["inputs"] = s.inputs;
  } else if (!s.inputs.empty()) {
    j["input"] = s.inputs.front();
  }
  switch (s.kind) {
    case LayerKind::kInput:
      j["shape"] = s.input_shape;
      if (s.audio) {
        json p = MfccToJson(s.audio->mfcc);
        p["type"] = "mfcc";
        p["clip_seconds"] = s.audio->clip_seconds;
        j["preprocess"] = p;
      } else if (s.image) {
        j["preprocess"] = {{"type", "image"}, {"height", s.image->height}, {"width", s.image->width}};
      }
      break;
    case LayerKind::kConv2d:
    case LayerKind::kDsConv2d:
      j["filters"] = s.conv.out_channels;
      j["kernel_size"] = s.conv.kernel_size;
      j["stride"] = s.conv.stride;
      j["padding"] = s.conv.padding == Padding::kSame ? "same" : "valid";
      break;
    case LayerKind::kDense: j["units"] = s.dense.out_features; break;
    case LayerKind::kMaxPool: j["pool_size"] = s.pool.pool_size; break;
    case LayerKind::kDropout: j["rate"] = s.dropout_rate; break;
    case LayerKind::kBatchNorm: j["epsilon"] = s.epsilon; break;
    default: break;
  }
  if (IsWeighted(s.kind)) {
    j["bits"] = s.fixed_bits ? json(*s.fixed_bits) : json("allocator");
    if (s.hessian_trace) j["hessian_trace"] = *s.hessian_trace;
    if (!s.omega_override.empty()) {
      json o = json::object();
      for (const auto& [bits, omega] : s.omega_override) o[std::to_string(bits)] = omega;
      j["omega"] = o;
    }
  }
  return j;
}

}  // namespace

std::string_view LayerKindName(LayerKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

bool IsWeighted(LayerKind kind) {
  return kind == LayerKind::kConv2d || kind == LayerKind::kDsConv2d || kind == LayerKind::kDense;
}

ModelConfig ParseModelConfig(const json& doc) {
  try {
    if (!doc.is_object()) Fail("model config must be a JSON object");
    const std::string format = doc.value("format", std::string());
    if (format != kModelFormat) {
      Fail("unsupported model format '" + format + "', expected '" + std::string(kModelFormat) + "'");
    }
    ModelConfig cfg;
    cfg.name = doc.value("name", std::string("model"));
    for (const json& layer : doc.at("layers")) cfg.layers.push_back(ParseLayer(layer));
    return cfg;
  } catch (const json::exception& e) {
    Fail(std::string("malformed model config: ") + e.what());
  } catch (const std::invalid_argument&) {
    Fail("malformed model config: non-numeric omega key");
  }
}

ModelConfig ParseModelConfigText(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    Fail(std::string("model config is not valid JSON: ") + e.what());
  }
  return ParseModelConfig(doc);
}

ModelConfig LoadModelConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseModelConfigText(ss.str());
}

json ModelConfigToJson(const ModelConfig& config) {
  json layers = json::array();
  for (const auto& l : config.layers) layers.push_back(LayerToJson(l));
  return {{"format", std::string(kModelFormat)}, {"name", config.name}, {"layers", layers}};
}

}  // namespace tinymm
