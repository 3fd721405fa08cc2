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

#include "doctest.h"
#include "test_util.h"
#include "tinymm/cli.h"
#include "tinymm/formats.h"

namespace tinymm {
namespace {

using nlohmann::json;
using testing::TempDir;

struct Run {
  int code;
  std::string out, err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string P(const std::filesystem::path& p) { return p.string(); }

TEST_CASE("usage errors exit 1") {
  CHECK(Cli({}).code == kExitUsage);
  CHECK(Cli({"frobnicate"}).code == kExitUsage);
  CHECK(Cli({"inspect", "covid", "--no-such-flag"}).code == kExitUsage);
  CHECK(Cli({"bench", "battlefield", "--reps", "0"}).code == kExitUsage);
  CHECK(Cli({"--help"}).code == kExitOk);
}

TEST_CASE("inspect prints shapes and writes JSON") {
  TempDir dir;
  const Run r = Cli({"inspect", "covid", "--out", P(dir / "i.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("cough_conv (conv2d) -> 201x18x16") != std::string::npos);
  CHECK(r.out.find("119520") != std::string::npos);
  const json doc = ReadJsonFile(dir / "i.json");
  CHECK(doc["format"] == kInspectFormat);
  CHECK(Cli({"inspect", "no_such_model"}).code == kExitLoad);
}

TEST_CASE("allocate, including infeasible budgets and sweeps") {
  TempDir dir;
  CHECK(Cli({"allocate", "covid", "--size-budget", "10"}).code == kExitInfeasible);
  const Run r = Cli({"allocate", "covid", "--size-budget", "700000", "--out", P(dir / "a.json"),
                     "--write-problem", P(dir / "p.json")});
  REQUIRE(r.code == kExitOk);
  const BitAssignment a = AssignmentFromJson(ReadJsonFile(dir / "a.json"));
  CHECK(a.size_bits <= 700000);
  CHECK(std::count(a.bits.begin(), a.bits.end(), 4) > 0);
  CHECK(std::count(a.bits.begin(), a.bits.end(), 8) > 0);

  // The saved problem reproduces the same answer without the model.
  const Run again = Cli({"allocate", "--problem", P(dir / "p.json"), "--size-budget", "700000",
                         "--out", P(dir / "b.json")});
  REQUIRE(again.code == kExitOk);
  CHECK(AssignmentFromJson(ReadJsonFile(dir / "b.json")).bits == a.bits);

  REQUIRE(Cli({"allocate", "covid", "--sweep", "10,478080,956160", "--out", P(dir / "s.json")})
              .code == kExitOk);
  const json sweep = ReadJsonFile(dir / "s.json");
  CHECK(sweep["format"] == kSweepFormat);
  CHECK(sweep["entries"].size() == 3);
  CHECK(sweep["entries"][0]["feasible"] == false);
  CHECK(Cli({"allocate", "covid", "--sweep", "5,10"}).code == kExitInfeasible);
  CHECK(Cli({"allocate", "covid", "--sweep", "956160,478080"}).code == kExitUsage);
  CHECK(Cli({"allocate", "--problem", P(dir / "missing.json")}).code == kExitLoad);
}

TEST_CASE("synth, quantize and infer round trip on files") {
  TempDir dir;
  REQUIRE(Cli({"synth", "battlefield", "--out-dir", P(dir / "cal"), "--count", "3"}).code == kExitOk);
  CHECK(std::filesystem::exists(dir / "cal" / "sample000.audio.wav"));
  CHECK(std::filesystem::exists(dir / "cal" / "sample002.image.ppm"));

  REQUIRE(Cli({"allocate", "battlefield", "--out", P(dir / "a8.json")}).code == kExitOk);
  const Run q = Cli({"quantize", "battlefield", "--assignment", P(dir / "a8.json"),
                     "--calibration-dir", P(dir / "cal"), "--out", P(dir / "q.tmmw")});
  REQUIRE(q.code == kExitOk);
  CHECK(q.out.find("ratio 0.25") != std::string::npos);

  const std::vector<std::string> files = {"--audio", P(dir / "cal" / "sample001.audio.wav"),
                                          "--image", P(dir / "cal" / "sample001.image.ppm")};
  auto infer = [&](std::vector<std::string> extra, const std::string& out) {
    std::vector<std::string> args{"infer", "battlefield"};
    args.insert(args.end(), files.begin(), files.end());
    args.insert(args.end(), extra.begin(), extra.end());
    args.insert(args.end(), {"--out", out});
    return Cli(args).code;
  };
  REQUIRE(infer({"--weights", P(dir / "q.tmmw")}, P(dir / "r1.json")) == kExitOk);
  REQUIRE(infer({"--quantized", P(dir / "a8.json"), "--calibration-dir", P(dir / "cal")},
                P(dir / "r2.json")) == kExitOk);
  const json r1 = ReadJsonFile(dir / "r1.json"), r2 = ReadJsonFile(dir / "r2.json");
  CHECK(r1["mode"] == "quantized");
  CHECK(r1["probabilities"] == r2["probabilities"]);
  REQUIRE(infer({}, P(dir / "r3.json")) == kExitOk);
  CHECK(ReadJsonFile(dir / "r3.json")["mode"] == "float32");
}

TEST_CASE("input and calibration failures") {
  TempDir dir;
  CHECK(Cli({"infer", "battlefield"}).code == kExitInput);
  CHECK(Cli({"infer", "battlefield", "--synthesize", "--image", P(dir / "none.ppm")}).code ==
        kExitInput);
  REQUIRE(Cli({"synth", "covid", "--out-dir", P(dir / "c"), "--count", "1"}).code == kExitOk);
  // Cough audio is 44.1 kHz; the battlefield model wants 22.05 kHz.
  CHECK(Cli({"infer", "battlefield", "--synthesize", "--audio",
             P(dir / "c" / "sample000.cough.wav")}).code == kExitInput);

  REQUIRE(Cli({"allocate", "battlefield", "--out", P(dir / "a.json")}).code == kExitOk);
  CHECK(Cli({"quantize", "battlefield", "--assignment", P(dir / "a.json"), "--calibration-dir",
             P(dir / "nowhere"), "--out", P(dir / "q.tmmw")}).code == kExitCalibration);
  std::filesystem::create_directories(dir / "half");
  std::filesystem::copy_file(dir / "c" / "sample000.cough.wav", dir / "half" / "s.cough.wav");
  CHECK(Cli({"quantize", "covid", "--assignment", P(dir / "a.json"), "--calibration-dir",
             P(dir / "half"), "--out", P(dir / "q.tmmw")}).code == kExitCalibration);
  CHECK(Cli({"quantize", "battlefield", "--assignment", P(dir / "none.json"), "--out",
             P(dir / "q.tmmw")}).code == kExitLoad);
}

TEST_CASE("exported model files behave like the built-in") {
  TempDir dir;
  REQUIRE(Cli({"export", "battlefield", "--config-out", P(dir / "m.json"), "--weights-out",
               P(dir / "m.tmmw")}).code == kExitOk);
  REQUIRE(Cli({"infer", P(dir / "m.json"), "--weights", P(dir / "m.tmmw"), "--synthesize",
               "--out", P(dir / "x.json")}).code == kExitOk);
  REQUIRE(Cli({"infer", "battlefield", "--synthesize", "--out", P(dir / "y.json")}).code == kExitOk);
  CHECK(ReadJsonFile(dir / "x.json")["probabilities"] == ReadJsonFile(dir / "y.json")["probabilities"]);
  std::ofstream(dir / "bad.tmmw") << "garbage";
  CHECK(Cli({"infer", P(dir / "m.json"), "--weights", P(dir / "bad.tmmw"), "--synthesize"}).code ==
        kExitLoad);
}

TEST_CASE("bench writes a latency report") {
  TempDir dir;
  const Run r = Cli({"bench", "battlefield", "--reps", "5", "--out", P(dir / "b.json")});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("median") != std::string::npos);
  const json doc = ReadJsonFile(dir / "b.json");
  CHECK(doc["format"] == kBenchFormat);
  CHECK(doc["batch_size"] == 1);
  CHECK(doc["unit"] == "ms");
  CHECK(doc["timings_ms"].size() == 5);
  const double mn = doc["min_ms"], md = doc["median_ms"], mx = doc["max_ms"], mean = doc["mean_ms"];
  CHECK(mn > 0.0);
  CHECK(mn <= md);
  CHECK(md <= mx);
  CHECK(mn <= mean);
  CHECK(mean <= mx);
}

}  // namespace
}  // namespace tinymm
