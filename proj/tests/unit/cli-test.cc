// tests/unit/cli-test.cc

// Copyright 2026  GMMD Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "cli.h"
#include "gmmd/common.h"
#include "gmmd/feat-io.h"
#include "gmmd/pipeline.h"
#include "gmmd/text-utils.h"
#include "test-util.h"

using namespace gmmd;
using namespace gmmd::testing;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int status;
  std::string out;
};

Captured Run(const std::string &line) {
  std::ostringstream sink;
  auto *saved = std::cout.rdbuf(sink.rdbuf());
  int status;
  try {
    status = RunCli(Tokenize(line));
  } catch (...) {
    std::cout.rdbuf(saved);
    throw;
  }
  std::cout.rdbuf(saved);
  return {status, sink.str()};
}

struct Corpus {
  ScratchDir dir{"cli"};
  Corpus() {
    Rng rng(7);
    auto c = MakeCorpus(rng, 2, 2, 6, 3, 80, 1.0);
    WriteFeatureArchive(c.feats, dir.Path("feats.txt"));
    WriteAlignments(c.ali, dir.Path("ali.txt"));
    std::string spk;
    for (const auto &[s, utts] : c.spk2utt) {
      spk += s;
      for (const auto &u : utts) spk += " " + u;
      spk += "\n";
    }
    WriteFile(dir.Path("spk2utt"), spk);
  }
  std::string P(const std::string &name) const { return dir.Path(name); }
};

}  // namespace

TEST_CASE("pipeline config: vars, stages, inputs and outputs") {
  auto c = ParsePipelineConfig(
      "# comment\n[vars]\nd = /data\no = ${d}/out\n[stages]\n"
      "stage a gmm train --feats=${d}/f --ali ${d}/a --components=2 --out=${o}/m\n"
      "stage b frontend concat ${o}/m ${d}/g --out=${o}/c\n");
  CHECK(c.vars.at("o") == "/data/out");
  REQUIRE(c.stages.size() == 2);
  CHECK(c.stages[0].args.front() == "gmm");
  CHECK(c.stages[0].outputs == std::vector<std::string>{"/data/out/m"});
  CHECK(c.stages[0].inputs == std::vector<std::string>{"/data/f", "/data/a"});
  CHECK(c.stages[1].inputs == std::vector<std::string>{"/data/out/m", "/data/g"});
  CHECK(StageOrder(c) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("pipeline config: order follows dependencies, cycles and typos are errors") {
  auto c = ParsePipelineConfig("stage late x y --in=mid --out=last\nstage early x y --in=src --out=mid\n");
  CHECK(StageOrder(c) == std::vector<std::size_t>{1, 0});
  auto cyc = ParsePipelineConfig("stage a x y --in=q --out=p\nstage b x y --in=p --out=q\n");
  CHECK_THROWS_AS(StageOrder(cyc), ValidationError);
  CHECK_THROWS_AS(ParsePipelineConfig("stage a x y --out=${nope}\n"), ParseError);
  CHECK_THROWS_AS(ParsePipelineConfig("stage a x y --out=p\nstage b x y --out=p\n"), ParseError);
  CHECK_THROWS_AS(ParsePipelineConfig("stage a x y --out=p\nstage a x z --out=q\n"), ParseError);
  CHECK_THROWS_AS(ParsePipelineConfig("bogus line\n"), ParseError);
  CHECK_THROWS_AS(ParsePipelineConfig("stage a\n"), ParseError);
}

TEST_CASE("pipeline: zero stages give an empty manifest") {
  ScratchDir dir("cli");
  auto m = RunPipeline(ParsePipelineConfig("[vars]\nx = 1\n"), [](const auto &) { return 0; },
                       dir.Path("manifest"));
  CHECK(m.empty());
  CHECK(ReadFileToString(dir.Path("manifest")).empty());
}

TEST_CASE("pipeline: missing input and failing stage") {
  ScratchDir dir("cli");
  auto cfg = ParsePipelineConfig("stage s1 gmm train --feats=" + dir.Path("none") + " --out=" + dir.Path("m") + "\n");
  bool ran = false;
  try {
    RunPipeline(cfg, [&](const auto &) { return ran = true, 0; }, "");
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("s1") != std::string::npos);
    CHECK(std::string(e.what()).find("none") != std::string::npos);
  }
  CHECK_FALSE(ran);
  WriteFile(dir.Path("in"), "x");
  auto bad = ParsePipelineConfig("stage broken x y --in=" + dir.Path("in") + " --out=" + dir.Path("o") + "\n");
  try {
    RunPipeline(bad, [](const auto &) { return 3; }, dir.Path("manifest"));
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("broken") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(dir.Path("manifest")));
}

TEST_CASE("sha256 of known strings") {
  CHECK(Sha256Hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Sha256Hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cli: SAT pipeline lists four outputs and reruns identically") {
  Corpus c;
  const std::string stages =
      "stage si gmm train --feats=${d}/feats.txt --ali=${d}/ali.txt --components=2 --iters=3 --out=${o}/si.gmm\n"
      "stage sa adapt map --tau=5 --model=${o}/si.gmm --feats=${d}/feats.txt --ali=${d}/ali.txt "
      "--spk2utt=${d}/spk2utt --out-dir=${o}/sa\n"
      "stage gmmd gmmd extract --model-dir=${o}/sa --spk2utt=${d}/spk2utt --feats=${d}/feats.txt --out=${o}/gmmd.txt\n"
      "stage input gmmd build-input --gmmd=${o}/gmmd.txt --base=${d}/feats.txt --out=${o}/input.txt\n";
  std::vector<std::string> manifests;
  for (int run = 0; run < 2; ++run) {
    const std::string out = c.P("run" + std::to_string(run));
    WriteFile(c.P("cfg"), "[vars]\nd = " + c.dir.Root() + "\no = " + out + "\n" + stages);
    auto r = Run("--seed 3 run --config " + c.P("cfg") + " --manifest " + out + "/manifest");
    REQUIRE(r.status == 0);
    std::string hashes;
    std::istringstream in(ReadFileToString(out + "/manifest"));
    std::string path, hash;
    int lines = 0;
    while (in >> path >> hash) hashes += hash + "\n", ++lines;
    CHECK(lines == 4);
    manifests.push_back(hashes);
    auto input = ReadFeatureArchive(out + "/input.txt");
    CHECK(input.begin()->second.Dim() == 13 * (6 + 3));
  }
  CHECK(manifests[0] == manifests[1]);
}

TEST_CASE("cli: frontend and scoring subcommands") {
  Corpus c;
  CHECK(Run("frontend splice --in=" + c.P("feats.txt") + " --offsets=-10,-5..5,10 --out=" + c.P("s.txt")).status == 0);
  CHECK(ReadFeatureArchive(c.P("s.txt")).begin()->second.Dim() == 39);
  CHECK(Run("frontend dct --in=" + c.P("s.txt") + " --out-dim=20 --out=" + c.P("d.txt")).status == 0);
  CHECK(ReadFeatureArchive(c.P("d.txt")).begin()->second.Dim() == 20);
  CHECK(Run("frontend concat " + c.P("feats.txt") + " " + c.P("d.txt") + " --out=" + c.P("c.txt")).status == 0);
  CHECK(ReadFeatureArchive(c.P("c.txt")).begin()->second.Dim() == 23);

  WriteFile(c.P("ref"), "u1 a b c\nu2 d e\n");
  WriteFile(c.P("hyp"), "u1 a c\nu2 d e\n");
  auto wer = Run("analyze wer --ref=" + c.P("ref") + " --hyp=" + c.P("hyp"));
  CHECK(wer.status == 0);
  CHECK(wer.out.find("20.00") != std::string::npos);
}

TEST_CASE("cli: adapt gain prints one real") {
  Corpus c;
  REQUIRE(Run("gmm train --feats=" + c.P("feats.txt") + " --ali=" + c.P("ali.txt") + " --components=1 --out=" +
              c.P("si.gmm")).status == 0);
  REQUIRE(Run("adapt map --tau=5 --model=" + c.P("si.gmm") + " --feats=" + c.P("feats.txt") + " --ali=" +
              c.P("ali.txt") + " --out=" + c.P("sa.gmm")).status == 0);
  auto r = Run("adapt gain --si=" + c.P("si.gmm") + " --sa=" + c.P("sa.gmm") + " --feats=" + c.P("feats.txt") +
               " --ali=" + c.P("ali.txt"));
  REQUIRE(r.status == 0);
  auto tokens = Tokenize(r.out);
  REQUIRE(tokens.size() == 1);
  // The SI model is the ML fit to these same frames, so the gain is zero up
  // to rounding.
  CHECK(ParseDouble(tokens[0], "gain") >= -1e-9);
}

TEST_CASE("cli: validation failures exit non-zero and write nothing") {
  Corpus c;
  CHECK(Run("frontend dct --in=" + c.P("feats.txt") + " --out-dim=99 --out=" + c.P("bad.txt")).status != 0);
  CHECK_FALSE(fs::exists(c.P("bad.txt")));
  WriteFile(c.P("broken.txt"), "UTT u 2 2\n1 2\n3\n");
  CHECK(Run("frontend splice --in=" + c.P("broken.txt") + " --offsets=0 --out=" + c.P("bad.txt")).status != 0);
  CHECK_FALSE(fs::exists(c.P("bad.txt")));
  CHECK(Run("analyze nothing").status != 0);
  CHECK(Run("gmm train --feats=" + c.P("feats.txt")).status != 0);
  for (const auto &entry : fs::directory_iterator(c.dir.Root()))
    CHECK(entry.path().extension() != ".tmp");
}
