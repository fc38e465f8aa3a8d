// gmmd/pipeline.h

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

#ifndef GMMD_PIPELINE_H_
#define GMMD_PIPELINE_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace gmmd {

// Pipeline description, one directive per line:
//
//   [vars]
//   data = corpus/train
//   out = exp/sat
//   [stages]
//   stage si gmm train --feats=${data}/bn.feats --ali=${data}/ali --out=${out}/si.gmm
//
// "${name}" expands from the [vars] block (earlier variables may be used in
// later ones). Values of --out, --out-dir and --table are stage outputs; a
// stage that names another stage's output depends on it.

struct PipelineStage {
  std::string name;
  std::vector<std::string> args;  // subcommand words followed by its options
  std::vector<std::string> outputs;
  std::vector<std::string> inputs;  // file arguments, produced or pre-existing
};

struct PipelineConfig {
  std::map<std::string, std::string> vars;
  std::vector<PipelineStage> stages;
};

/// Throws ParseError on malformed lines, unknown variables or duplicate
/// stage names or outputs.
PipelineConfig ParsePipelineConfig(const std::string &text);

/// Stage indices in dependency order, declaration order among independent
/// stages. Throws ValidationError on a cycle.
std::vector<std::size_t> StageOrder(const PipelineConfig &config);

struct ManifestEntry {
  std::string path;
  std::string sha256;
};

/// Runs one stage's argument vector and returns its exit status.
using StageRunner = std::function<int(const std::vector<std::string> &args)>;

/// Checks that every input exists or is produced upstream, runs the stages
/// in dependency order and writes "<artifact_path> <sha256>" lines (outputs
/// in stage order; a directory is hashed over its sorted file listing) to
/// `manifest_path` when it is non-empty. Throws Error naming the stage on
/// failure.
std::vector<ManifestEntry> RunPipeline(const PipelineConfig &config, const StageRunner &runner,
                                       const std::string &manifest_path);

std::string Sha256Hex(const std::string &bytes);
std::string Sha256File(const std::string &path);

}  // namespace gmmd

#endif  // GMMD_PIPELINE_H_
