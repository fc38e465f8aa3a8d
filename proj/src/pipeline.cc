// pipeline.cc

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

#include "gmmd/pipeline.h"

#include <algorithm>
#include <filesystem>
#include <set>

#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "gmmd/common.h"
#include "gmmd/text-utils.h"

namespace gmmd {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kOutputKeys = {"out", "out-dir", "table"};
const std::set<std::string> kInputKeys = {
    "feats", "ali",   "model", "si",      "sa",    "ubm",       "lat",     "lat-a",
    "lat-b", "a",     "b",     "ref",     "hyp",   "base",      "sys",     "phones",
    "words", "spk2utt", "priors", "gains", "ivectors", "gmmd",  "cn",      "post",
    "model-dir", "sa-dir", "phone-feats", "in", "config"};

std::string Expand(const std::string &text, const std::map<std::string, std::string> &vars,
                   std::size_t line_no) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.compare(i, 2, "${") == 0) {
      auto close = text.find('}', i + 2);
      if (close == std::string::npos)
        throw ParseError("line " + std::to_string(line_no) + ": unterminated ${");
      const std::string name = text.substr(i + 2, close - i - 2);
      auto it = vars.find(name);
      if (it == vars.end())
        throw ParseError("line " + std::to_string(line_no) + ": unknown variable " + name);
      out += it->second;
      i = close + 1;
    } else {
      out.push_back(text[i++]);
    }
  }
  return out;
}

// Splits "--key=value" into (key, value); other tokens give an empty key.
std::pair<std::string, std::string> SplitOption(const std::string &tok) {
  if (tok.rfind("--", 0) != 0) return {"", tok};
  auto eq = tok.find('=');
  if (eq == std::string::npos) return {tok.substr(2), ""};
  return {tok.substr(2, eq - 2), tok.substr(eq + 1)};
}

}  // namespace

PipelineConfig ParsePipelineConfig(const std::string &text) {
  PipelineConfig config;
  enum class Section { kNone, kVars, kStages } section = Section::kNone;
  std::set<std::string> outputs;
  std::size_t line_no = 0;
  for (const auto &raw : Split(text, '\n')) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line == "[vars]") {
      section = Section::kVars;
      continue;
    }
    if (line == "[stages]") {
      section = Section::kStages;
      continue;
    }
    if (line.rfind("stage ", 0) == 0 || line == "stage") {
      section = Section::kStages;
      auto tokens = Tokenize(Expand(line, config.vars, line_no));
      if (tokens.size() < 3) throw ParseError(where + ": expected 'stage <name> <subcommand> <args...>'");
      PipelineStage stage;
      stage.name = tokens[1];
      for (const auto &s : config.stages)
        if (s.name == stage.name) throw ParseError(where + ": duplicate stage " + stage.name);
      stage.args.assign(tokens.begin() + 2, tokens.end());
      for (std::size_t i = 0; i < stage.args.size(); ++i) {
        auto [key, value] = SplitOption(stage.args[i]);
        const bool file_key = kOutputKeys.count(key) || kInputKeys.count(key);
        if (file_key && value.empty() && stage.args[i].find('=') == std::string::npos &&
            i + 1 < stage.args.size())
          value = stage.args[++i];  // "--key value" form
        if (kOutputKeys.count(key) && !value.empty()) {
          if (!outputs.insert(value).second)
            throw ParseError(where + ": output " + value + " produced twice");
          stage.outputs.push_back(value);
        } else if (kInputKeys.count(key) && !value.empty()) {
          stage.inputs.push_back(value);
        } else if (key.empty() && i >= 2) {
          stage.inputs.push_back(value);
        }
      }
      config.stages.push_back(std::move(stage));
      continue;
    }
    if (section == Section::kVars) {
      auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(where + ": expected 'name = value'");
      const std::string name = Trim(line.substr(0, eq));
      if (name.empty()) throw ParseError(where + ": empty variable name");
      config.vars[name] = Expand(Trim(line.substr(eq + 1)), config.vars, line_no);
      continue;
    }
    throw ParseError(where + ": unrecognized directive '" + line + "'");
  }
  return config;
}

std::vector<std::size_t> StageOrder(const PipelineConfig &config) {
  const std::size_t n = config.stages.size();
  std::map<std::string, std::size_t> producer;
  for (std::size_t s = 0; s < n; ++s)
    for (const auto &o : config.stages[s].outputs) producer[o] = s;
  std::vector<std::set<std::size_t>> deps(n);
  for (std::size_t s = 0; s < n; ++s)
    for (const auto &in : config.stages[s].inputs) {
      auto it = producer.find(in);
      if (it != producer.end()) deps[s].insert(it->second);
    }
  std::vector<std::size_t> order;
  std::vector<char> done(n, 0);
  while (order.size() < n) {
    bool progressed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (done[s]) continue;
      if (std::all_of(deps[s].begin(), deps[s].end(), [&](std::size_t d) { return done[d]; })) {
        done[s] = 1;
        order.push_back(s);
        progressed = true;
        break;  // restart so declaration order wins among ready stages
      }
    }
    if (!progressed) throw ValidationError("pipeline stages form a dependency cycle");
  }
  return order;
}

std::string Sha256Hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error("SHA-256 computation failed");
  static const char *kHex = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 15]);
  }
  return hex;
}

std::string Sha256File(const std::string &path) { return Sha256Hex(ReadFileToString(path)); }

std::vector<ManifestEntry> RunPipeline(const PipelineConfig &config, const StageRunner &runner,
                                       const std::string &manifest_path) {
  const auto order = StageOrder(config);
  std::set<std::string> produced;
  for (const auto &s : config.stages) produced.insert(s.outputs.begin(), s.outputs.end());
  for (const auto &s : config.stages)
    for (const auto &in : s.inputs)
      if (!produced.count(in) && !fs::exists(in))
        throw Error("stage " + s.name + ": missing input " + in);

  std::vector<ManifestEntry> manifest;
  for (std::size_t idx : order) {
    const auto &stage = config.stages[idx];
    spdlog::info("running stage {}", stage.name);
    int status;
    try {
      for (const auto &o : stage.outputs) {
        auto parent = fs::path(o).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
      }
      status = runner(stage.args);
    } catch (const std::exception &e) {
      throw Error("stage " + stage.name + " failed: " + e.what());
    }
    if (status != 0)
      throw Error("stage " + stage.name + " exited with status " + std::to_string(status));
    for (const auto &o : stage.outputs) {
      if (fs::is_directory(o)) {
        std::vector<std::string> files;
        for (const auto &entry : fs::recursive_directory_iterator(o))
          if (entry.is_regular_file()) files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        // A directory artifact hashes its sorted "<relative path> <sha256>" listing.
        std::string listing;
        for (const auto &f : files)
          listing += fs::relative(f, o).generic_string() + " " + Sha256File(f) + "\n";
        manifest.push_back({o, Sha256Hex(listing)});
      } else if (fs::exists(o)) {
        manifest.push_back({o, Sha256File(o)});
      } else {
        throw Error("stage " + stage.name + " did not produce " + o);
      }
    }
  }
  if (!manifest_path.empty()) {
    std::string out;
    for (const auto &e : manifest) out += e.path + " " + e.sha256 + "\n";
    auto parent = fs::path(manifest_path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    AtomicWriteFile(manifest_path, out);
  }
  return manifest;
}

}  // namespace gmmd
