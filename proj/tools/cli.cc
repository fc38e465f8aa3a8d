// cli.cc

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

#include "cli.h"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "gmmd/analysis.h"
#include "gmmd/common.h"
#include "gmmd/feat-io.h"
#include "gmmd/frontend.h"
#include "gmmd/fusion.h"
#include "gmmd/gmmd-features.h"
#include "gmmd/ivector-extractor.h"
#include "gmmd/lattice-functions.h"
#include "gmmd/map-adapt.h"
#include "gmmd/parallel.h"
#include "gmmd/pipeline.h"
#include "gmmd/text-utils.h"

namespace gmmd {

namespace fs = std::filesystem;

namespace {

std::uint64_t g_seed = 0;

FeatureArchive Subset(const FeatureArchive &feats, const std::vector<std::string> &utts) {
  FeatureArchive out;
  for (const auto &u : utts) {
    auto it = feats.find(u);
    if (it == feats.end()) throw ValidationError("no features for utterance " + u);
    out.emplace(u, it->second);
  }
  return out;
}

std::map<std::string, std::string> UttToSpeaker(const SpeakerMap &spk2utt) {
  std::map<std::string, std::string> out;
  for (const auto &[spk, utts] : spk2utt)
    for (const auto &u : utts) out[u] = spk;
  return out;
}

std::string SpeakerModelPath(const std::string &dir, const std::string &spk) {
  return (fs::path(dir) / (spk + ".gmm")).string();
}

template <typename Fn>
FeatureArchive MapArchive(const FeatureArchive &in, Fn fn) {
  std::vector<const FeatureMatrix *> utts;
  for (const auto &[u, x] : in) utts.push_back(&x);
  std::vector<FeatureMatrix> out(utts.size());
  ParallelFor(utts.size(), [&](std::size_t i) { out[i] = fn(*utts[i]); });
  FeatureArchive result;
  for (auto &x : out) result.emplace(x.UtteranceId(), std::move(x));
  return result;
}

void WriteText(const std::string &path, const std::string &content) {
  if (!path.empty()) AtomicWriteFile(path, content);
}

std::set<int> SilenceIds(const SymbolTable &phones, const std::string &spec) {
  std::set<int> ids;
  if (spec.empty()) return ids;
  for (const auto &sym : Split(spec, ',')) {
    if (auto id = phones.Find(sym)) ids.insert(*id);
    else spdlog::warn("silence phone {} is not in the phone table", sym);
  }
  return ids;
}

struct PhoneFeatInputs {
  std::vector<PhonePosteriorMatrix> posteriors;
  std::vector<AlignmentTrack> refs;
  std::vector<std::vector<bool>> masks;
};

PhoneFeatInputs LoadPhoneFeats(const std::string &feats_path, const std::string &phones_path,
                               const std::string &ali_path, const std::string &silence,
                               double epsilon) {
  auto feats = ReadFeatureArchive(feats_path);
  auto phones = ReadSymbolTable(phones_path);
  auto ali = ReadAlignments(ali_path);
  auto sil = SilenceIds(phones, silence);
  PhoneFeatInputs in;
  for (const auto &[utt, x] : feats) {
    auto it = ali.find(utt);
    if (it == ali.end()) throw ValidationError("no reference alignment for utterance " + utt);
    in.posteriors.push_back(PhonePosteriorMatrix::FromLog(x, phones.NonNullIds(), epsilon));
    in.refs.push_back(it->second);
    in.masks.push_back(SpeechMask(it->second, sil));
  }
  return in;
}

TranscriptSet ToWords(const std::map<std::string, std::vector<int>> &ids, const SymbolTable *words) {
  TranscriptSet out;
  for (const auto &[utt, seq] : ids) {
    auto &w = out[utt];
    for (int id : seq) w.push_back(words ? words->Symbol(id) : std::to_string(id));
  }
  return out;
}

std::string AlphaTable(const AlphaSearchResult &r) {
  std::string out = "alpha\twer\terrors\tref_words\n";
  for (const auto &[alpha, rep] : r.table)
    out += fmt::format("{}\t{}\t{}\t{}\n", alpha, rep.Wer(), rep.total.Errors(), rep.total.ref_words);
  return out;
}

// ---------------------------------------------------------------------------

void AddFrontend(CLI::App &root) {
  auto *group = root.add_subcommand("frontend", "Feature-space transforms");
  group->require_subcommand(1);

  {
    auto o = std::make_shared<std::tuple<std::string, std::string, std::string>>();
    auto *cmd = group->add_subcommand("splice", "Splice frames with a context window");
    cmd->add_option("--in", std::get<0>(*o), "Input feature archive")->required();
    cmd->add_option("--offsets", std::get<1>(*o), "Context offsets, e.g. -10,-5..5,10")->required();
    cmd->add_option("--out", std::get<2>(*o), "Output feature archive")->required();
    cmd->callback([o] {
      auto offsets = ParseOffsets(std::get<1>(*o));
      auto in = ReadFeatureArchive(std::get<0>(*o));
      WriteFeatureArchive(MapArchive(in, [&](const FeatureMatrix &x) { return Splice(x, offsets); }),
                          std::get<2>(*o));
    });
  }
  {
    struct Opts { std::string in, out; std::size_t out_dim = 0; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("dct", "Keep the leading orthonormal DCT-II coefficients");
    cmd->add_option("--in", o->in, "Input feature archive")->required();
    cmd->add_option("--out-dim", o->out_dim, "Number of coefficients kept")->required();
    cmd->add_option("--out", o->out, "Output feature archive")->required();
    cmd->callback([o] {
      auto in = ReadFeatureArchive(o->in);
      WriteFeatureArchive(
          MapArchive(in, [&](const FeatureMatrix &x) { return DctReduce(x, o->out_dim); }), o->out);
    });
  }
  {
    struct Opts { std::vector<std::string> inputs; std::string out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("concat", "Concatenate two feature archives frame by frame");
    cmd->add_option("inputs", o->inputs, "Two feature archives")->required()->expected(2);
    cmd->add_option("--out", o->out, "Output feature archive")->required();
    cmd->callback([o] {
      auto a = ReadFeatureArchive(o->inputs[0]);
      auto b = ReadFeatureArchive(o->inputs[1]);
      if (a.size() != b.size()) throw ValidationError("archives hold different utterance sets");
      FeatureArchive out;
      for (const auto &[utt, x] : a) {
        auto it = b.find(utt);
        if (it == b.end()) throw ValidationError("utterance " + utt + " missing from " + o->inputs[1]);
        out.emplace(utt, ConcatFeatures(x, it->second));
      }
      WriteFeatureArchive(out, o->out);
    });
  }
}

void AddGmm(CLI::App &root) {
  auto *group = root.add_subcommand("gmm", "Diagonal GMM training");
  group->require_subcommand(1);
  struct Opts {
    std::string feats, ali, out;
    int components = 1, iters = 10, num_states = 0;
    std::optional<double> var_floor;
  };
  {
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("train", "Train an auxiliary model, one GMM per aligned state");
    cmd->add_option("--feats", o->feats, "Feature archive")->required();
    cmd->add_option("--ali", o->ali, "State alignments")->required();
    cmd->add_option("--components", o->components, "Gaussians per state")->required();
    cmd->add_option("--iters", o->iters, "EM iterations");
    cmd->add_option("--var-floor", o->var_floor, "Variance floor (default 1e-3 x data variance)");
    cmd->add_option("--num-states", o->num_states, "Number of states (default: from alignments)");
    cmd->add_option("--out", o->out, "Output GMM set")->required();
    cmd->callback([o] {
      EmOptions opts{o->components, o->iters, o->var_floor, g_seed};
      auto model = TrainAuxModel(ReadFeatureArchive(o->feats), ReadAlignments(o->ali), opts,
                                 o->num_states);
      WriteAuxModel(model, o->out);
    });
  }
  {
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("train-ubm", "Train a single GMM on all frames");
    cmd->add_option("--feats", o->feats, "Feature archive")->required();
    cmd->add_option("--components", o->components, "Number of Gaussians")->required();
    cmd->add_option("--iters", o->iters, "EM iterations");
    cmd->add_option("--var-floor", o->var_floor, "Variance floor (default 1e-3 x data variance)");
    cmd->add_option("--out", o->out, "Output GMM set with one state")->required();
    cmd->callback([o] {
      auto feats = ReadFeatureArchive(o->feats);
      if (feats.empty()) throw ValidationError("no utterances in " + o->feats);
      FeatureMatrix all("all", feats.begin()->second.Dim());
      for (const auto &[u, x] : feats)
        for (std::size_t t = 0; t < x.NumFrames(); ++t) all.AppendRow(x.Row(t));
      EmOptions opts{o->components, o->iters, o->var_floor, g_seed};
      AuxModel model;
      model.states.push_back(EmTrain(all, opts));
      model.info.push_back({0, 0});
      WriteAuxModel(model, o->out);
    });
  }
}

void AddAdapt(CLI::App &root) {
  auto *group = root.add_subcommand("adapt", "MAP adaptation of the auxiliary model");
  group->require_subcommand(1);
  {
    struct Opts { std::string model, feats, ali, out, spk2utt, out_dir; double tau = 5.0; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("map", "MAP re-estimation of the means");
    cmd->add_option("--model", o->model, "Prior (speaker-independent) GMM set")->required();
    cmd->add_option("--feats", o->feats, "Adaptation features")->required();
    cmd->add_option("--ali", o->ali, "State alignments of the adaptation data")->required();
    cmd->add_option("--tau", o->tau, "Prior weight");
    auto *out = cmd->add_option("--out", o->out, "Adapted GMM set (all data pooled)");
    auto *spk = cmd->add_option("--spk2utt", o->spk2utt, "Speaker map: adapt one model per speaker");
    auto *dir = cmd->add_option("--out-dir", o->out_dir, "Directory for <speaker>.gmm models");
    spk->needs(dir);
    dir->needs(spk);
    out->excludes(spk);
    cmd->callback([o] {
      auto prior = ReadAuxModel(o->model);
      auto feats = ReadFeatureArchive(o->feats);
      auto ali = ReadAlignments(o->ali);
      if (o->spk2utt.empty()) {
        if (o->out.empty()) throw ValidationError("adapt map needs --out or --spk2utt/--out-dir");
        WriteAuxModel(MapAdaptMeans(prior, feats, ali, o->tau), o->out);
        return;
      }
      auto speakers = ReadSpeakerMap(o->spk2utt);
      std::vector<std::pair<std::string, AuxModel>> models;
      for (const auto &[spk, utts] : speakers)
        models.emplace_back(spk, MapAdaptMeans(prior, Subset(feats, utts), ali, o->tau));
      fs::create_directories(o->out_dir);
      for (const auto &[spk, m] : models) WriteAuxModel(m, SpeakerModelPath(o->out_dir, spk));
    });
  }
  {
    struct Opts { std::string si, sa, sa_dir, feats, ali, spk2utt, out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("gain", "Average per-frame log-likelihood gain of adaptation");
    cmd->add_option("--si", o->si, "Prior GMM set")->required();
    auto *sa = cmd->add_option("--sa", o->sa, "Adapted GMM set");
    auto *sa_dir = cmd->add_option("--sa-dir", o->sa_dir, "Directory of <speaker>.gmm models");
    cmd->add_option("--feats", o->feats, "Features")->required();
    cmd->add_option("--ali", o->ali, "State alignments")->required();
    auto *spk = cmd->add_option("--spk2utt", o->spk2utt, "Speaker map (with --sa-dir)");
    cmd->add_option("--out", o->out, "Write '<speaker> <gain>' lines here");
    sa_dir->needs(spk);
    sa->excludes(sa_dir);
    cmd->callback([o] {
      auto si = ReadAuxModel(o->si);
      auto feats = ReadFeatureArchive(o->feats);
      auto ali = ReadAlignments(o->ali);
      if (!o->sa.empty()) {
        double gain = LikelihoodGain(si, ReadAuxModel(o->sa), feats, ali);
        std::cout << FormatDouble(gain) << "\n";
        if (!o->out.empty()) WriteScalarMap({{"all", gain}}, o->out);
        return;
      }
      if (o->sa_dir.empty()) throw ValidationError("adapt gain needs --sa or --sa-dir");
      std::map<std::string, double> gains;
      for (const auto &[spk, utts] : ReadSpeakerMap(o->spk2utt)) {
        gains[spk] = LikelihoodGain(si, ReadAuxModel(SpeakerModelPath(o->sa_dir, spk)),
                                    Subset(feats, utts), ali);
        std::cout << spk << " " << FormatDouble(gains[spk]) << "\n";
      }
      if (!o->out.empty()) WriteScalarMap(gains, o->out);
    });
  }
}

void AddGmmd(CLI::App &root) {
  auto *group = root.add_subcommand("gmmd", "GMM-derived features");
  group->require_subcommand(1);
  {
    struct Opts { std::string model, model_dir, spk2utt, feats, out; bool normalize = false; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("extract", "Per-state log-likelihood features");
    auto *model = cmd->add_option("--model", o->model, "GMM set (speaker-independent or adapted)");
    auto *dir = cmd->add_option("--model-dir", o->model_dir, "Directory of <speaker>.gmm models");
    auto *spk = cmd->add_option("--spk2utt", o->spk2utt, "Speaker map (with --model-dir)");
    cmd->add_option("--feats", o->feats, "Input features")->required();
    cmd->add_option("--out", o->out, "Output GMMD archive")->required();
    cmd->add_flag("--normalize", o->normalize, "Per-utterance mean/variance normalization");
    dir->needs(spk);
    model->excludes(dir);
    cmd->callback([o] {
      auto feats = ReadFeatureArchive(o->feats);
      std::map<std::string, AuxModel> models;
      std::map<std::string, std::string> utt2spk;
      if (!o->model.empty()) {
        models[""] = ReadAuxModel(o->model);
        for (const auto &[u, x] : feats) utt2spk[u] = "";
      } else if (!o->model_dir.empty()) {
        utt2spk = UttToSpeaker(ReadSpeakerMap(o->spk2utt));
        for (const auto &[u, x] : feats) {
          auto it = utt2spk.find(u);
          if (it == utt2spk.end()) throw ValidationError("utterance " + u + " has no speaker");
          if (!models.count(it->second))
            models[it->second] = ReadAuxModel(SpeakerModelPath(o->model_dir, it->second));
        }
      } else {
        throw ValidationError("gmmd extract needs --model or --model-dir/--spk2utt");
      }
      auto out = MapArchive(feats, [&](const FeatureMatrix &x) {
        auto f = ExtractGmmd(models.at(utt2spk.at(x.UtteranceId())), x);
        return o->normalize ? NormalizeMeanVariance(f) : f;
      });
      WriteFeatureArchive(out, o->out);
    });
  }
  {
    struct Opts { std::string gmmd, base, out, offsets = "-10,-5..5,10"; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("build-input", "Concatenate GMMD and base features, then splice");
    cmd->add_option("--gmmd", o->gmmd, "GMMD archive")->required();
    cmd->add_option("--base", o->base, "Base feature archive")->required();
    cmd->add_option("--offsets", o->offsets, "Context offsets");
    cmd->add_option("--out", o->out, "Output archive")->required();
    cmd->callback([o] {
      auto offsets = ParseOffsets(o->offsets);
      auto gmmd = ReadFeatureArchive(o->gmmd);
      auto base = ReadFeatureArchive(o->base);
      if (gmmd.size() != base.size()) throw ValidationError("archives hold different utterance sets");
      for (const auto &[u, x] : gmmd)
        if (!base.count(u)) throw ValidationError("utterance " + u + " missing from " + o->base);
      WriteFeatureArchive(MapArchive(gmmd, [&](const FeatureMatrix &g) {
                            return BuildGmmdInput(g, base.at(g.UtteranceId()), offsets);
                          }),
                          o->out);
    });
  }
}

std::map<std::string, BaumWelchStats> SpeakerStats(const DiagonalGmm &ubm, const FeatureArchive &feats,
                                                   const SpeakerMap &speakers) {
  std::map<std::string, BaumWelchStats> out;
  for (const auto &[spk, utts] : speakers) {
    BaumWelchStats st(ubm.NumComponents(), ubm.Dim());
    for (const auto &[u, x] : Subset(feats, utts)) st += AccumulateStats(ubm, x);
    out.emplace(spk, std::move(st));
  }
  return out;
}

void AddIvector(CLI::App &root) {
  auto *group = root.add_subcommand("ivector", "Total-variability i-vectors");
  group->require_subcommand(1);
  {
    struct Opts { std::string ubm, feats, spk2utt, out; std::size_t dim = 100; int iters = 10; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("train", "Train the loading matrices");
    cmd->add_option("--ubm", o->ubm, "UBM (GMM set with one state)")->required();
    cmd->add_option("--feats", o->feats, "Training features")->required();
    cmd->add_option("--spk2utt", o->spk2utt, "Speaker map")->required();
    cmd->add_option("--dim", o->dim, "i-vector dimension");
    cmd->add_option("--iters", o->iters, "EM iterations");
    cmd->add_option("--out", o->out, "Output model")->required();
    cmd->callback([o] {
      auto ubm_set = ReadAuxModel(o->ubm);
      if (ubm_set.NumStates() != 1) throw ValidationError("UBM file must hold exactly one state");
      const auto &ubm = ubm_set.states[0];
      auto stats = SpeakerStats(ubm, ReadFeatureArchive(o->feats), ReadSpeakerMap(o->spk2utt));
      std::vector<BaumWelchStats> list;
      for (auto &[spk, st] : stats) list.push_back(std::move(st));
      std::vector<double> trace;
      auto tv = TrainTotalVariability(list, ubm, o->dim, o->iters, g_seed, &trace);
      for (std::size_t i = 0; i < trace.size(); ++i) spdlog::info("iteration {} objective {}", i, trace[i]);
      WriteTotalVariability(tv, o->out);
    });
  }
  {
    struct Opts { std::string model, feats, spk2utt, out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("extract", "One i-vector per speaker");
    cmd->add_option("--model", o->model, "Total variability model")->required();
    cmd->add_option("--feats", o->feats, "Features")->required();
    cmd->add_option("--spk2utt", o->spk2utt, "Speaker map")->required();
    cmd->add_option("--out", o->out, "Archive with one row per speaker")->required();
    cmd->callback([o] {
      auto tv = ReadTotalVariability(o->model);
      tv.Validate();
      FeatureArchive out;
      for (const auto &[spk, st] : SpeakerStats(tv.ubm, ReadFeatureArchive(o->feats), ReadSpeakerMap(o->spk2utt))) {
        Eigen::VectorXd w = ExtractIvector(tv, st);
        FeatureMatrix row(spk, w.size());
        row.AppendRow(std::span<const double>(w.data(), w.size()));
        out.emplace(spk, std::move(row));
      }
      WriteFeatureArchive(out, o->out);
    });
  }
  {
    struct Opts { std::string feats, ivectors, spk2utt, out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("append", "Append each speaker's i-vector to its frames");
    cmd->add_option("--feats", o->feats, "Features")->required();
    cmd->add_option("--ivectors", o->ivectors, "Speaker i-vector archive")->required();
    cmd->add_option("--spk2utt", o->spk2utt, "Speaker map")->required();
    cmd->add_option("--out", o->out, "Output archive")->required();
    cmd->callback([o] {
      auto ivectors = ReadFeatureArchive(o->ivectors);
      auto utt2spk = UttToSpeaker(ReadSpeakerMap(o->spk2utt));
      auto feats = ReadFeatureArchive(o->feats);
      WriteFeatureArchive(MapArchive(feats, [&](const FeatureMatrix &x) {
                            auto spk = utt2spk.find(x.UtteranceId());
                            if (spk == utt2spk.end())
                              throw ValidationError("utterance " + x.UtteranceId() + " has no speaker");
                            auto iv = ivectors.find(spk->second);
                            if (iv == ivectors.end() || iv->second.NumFrames() != 1)
                              throw ValidationError("no i-vector for speaker " + spk->second);
                            auto row = iv->second.Row(0);
                            return AppendIvector(x, Eigen::Map<const Eigen::VectorXd>(row.data(), row.size()));
                          }),
                          o->out);
    });
  }
}

void AddLattice(CLI::App &root) {
  auto *group = root.add_subcommand("lattice", "Lattice posteriors and confusion networks");
  group->require_subcommand(1);
  {
    struct Opts { std::string lat, out; double lambda = 1.0; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("posteriors", "Attach forward-backward arc posteriors");
    cmd->add_option("--lat", o->lat, "Lattice file")->required();
    cmd->add_option("--lambda", o->lambda, "Acoustic scale divisor");
    cmd->add_option("--out", o->out, "Output lattice file")->required();
    cmd->callback([o] {
      LatticeSet out;
      for (const auto &[u, lat] : ReadLatticeSet(o->lat)) out.emplace(u, AttachPosteriors(lat, o->lambda));
      WriteLatticeSet(out, o->out);
    });
  }
  {
    struct Opts { std::string lat, phones, ali, out; double lambda = 1.0, epsilon = kDefaultPosteriorFloor; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("phone-feats", "Per-frame phone posterior features (log domain)");
    cmd->add_option("--lat", o->lat, "Phone-labeled lattice file")->required();
    cmd->add_option("--phones", o->phones, "Phone symbol table")->required();
    cmd->add_option("--lambda", o->lambda, "Acoustic scale divisor");
    cmd->add_option("--epsilon", o->epsilon, "Floor for absent phones");
    cmd->add_option("--ali", o->ali, "Alignments giving each utterance's frame count");
    cmd->add_option("--out", o->out, "Output archive")->required();
    cmd->callback([o] {
      auto lats = ReadLatticeSet(o->lat);
      auto phones = ReadSymbolTable(o->phones);
      AlignmentArchive ali;
      if (!o->ali.empty()) ali = ReadAlignments(o->ali);
      FeatureArchive out;
      for (const auto &[u, lat] : lats) {
        int frames = -1;
        if (!o->ali.empty()) {
          auto it = ali.find(u);
          if (it == ali.end()) throw ValidationError("no alignment for utterance " + u);
          frames = static_cast<int>(it->second.NumFrames());
        }
        out.emplace(u, PhonePosteriorFeatures(lat, phones, o->lambda, o->epsilon, frames).ToLog());
      }
      WriteFeatureArchive(out, o->out);
    });
  }
  {
    struct Opts { std::string lat, out; double lambda = 1.0; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("cn", "Build confusion networks");
    cmd->add_option("--lat", o->lat, "Word lattice file")->required();
    cmd->add_option("--lambda", o->lambda, "Acoustic scale divisor");
    cmd->add_option("--out", o->out, "Output confusion networks")->required();
    cmd->callback([o] {
      ConfusionNetworkSet out;
      for (const auto &[u, lat] : ReadLatticeSet(o->lat)) out.emplace(u, BuildConfusionNetwork(lat, o->lambda));
      WriteConfusionNetworks(out, o->out);
    });
  }
  {
    struct Opts { std::string cn, words, out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("consensus", "Consensus hypothesis of confusion networks");
    cmd->add_option("--cn", o->cn, "Confusion network file")->required();
    cmd->add_option("--words", o->words, "Word symbol table (default: print ids)");
    cmd->add_option("--out", o->out, "Output transcripts")->required();
    cmd->callback([o] {
      std::optional<SymbolTable> words;
      if (!o->words.empty()) words = ReadSymbolTable(o->words);
      std::map<std::string, std::vector<int>> ids;
      for (const auto &[u, cn] : ReadConfusionNetworks(o->cn)) ids[u] = ConsensusHypothesis(cn);
      WriteTranscripts(ToWords(ids, words ? &*words : nullptr), o->out);
    });
  }
  {
    struct Opts { std::string lat, grid, ref, words, table; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("sweep", "Pick the acoustic scale minimizing consensus WER");
    cmd->add_option("--lat", o->lat, "Word lattice file")->required();
    cmd->add_option("--lambda-grid", o->grid, "Comma list or lo:step:hi of scales")->required();
    cmd->add_option("--ref", o->ref, "Reference transcripts")->required();
    cmd->add_option("--words", o->words, "Word symbol table");
    cmd->add_option("--table", o->table, "Write the (lambda, WER) table here");
    cmd->callback([o] {
      auto lats = ReadLatticeSet(o->lat);
      auto refs = ReadTranscripts(o->ref);
      std::optional<SymbolTable> words;
      if (!o->words.empty()) words = ReadSymbolTable(o->words);
      std::vector<double> grid;
      auto parts = Split(o->grid, ':');
      if (parts.size() == 3) {
        const double lo = ParseDouble(parts[0], "grid start"), step = ParseDouble(parts[1], "grid step"),
                     hi = ParseDouble(parts[2], "grid end");
        if (!(step > 0.0) || hi < lo) throw ParseError("invalid grid " + o->grid);
        for (long i = 0; lo + i * step <= hi + 1e-9; ++i) grid.push_back(lo + i * step);
      } else {
        for (const auto &v : Split(o->grid, ',')) grid.push_back(ParseDouble(v, "lambda"));
      }
      std::string table = "lambda\twer\n";
      double best_lambda = 0.0, best_wer = std::numeric_limits<double>::infinity();
      for (double lambda : grid) {
        std::map<std::string, std::vector<int>> ids;
        for (const auto &[u, lat] : lats) ids[u] = ConsensusHypothesis(BuildConfusionNetwork(lat, lambda));
        const double wer = WerScore(refs, ToWords(ids, words ? &*words : nullptr)).Wer();
        table += fmt::format("{}\t{}\n", lambda, wer);
        if (wer < best_wer) best_wer = wer, best_lambda = lambda;
      }
      std::cout << fmt::format("best lambda {} WER {:.2f}\n", best_lambda, best_wer);
      WriteText(o->table, table);
    });
  }
}

void AddFuse(CLI::App &root) {
  auto *group = root.add_subcommand("fuse", "System combination");
  group->require_subcommand(1);
  {
    struct Opts { std::string post, priors, out; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("scale", "State posteriors to pseudo log-likelihoods");
    cmd->add_option("--post", o->post, "Posterior archive")->required();
    cmd->add_option("--priors", o->priors, "State priors (whitespace-separated)")->required();
    cmd->add_option("--out", o->out, "Output archive")->required();
    cmd->callback([o] {
      auto priors = ReadVector(o->priors);
      WriteFeatureArchive(MapArchive(ReadFeatureArchive(o->post),
                                     [&](const FeatureMatrix &p) { return ScaledLoglike(p, priors); }),
                          o->out);
    });
  }
  {
    struct Opts { std::string a, b, out; double alpha = 0.5; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("posterior", "alpha * a + (1 - alpha) * b of log-score archives");
    cmd->add_option("--a", o->a, "First system's scores")->required();
    cmd->add_option("--b", o->b, "Second system's scores")->required();
    cmd->add_option("--alpha", o->alpha, "Weight of the first system")->required();
    cmd->add_option("--out", o->out, "Output archive")->required();
    cmd->callback([o] {
      auto a = ReadFeatureArchive(o->a);
      auto b = ReadFeatureArchive(o->b);
      if (a.size() != b.size()) throw ValidationError("archives hold different utterance sets");
      WriteFeatureArchive(MapArchive(a, [&](const FeatureMatrix &x) {
                            auto it = b.find(x.UtteranceId());
                            if (it == b.end()) throw ValidationError("utterance " + x.UtteranceId() + " missing");
                            return PosteriorFuse(x, it->second, o->alpha);
                          }),
                          o->out);
    });
  }
  {
    struct Opts { std::string lat_a, lat_b, out; double alpha = 0.5, lambda_a = 1.0, lambda_b = 1.0; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("lattice", "Merge two systems' lattices with weighted posteriors");
    cmd->add_option("--lat-a", o->lat_a, "First system's lattices")->required();
    cmd->add_option("--lat-b", o->lat_b, "Second system's lattices")->required();
    cmd->add_option("--alpha", o->alpha, "Weight of the first system")->required();
    cmd->add_option("--lambda-a", o->lambda_a, "Acoustic scale divisor of the first system");
    cmd->add_option("--lambda-b", o->lambda_b, "Acoustic scale divisor of the second system");
    cmd->add_option("--out", o->out, "Fused lattices")->required();
    cmd->callback([o] {
      auto a = ReadLatticeSet(o->lat_a);
      auto b = ReadLatticeSet(o->lat_b);
      if (a.size() != b.size()) throw ValidationError("lattice files hold different utterance sets");
      LatticeSet out;
      for (const auto &[u, la] : a) {
        auto it = b.find(u);
        if (it == b.end()) throw ValidationError("utterance " + u + " missing from " + o->lat_b);
        out.emplace(u, LatticeFuse(la, it->second, o->alpha, o->lambda_a, o->lambda_b));
      }
      WriteLatticeSet(out, o->out);
    });
  }
  {
    struct Opts {
      std::string grid = "0:0.05:1", mode = "lattice", lat_a, lat_b, ref, words, a, b, ali, table;
      double lambda_a = 1.0, lambda_b = 1.0;
    };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("alpha-search", "Grid search of the fusion weight on a dev set");
    cmd->add_option("--grid", o->grid, "lo:step:hi or comma list");
    cmd->add_option("--mode", o->mode, "lattice or posterior")->check(CLI::IsMember({"lattice", "posterior"}));
    cmd->add_option("--lat-a", o->lat_a, "lattice mode: first system's lattices");
    cmd->add_option("--lat-b", o->lat_b, "lattice mode: second system's lattices");
    cmd->add_option("--lambda-a", o->lambda_a, "lattice mode: first acoustic scale divisor");
    cmd->add_option("--lambda-b", o->lambda_b, "lattice mode: second acoustic scale divisor");
    cmd->add_option("--ref", o->ref, "lattice mode: reference transcripts");
    cmd->add_option("--words", o->words, "lattice mode: word symbol table");
    cmd->add_option("--a", o->a, "posterior mode: first system's scores");
    cmd->add_option("--b", o->b, "posterior mode: second system's scores");
    cmd->add_option("--ali", o->ali, "posterior mode: reference state alignments");
    cmd->add_option("--table", o->table, "Write the (alpha, WER) table here");
    cmd->callback([o] {
      auto grid = ParseGrid(o->grid);
      AlphaSearchResult r;
      if (o->mode == "lattice") {
        if (o->lat_a.empty() || o->lat_b.empty() || o->ref.empty())
          throw ValidationError("lattice mode needs --lat-a, --lat-b and --ref");
        std::optional<SymbolTable> words;
        if (!o->words.empty()) words = ReadSymbolTable(o->words);
        r = AlphaSearchLattice(ReadTranscripts(o->ref), ReadLatticeSet(o->lat_a), ReadLatticeSet(o->lat_b),
                               grid, o->lambda_a, o->lambda_b, words ? &*words : nullptr);
      } else {
        if (o->a.empty() || o->b.empty() || o->ali.empty())
          throw ValidationError("posterior mode needs --a, --b and --ali");
        r = AlphaSearchPosterior(ReadAlignments(o->ali), ReadFeatureArchive(o->a), ReadFeatureArchive(o->b), grid);
      }
      for (const auto &[alpha, rep] : r.table) std::cout << fmt::format("alpha {} WER {:.2f}\n", alpha, rep.Wer());
      std::cout << "best alpha " << r.best_alpha << "\n";
      WriteText(o->table, AlphaTable(r));
    });
  }
}

void AddAnalyze(CLI::App &root) {
  auto *group = root.add_subcommand("analyze", "Diagnostics and scoring");
  group->require_subcommand(1);
  {
    struct Opts { std::string feats, ali, label = "phone-state"; int hmm_position = -1; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("db-index", "Davies-Bouldin index of frames clustered by label");
    cmd->add_option("--feats", o->feats, "Vectors (e.g. phone posterior features)")->required();
    cmd->add_option("--ali", o->ali, "Alignments providing the labels")->required();
    cmd->add_option("--label", o->label, "phone-state, phone or state")
        ->check(CLI::IsMember({"phone-state", "phone", "state"}));
    cmd->add_option("--hmm-position", o->hmm_position, "Keep only this HMM position (-1: all)");
    cmd->callback([o] {
      auto feats = ReadFeatureArchive(o->feats);
      auto ali = ReadAlignments(o->ali);
      std::vector<std::vector<double>> vectors;
      std::vector<int> labels;
      for (const auto &[u, x] : feats) {
        auto it = ali.find(u);
        if (it == ali.end() || it->second.NumFrames() != x.NumFrames())
          throw ValidationError("utterance " + u + ": missing or mismatched alignment");
        for (std::size_t t = 0; t < x.NumFrames(); ++t) {
          const auto &l = it->second.labels[t];
          if (o->hmm_position >= 0 && l.hmm_position != o->hmm_position) continue;
          auto row = x.Row(t);
          vectors.emplace_back(row.begin(), row.end());
          labels.push_back(o->label == "state" ? l.state_id
                           : o->label == "phone" ? l.phone_id
                                                 : l.phone_id * 3 + l.hmm_position);
        }
      }
      std::cout << FormatDouble(DbIndex(vectors, labels)) << "\n";
    });
  }
  struct FerOpts { std::string feats, phones, ali, silence = "SIL", table; double epsilon = kDefaultPosteriorFloor, bin_width = 0.5; };
  auto add_fer_options = [](CLI::App *cmd, FerOpts &o) {
    cmd->add_option("--phone-feats", o.feats, "Log phone posterior archive")->required();
    cmd->add_option("--phones", o.phones, "Phone symbol table")->required();
    cmd->add_option("--ali", o.ali, "Reference alignments")->required();
    cmd->add_option("--silence", o.silence, "Comma list of silence phone symbols");
    cmd->add_option("--epsilon", o.epsilon, "Presence threshold");
    cmd->add_option("--table", o.table, "Write a tab-separated table here");
  };
  {
    auto o = std::make_shared<FerOpts>();
    auto *cmd = group->add_subcommand("fer", "Frame error rate and oracle frame error rate");
    add_fer_options(cmd, *o);
    cmd->callback([o] {
      auto in = LoadPhoneFeats(o->feats, o->phones, o->ali, o->silence, o->epsilon);
      FrameErrorCounts total;
      for (std::size_t u = 0; u < in.refs.size(); ++u)
        total += FrameErrorRates(in.posteriors[u], in.refs[u], in.masks[u]);
      std::cout << fmt::format("speech frames {} FER {:.4f} oracle FER {:.4f}\n", total.speech_frames,
                               total.Fer(), total.OracleFer());
      WriteText(o->table, fmt::format("speech_frames\tfer\toracle_fer\n{}\t{}\t{}\n", total.speech_frames,
                                      total.Fer(), total.OracleFer()));
    });
  }
  {
    auto o = std::make_shared<FerOpts>();
    auto *cmd = group->add_subcommand("lattice-stats", "Phone alternative and correct-phone distributions");
    add_fer_options(cmd, *o);
    cmd->add_option("--bin-width", o->bin_width, "Log-probability histogram bin width");
    cmd->callback([o] {
      auto in = LoadPhoneFeats(o->feats, o->phones, o->ali, o->silence, o->epsilon);
      auto r = LatticeStatistics(in.posteriors, in.refs, in.masks);
      std::cout << LatticeStatsText(r, o->bin_width);
      WriteText(o->table, LatticeStatsTable(r, o->bin_width));
    });
  }
  {
    struct Opts { std::string ref, hyp, table; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("wer", "Word error rate");
    cmd->add_option("--ref", o->ref, "Reference transcripts")->required();
    cmd->add_option("--hyp", o->hyp, "Hypothesis transcripts")->required();
    cmd->add_option("--table", o->table, "Write per-utterance counts here");
    cmd->callback([o] {
      auto r = WerScore(ReadTranscripts(o->ref), ReadTranscripts(o->hyp));
      std::cout << WerText(r);
      WriteText(o->table, WerTable(r));
    });
  }
  {
    struct Opts { std::string ref, base, sys, spk2utt, gains, table; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("werr", "Relative WER reduction, overall and per speaker");
    cmd->add_option("--ref", o->ref, "Reference transcripts")->required();
    cmd->add_option("--base", o->base, "Baseline hypotheses")->required();
    cmd->add_option("--sys", o->sys, "System hypotheses")->required();
    cmd->add_option("--spk2utt", o->spk2utt, "Speaker map for per-speaker rows");
    cmd->add_option("--gains", o->gains, "'<speaker> <likelihood gain>' lines to pair with WERR");
    cmd->add_option("--table", o->table, "Write a tab-separated table here");
    cmd->callback([o] {
      auto refs = ReadTranscripts(o->ref);
      auto base = WerScore(refs, ReadTranscripts(o->base));
      auto sys = WerScore(refs, ReadTranscripts(o->sys));
      std::optional<SpeakerMap> speakers;
      std::optional<std::map<std::string, double>> gains;
      if (!o->spk2utt.empty()) speakers = ReadSpeakerMap(o->spk2utt);
      if (!o->gains.empty()) gains = ReadScalarMap(o->gains);
      auto r = ComputeWerr(base, sys, speakers ? &*speakers : nullptr, gains ? &*gains : nullptr);
      std::cout << WerrText(r);
      WriteText(o->table, WerrTable(r));
    });
  }
  {
    struct Opts { std::string feats, ali, phones, group, out; int hmm_position = 1; };
    auto o = std::make_shared<Opts>();
    auto *cmd = group->add_subcommand("tsne-export", "Export labeled vectors of one phone group");
    cmd->add_option("--feats", o->feats, "Vectors")->required();
    cmd->add_option("--ali", o->ali, "Alignments")->required();
    cmd->add_option("--phones", o->phones, "Phone symbol table")->required();
    cmd->add_option("--group", o->group, "vowels, consonants-1 or consonants-2")->required();
    cmd->add_option("--hmm-position", o->hmm_position, "HMM position kept");
    cmd->add_option("--out", o->out, "Output table")->required();
    cmd->callback([o] {
      auto feats = ReadFeatureArchive(o->feats);
      auto rows = TsneSelect(feats, ReadAlignments(o->ali), ReadSymbolTable(o->phones), o->group, o->hmm_position);
      const std::size_t dim = feats.empty() ? 0 : feats.begin()->second.Dim();
      AtomicWriteFile(o->out, TsneTable(rows, dim));
    });
  }
}

void AddRun(CLI::App &root) {
  struct Opts { std::string config, manifest; };
  auto o = std::make_shared<Opts>();
  auto *cmd = root.add_subcommand("run", "Run a pipeline description");
  cmd->add_option("--config", o->config, "Pipeline file")->required();
  cmd->add_option("--manifest", o->manifest, "Write '<artifact> <sha256>' lines here")->required();
  cmd->callback([o] {
    auto config = ParsePipelineConfig(ReadFileToString(o->config));
    RunPipeline(config, [](const std::vector<std::string> &args) { return RunCli(args); }, o->manifest);
  });
}

}  // namespace

int RunCli(const std::vector<std::string> &args) {
  CLI::App app{"gmmdtk: GMM-derived speaker adaptation features and lattice diagnostics"};
  app.name("gmmdtk");
  app.require_subcommand(1);
  app.add_option_function<std::uint64_t>("--seed", [](std::uint64_t v) { g_seed = v; },
                                         "Seed of the random generator");
  app.add_option_function<int>("--threads", [](int n) { SetNumThreads(n); }, "Worker threads");
  app.add_option_function<std::string>(
      "--log-level", [](const std::string &l) { spdlog::set_level(spdlog::level::from_str(l)); },
      "trace, debug, info, warn, error or off");
  AddFrontend(app);
  AddGmm(app);
  AddAdapt(app);
  AddGmmd(app);
  AddIvector(app);
  AddLattice(app);
  AddFuse(app);
  AddAnalyze(app);
  AddRun(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  } catch (const std::exception &e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace gmmd
