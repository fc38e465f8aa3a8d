// fusion.cc

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

#include "gmmd/fusion.h"

#include <cmath>

#include "gmmd/common.h"
#include "gmmd/lattice-functions.h"
#include "gmmd/parallel.h"
#include "gmmd/text-utils.h"

namespace gmmd {

FeatureMatrix ScaledLoglike(const FeatureMatrix &posteriors, const std::vector<double> &priors) {
  if (priors.size() != posteriors.Dim())
    throw ValidationError("utterance " + posteriors.UtteranceId() + ": " +
                          std::to_string(priors.size()) + " priors for " +
                          std::to_string(posteriors.Dim()) + " states");
  std::vector<double> log_priors(priors.size());
  for (std::size_t i = 0; i < priors.size(); ++i) {
    if (!(priors[i] > 0.0) || !std::isfinite(priors[i]))
      throw ValidationError("state prior " + std::to_string(i) + " must be positive");
    log_priors[i] = std::log(priors[i]);
  }
  FeatureMatrix out = posteriors;
  for (std::size_t t = 0; t < out.NumFrames(); ++t) {
    auto row = out.Row(t);
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw ValidationError("negative posterior in utterance " + out.UtteranceId());
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("utterance " + out.UtteranceId() + ": posterior row " +
                            std::to_string(t) + " sums to " + std::to_string(sum));
    for (std::size_t i = 0; i < row.size(); ++i) row[i] = std::log(row[i]) - log_priors[i];
  }
  return out;
}

namespace {

void CheckAlpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0, 1]");
}

}  // namespace

FeatureMatrix PosteriorFuse(const FeatureMatrix &a, const FeatureMatrix &b, double alpha) {
  CheckAlpha(alpha);
  if (a.NumFrames() != b.NumFrames() || a.Dim() != b.Dim())
    throw ValidationError("utterance " + a.UtteranceId() + ": fusing " +
                          std::to_string(a.NumFrames()) + "x" + std::to_string(a.Dim()) +
                          " with " + std::to_string(b.NumFrames()) + "x" +
                          std::to_string(b.Dim()));
  const double wb = 1.0 - alpha;
  const double wa = 1.0 - wb;
  FeatureMatrix out = a;
  for (std::size_t t = 0; t < a.NumFrames(); ++t) {
    auto row = out.Row(t);
    auto ra = a.Row(t), rb = b.Row(t);
    // Equal inputs are passed through so that fusing a system with itself is exact.
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = ra[i] == rb[i] ? ra[i] : wa * ra[i] + wb * rb[i];
  }
  return out;
}

Lattice LatticeFuse(const Lattice &a, const Lattice &b, double alpha, double acoustic_scale_a,
                    double acoustic_scale_b) {
  CheckAlpha(alpha);
  if (a.utterance_id != b.utterance_id)
    throw ValidationError("cannot fuse lattices of utterances " + a.utterance_id + " and " +
                          b.utterance_id);
  const auto post_a = ArcPosteriors(a, acoustic_scale_a).posteriors;
  const auto post_b = ArcPosteriors(b, acoustic_scale_b).posteriors;
  if (a.StartFrame() != b.StartFrame() || a.EndFrame() != b.EndFrame())
    throw ValidationError("lattices of " + a.utterance_id + " cover different frame ranges");
  const double wb = 1.0 - alpha;
  const double wa = 1.0 - wb;

  Lattice out;
  out.utterance_id = a.utterance_id;
  out.start = a.start;
  out.end = a.end;
  std::vector<int> remap(b.num_nodes);
  int next = a.num_nodes;
  for (int n = 0; n < b.num_nodes; ++n) {
    if (n == b.start) remap[n] = a.start;
    else if (n == b.end) remap[n] = a.end;
    else remap[n] = next++;
  }
  out.num_nodes = next;
  for (std::size_t k = 0; k < a.arcs.size(); ++k) {
    LatticeArc arc = a.arcs[k];
    arc.posterior = wa * post_a[k];
    out.arcs.push_back(arc);
  }
  for (std::size_t k = 0; k < b.arcs.size(); ++k) {
    LatticeArc arc = b.arcs[k];
    arc.from = remap[arc.from];
    arc.to = remap[arc.to];
    arc.posterior = wb * post_b[k];
    out.arcs.push_back(arc);
  }
  out.Validate();
  return out;
}

double LatticePosteriorMass(const Lattice &lat) {
  double mass = 0.0;
  for (const auto &arc : lat.arcs) {
    if (!arc.posterior)
      throw ValidationError("lattice " + lat.utterance_id + " has arcs without posteriors");
    if (arc.from == lat.start) mass += *arc.posterior;
  }
  return mass;
}

AlphaSearchResult AlphaSearchReports(const std::vector<double> &grid,
                                     const std::function<WerReport(double)> &score) {
  if (grid.empty()) throw ValidationError("alpha search needs a non-empty grid");
  for (double alpha : grid) CheckAlpha(alpha);
  std::vector<WerReport> reports(grid.size());
  ParallelFor(grid.size(), [&](std::size_t g) { reports[g] = score(grid[g]); });

  AlphaSearchResult result;
  std::size_t best = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result.table.emplace_back(grid[g], reports[g]);
    const std::size_t eg = reports[g].total.Errors(), eb = reports[best].total.Errors();
    const double dg = std::abs(grid[g] - 0.5), db = std::abs(grid[best] - 0.5);
    if (eg < eb || (eg == eb && (dg < db || (dg == db && grid[g] < grid[best])))) best = g;
  }
  result.best_alpha = grid[best];
  return result;
}

AlphaSearchResult AlphaSearch(const TranscriptSet &refs, const std::vector<double> &grid,
                              const std::function<TranscriptSet(double)> &decode) {
  if (refs.empty()) throw ValidationError("alpha search needs reference transcripts");
  return AlphaSearchReports(grid, [&](double alpha) { return WerScore(refs, decode(alpha)); });
}

AlphaSearchResult AlphaSearchLattice(const TranscriptSet &refs, const LatticeSet &a,
                                     const LatticeSet &b, const std::vector<double> &grid,
                                     double acoustic_scale_a, double acoustic_scale_b,
                                     const SymbolTable *words) {
  for (const auto &[utt, ref] : refs)
    if (!a.count(utt) || !b.count(utt))
      throw ValidationError("no lattice pair for utterance " + utt);
  return AlphaSearch(refs, grid, [&](double alpha) {
    TranscriptSet hyps;
    for (const auto &[utt, ref] : refs) {
      auto fused = LatticeFuse(a.at(utt), b.at(utt), alpha, acoustic_scale_a, acoustic_scale_b);
      auto &hyp = hyps[utt];
      for (int id : ConsensusHypothesis(BuildConfusionNetwork(fused, 1.0)))
        hyp.push_back(words ? words->Symbol(id) : std::to_string(id));
    }
    return hyps;
  });
}

AlphaSearchResult AlphaSearchPosterior(const AlignmentArchive &refs, const FeatureArchive &a,
                                       const FeatureArchive &b, const std::vector<double> &grid) {
  if (refs.empty()) throw ValidationError("alpha search needs reference alignments");
  for (const auto &[utt, track] : refs) {
    if (!a.count(utt) || !b.count(utt))
      throw ValidationError("no score matrix pair for utterance " + utt);
    if (a.at(utt).NumFrames() != track.NumFrames())
      throw ValidationError("utterance " + utt + ": " + std::to_string(a.at(utt).NumFrames()) +
                            " score frames, " + std::to_string(track.NumFrames()) +
                            " reference frames");
  }
  return AlphaSearchReports(grid, [&](double alpha) {
    WerReport report;
    for (const auto &[utt, track] : refs) {
      const auto best = FrameArgmax(PosteriorFuse(a.at(utt), b.at(utt), alpha));
      EditCounts counts;
      counts.ref_words = track.NumFrames();
      for (std::size_t t = 0; t < best.size(); ++t)
        counts.substitutions += best[t] != track.labels[t].state_id;
      report.per_utterance[utt] = counts;
      report.total += counts;
    }
    return report;
  });
}

std::vector<double> ParseGrid(const std::string &spec) {
  std::vector<double> grid;
  auto parts = Split(spec, ':');
  if (parts.size() == 3) {
    const double lo = ParseDouble(parts[0], "grid start");
    const double step = ParseDouble(parts[1], "grid step");
    const double hi = ParseDouble(parts[2], "grid end");
    if (!(step > 0.0) || hi < lo) throw ParseError("invalid grid " + spec);
    const long count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i)
      grid.push_back(std::round((lo + i * step) * 1e12) / 1e12);
  } else if (parts.size() == 1) {
    for (const auto &item : Split(spec, ',')) grid.push_back(ParseDouble(item, "grid value"));
  } else {
    throw ParseError("invalid grid " + spec);
  }
  for (double v : grid)
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError("grid value outside [0, 1] in " + spec);
  return grid;
}

std::vector<int> FrameArgmax(const FeatureMatrix &scores) {
  std::vector<int> out(scores.NumFrames(), 0);
  for (std::size_t t = 0; t < scores.NumFrames(); ++t) {
    auto row = scores.Row(t);
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i] > row[out[t]]) out[t] = static_cast<int>(i);
  }
  return out;
}

}  // namespace gmmd
