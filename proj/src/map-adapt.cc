// map-adapt.cc

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

#include "gmmd/map-adapt.h"

#include <cmath>

#include "gmmd/common.h"
#include "gmmd/parallel.h"

namespace gmmd {

namespace {

// Occupancy and first-order sums for every (state, component).
struct MeanStats {
  std::vector<std::vector<double>> occ;    // [state][component]
  std::vector<std::vector<double>> first;  // [state][component * dim + i]

  explicit MeanStats(const AuxModel &model) {
    for (const auto &g : model.states) {
      occ.emplace_back(g.NumComponents(), 0.0);
      first.emplace_back(g.NumComponents() * g.Dim(), 0.0);
    }
  }
  void Add(const MeanStats &o) {
    for (std::size_t s = 0; s < occ.size(); ++s) {
      for (std::size_t k = 0; k < occ[s].size(); ++k) occ[s][k] += o.occ[s][k];
      for (std::size_t k = 0; k < first[s].size(); ++k) first[s][k] += o.first[s][k];
    }
  }
};

void CheckStates(const AuxModel &model, const AlignmentTrack &track) {
  for (const auto &l : track.labels)
    if (l.state_id < 0 || static_cast<std::size_t>(l.state_id) >= model.NumStates())
      throw ValidationError("utterance " + track.utterance_id + ": state id " +
                            std::to_string(l.state_id) + " out of range");
}

}  // namespace

AuxModel MapAdaptMeans(const AuxModel &prior, const FeatureArchive &feats,
                       const AlignmentArchive &ali, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be finite and >= 0");
  prior.Validate();
  CheckAlignmentsCover(feats, ali);
  const std::size_t d = prior.Dim();

  std::vector<const FeatureMatrix *> utts;
  for (const auto &[utt, x] : feats) {
    if (x.Dim() != d)
      throw ValidationError("utterance " + utt + " has dimension " + std::to_string(x.Dim()) +
                            ", model has " + std::to_string(d));
    CheckStates(prior, ali.at(utt));
    utts.push_back(&x);
  }

  std::vector<MeanStats> per_utt(utts.size(), MeanStats(prior));
  ParallelFor(utts.size(), [&](std::size_t u) {
    const FeatureMatrix &x = *utts[u];
    const auto &labels = ali.at(x.UtteranceId()).labels;
    MeanStats &st = per_utt[u];
    for (std::size_t t = 0; t < x.NumFrames(); ++t) {
      const int s = labels[t].state_id;
      auto o = x.Row(t);
      auto gamma = prior.states[s].ComponentPosteriors(o);
      for (std::size_t m = 0; m < gamma.size(); ++m) {
        st.occ[s][m] += gamma[m];
        for (std::size_t i = 0; i < d; ++i) st.first[s][m * d + i] += gamma[m] * o[i];
      }
    }
  });
  MeanStats total(prior);
  for (const auto &st : per_utt) total.Add(st);

  AuxModel adapted = prior;
  std::vector<double> mean(d);
  for (std::size_t s = 0; s < prior.NumStates(); ++s) {
    const DiagonalGmm &g = prior.states[s];
    for (std::size_t m = 0; m < g.NumComponents(); ++m) {
      // No occupancy leaves the prior mean bit-for-bit.
      if (!(total.occ[s][m] > 0.0)) continue;
      const double denom = tau + total.occ[s][m];
      auto mu = g.Mean(m);
      for (std::size_t i = 0; i < d; ++i)
        mean[i] = (tau * mu[i] + total.first[s][m * d + i]) / denom;
      adapted.states[s].SetMean(m, mean);
    }
  }
  return adapted;
}

double LikelihoodGain(const AuxModel &prior, const AuxModel &adapted,
                      const FeatureArchive &feats, const AlignmentArchive &ali) {
  if (prior.NumStates() != adapted.NumStates() || prior.Dim() != adapted.Dim())
    throw ValidationError("models differ in shape: " + std::to_string(prior.NumStates()) + "x" +
                          std::to_string(prior.Dim()) + " vs " +
                          std::to_string(adapted.NumStates()) + "x" +
                          std::to_string(adapted.Dim()));
  CheckAlignmentsCover(feats, ali);
  std::vector<const FeatureMatrix *> utts;
  for (const auto &[utt, x] : feats) {
    CheckStates(prior, ali.at(utt));
    utts.push_back(&x);
  }
  std::vector<double> sums(utts.size(), 0.0);
  ParallelFor(utts.size(), [&](std::size_t u) {
    const FeatureMatrix &x = *utts[u];
    const auto &labels = ali.at(x.UtteranceId()).labels;
    for (std::size_t t = 0; t < x.NumFrames(); ++t) {
      const int s = labels[t].state_id;
      sums[u] += adapted.states[s].LogLikelihood(x.Row(t)) -
                 prior.states[s].LogLikelihood(x.Row(t));
    }
  });
  double total = 0.0;
  std::size_t frames = 0;
  for (std::size_t u = 0; u < utts.size(); ++u) {
    total += sums[u];
    frames += utts[u]->NumFrames();
  }
  return frames ? total / frames : 0.0;
}

}  // namespace gmmd
