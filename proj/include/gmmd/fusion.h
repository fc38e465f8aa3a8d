// gmmd/fusion.h

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

#ifndef GMMD_FUSION_H_
#define GMMD_FUSION_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmmd/analysis.h"
#include "gmmd/feature-matrix.h"
#include "gmmd/lattice.h"

namespace gmmd {

/// Pseudo log-likelihoods from state posteriors: log post - log prior.
/// Rows must sum to one within 1e-6 and priors be strictly positive.
FeatureMatrix ScaledLoglike(const FeatureMatrix &posteriors, const std::vector<double> &priors);

/// Frame-synchronous combination alpha * a + (1 - alpha) * b of two
/// log-score matrices with the same state set.
///
/// The weight on `b` is fl(1 - alpha) and the weight on `a` is
/// fl(1 - fl(1 - alpha)), which differs from alpha by at most one ulp and
/// makes PosteriorFuse(a, b, alpha) == PosteriorFuse(b, a, 1 - alpha) hold
/// bit for bit.
FeatureMatrix PosteriorFuse(const FeatureMatrix &a, const FeatureMatrix &b, double alpha);

/// Two-system lattice combination. Each input gets its own arc posteriors
/// (with its own acoustic scale), scaled by alpha and 1 - alpha. Node ids of
/// `b` are shifted past those of `a` and the two start nodes and the two end
/// nodes are identified, so arcs of `a` keep their indices. Arcs keep their
/// scores and carry the scaled posteriors.
Lattice LatticeFuse(const Lattice &a, const Lattice &b, double alpha, double acoustic_scale_a,
                    double acoustic_scale_b);

/// Sum of the posteriors of the arcs leaving the start node.
double LatticePosteriorMass(const Lattice &lat);

struct AlphaSearchResult {
  double best_alpha = 0.5;
  std::vector<std::pair<double, WerReport>> table;  // grid order
};

/// Evaluates `decode(alpha)` against `refs` at every grid point and returns
/// the lowest-WER alpha; ties go to the point closest to 0.5, then to the
/// smaller alpha.
AlphaSearchResult AlphaSearch(const TranscriptSet &refs, const std::vector<double> &grid,
                              const std::function<TranscriptSet(double)> &decode);

/// Same selection rule over arbitrary error reports, `score(alpha)`.
AlphaSearchResult AlphaSearchReports(const std::vector<double> &grid,
                                     const std::function<WerReport(double)> &score);

/// Lattice mode: consensus of the fused lattice per utterance.
AlphaSearchResult AlphaSearchLattice(const TranscriptSet &refs, const LatticeSet &a,
                                     const LatticeSet &b, const std::vector<double> &grid,
                                     double acoustic_scale_a, double acoustic_scale_b,
                                     const SymbolTable *words);

/// Posterior mode: frames whose fused-score argmax differs from the
/// reference state count as substitutions; each frame is one reference
/// token, so the reported WER is a frame error rate.
AlphaSearchResult AlphaSearchPosterior(const AlignmentArchive &refs, const FeatureArchive &a,
                                       const FeatureArchive &b, const std::vector<double> &grid);

/// Parses "lo:step:hi" or a comma list; every value must lie in [0, 1].
std::vector<double> ParseGrid(const std::string &spec);

/// Per-frame argmax (lowest index on ties).
std::vector<int> FrameArgmax(const FeatureMatrix &scores);

}  // namespace gmmd

#endif  // GMMD_FUSION_H_
