// gmmd/lattice-functions.h

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

#ifndef GMMD_LATTICE_FUNCTIONS_H_
#define GMMD_LATTICE_FUNCTIONS_H_

#include <vector>

#include "gmmd/feature-matrix.h"
#include "gmmd/lattice.h"

namespace gmmd {

inline constexpr double kDefaultPosteriorFloor = 1e-9;

struct ArcPosteriorResult {
  std::vector<double> posteriors;  // indexed like Lattice::arcs
  double total_log_like = 0.0;     // log p(O) under the scaled arc weights
};

/// Arc posteriors by forward-backward in the log domain. An arc's weight is
/// acoustic_score / acoustic_scale + lm_score, so a path scores
/// p_ac^(1/lambda) * p_lm. Validates the lattice first.
ArcPosteriorResult ArcPosteriors(const Lattice &lat, double acoustic_scale);

/// Returns a copy of `lat` whose arcs carry the posteriors above.
Lattice AttachPosteriors(const Lattice &lat, double acoustic_scale);

/// Per-frame phone posteriors accumulated from arc posteriors. Column c
/// refers to phone_ids[c]; entries live in the probability domain and are
/// floored at `epsilon`.
struct PhonePosteriorMatrix {
  std::vector<int> phone_ids;
  double epsilon = kDefaultPosteriorFloor;
  FeatureMatrix probs;

  std::size_t NumFrames() const { return probs.NumFrames(); }
  /// Column index of a phone id, or -1.
  int Column(int phone_id) const;
  /// True when the phone received mass above the floor at frame t.
  bool Present(std::size_t t, std::size_t column) const {
    return probs(t, column) > epsilon;
  }

  /// Log-domain copy used for archive export.
  FeatureMatrix ToLog() const;
  static PhonePosteriorMatrix FromLog(const FeatureMatrix &log_probs,
                                      std::vector<int> phone_ids,
                                      double epsilon);
};

/// Phone posterior features over frames [0, num_frames). Pass
/// num_frames < 0 to use the lattice's end frame. Arcs carrying the null
/// symbol or a symbol missing from `phones` contribute nothing. If every
/// arc already has a posterior those are used instead of recomputing.
/// Throws ValidationError when an arc spans outside [0, num_frames).
PhonePosteriorMatrix PhonePosteriorFeatures(const Lattice &lat,
                                            const SymbolTable &phones,
                                            double acoustic_scale,
                                            double epsilon = kDefaultPosteriorFloor,
                                            int num_frames = -1);

/// Builds a confusion network. Posteriors already stored on every arc are
/// used as they are; otherwise they are computed with `acoustic_scale`.
///
/// Clustering: word arcs are visited by span midpoint; an arc joins an
/// existing same-word cluster it overlaps in time when no lattice path
/// contains both. Clusters then merge greedily, heaviest first, with the
/// heaviest time-overlapping cluster that keeps the bin order consistent
/// with the lattice's precedence order. Bins are emitted in precedence
/// order with mean arc midpoint breaking ties; a null entry takes the
/// residual mass of each bin.
ConfusionNetwork BuildConfusionNetwork(const Lattice &lat, double acoustic_scale);

/// Argmax symbol of each bin, lower id winning ties; bins won by the null
/// symbol emit nothing.
std::vector<int> ConsensusHypothesis(const ConfusionNetwork &cn);

}  // namespace gmmd

#endif  // GMMD_LATTICE_FUNCTIONS_H_
