// gmmd/map-adapt.h

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

#ifndef GMMD_MAP_ADAPT_H_
#define GMMD_MAP_ADAPT_H_

#include "gmmd/diag-gmm.h"
#include "gmmd/feature-matrix.h"

namespace gmmd {

/// MAP re-estimation of the means of every state GMM:
///
///   mu_hat = (tau * mu + sum_t gamma(t) o_t) / (tau + sum_t gamma(t))
///
/// States are assigned by the alignment (hard) and components by their
/// posterior inside that state's GMM (soft). Weights and variances are kept;
/// a component with tau + sum gamma == 0 keeps its prior mean.
AuxModel MapAdaptMeans(const AuxModel &prior, const FeatureArchive &feats,
                       const AlignmentArchive &ali, double tau);

/// Mean over aligned frames of log p_adapted(o_t | s_t) - log p_prior(o_t | s_t).
double LikelihoodGain(const AuxModel &prior, const AuxModel &adapted,
                      const FeatureArchive &feats, const AlignmentArchive &ali);

}  // namespace gmmd

#endif  // GMMD_MAP_ADAPT_H_
