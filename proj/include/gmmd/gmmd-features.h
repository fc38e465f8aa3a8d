// gmmd/gmmd-features.h

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

#ifndef GMMD_GMMD_FEATURES_H_
#define GMMD_GMMD_FEATURES_H_

#include <vector>

#include "gmmd/diag-gmm.h"
#include "gmmd/feature-matrix.h"

namespace gmmd {

/// GMM-derived features: row t holds the log-likelihood of x[t] under every
/// state of the auxiliary model (T x N). Speaker-independent and adapted
/// features differ only in the model passed in.
FeatureMatrix ExtractGmmd(const AuxModel &model, const FeatureMatrix &x);

/// Network input: the GMMD features concatenated with the base features,
/// then spliced with the given context offsets.
FeatureMatrix BuildGmmdInput(const FeatureMatrix &gmmd, const FeatureMatrix &base,
                             const std::vector<int> &offsets);

}  // namespace gmmd

#endif  // GMMD_GMMD_FEATURES_H_
