// gmmd-features.cc

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

#include "gmmd/gmmd-features.h"

#include "gmmd/common.h"
#include "gmmd/frontend.h"

namespace gmmd {

FeatureMatrix ExtractGmmd(const AuxModel &model, const FeatureMatrix &x) {
  if (x.Dim() != model.Dim())
    throw ValidationError("utterance " + x.UtteranceId() + " has dimension " +
                          std::to_string(x.Dim()) + ", auxiliary model has " +
                          std::to_string(model.Dim()));
  FeatureMatrix out(x.UtteranceId(), x.NumFrames(), model.NumStates());
  for (std::size_t t = 0; t < x.NumFrames(); ++t) {
    auto row = out.Row(t);
    for (std::size_t s = 0; s < model.NumStates(); ++s)
      row[s] = model.states[s].LogLikelihood(x.Row(t));
  }
  return out;
}

FeatureMatrix BuildGmmdInput(const FeatureMatrix &gmmd, const FeatureMatrix &base,
                             const std::vector<int> &offsets) {
  return Splice(ConcatFeatures(gmmd, base), offsets);
}

}  // namespace gmmd
