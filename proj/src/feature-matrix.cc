// feature-matrix.cc

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

#include "gmmd/feature-matrix.h"

#include <cmath>

#include "gmmd/common.h"

namespace gmmd {

void FeatureMatrix::AppendRow(std::span<const double> row) {
  if (row.size() != dim_)
    throw ValidationError("utterance " + utterance_id_ + ": frame of dimension " +
                          std::to_string(row.size()) + ", expected " +
                          std::to_string(dim_));
  data_.insert(data_.end(), row.begin(), row.end());
  ++num_frames_;
}

void FeatureMatrix::CheckFinite() const {
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k]))
      throw ValidationError("utterance " + utterance_id_ +
                            ": non-finite value at frame " +
                            std::to_string(k / (dim_ ? dim_ : 1)));
  }
}

}  // namespace gmmd
