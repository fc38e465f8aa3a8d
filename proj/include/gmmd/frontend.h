// gmmd/frontend.h

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

#ifndef GMMD_FRONTEND_H_
#define GMMD_FRONTEND_H_

#include <string>
#include <vector>

#include "gmmd/feature-matrix.h"

namespace gmmd {

/// Parses a context specification such as "-10,-5..5,10" into the ascending
/// offset list -10,-5,-4,...,4,5,10. Throws ParseError on malformed input.
std::vector<int> ParseOffsets(const std::string &spec);

/// Frame t of the output is x[t+o] for each offset o concatenated, indices
/// clamped to the first/last frame.
FeatureMatrix Splice(const FeatureMatrix &x, const std::vector<int> &offsets);

/// out_dim x in_dim orthonormal DCT-II basis, row-major.
std::vector<double> DctMatrix(std::size_t out_dim, std::size_t in_dim);

/// Keeps the first out_dim orthonormal DCT-II coefficients of every frame.
FeatureMatrix DctReduce(const FeatureMatrix &x, std::size_t out_dim);

/// Frame-wise concatenation [a[t], b[t]].
FeatureMatrix ConcatFeatures(const FeatureMatrix &a, const FeatureMatrix &b);

/// Per-utterance mean and variance normalization of every dimension.
FeatureMatrix NormalizeMeanVariance(const FeatureMatrix &x);

}  // namespace gmmd

#endif  // GMMD_FRONTEND_H_
