// frontend.cc

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

#include "gmmd/frontend.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gmmd/common.h"
#include "gmmd/text-utils.h"

namespace gmmd {

std::vector<int> ParseOffsets(const std::string &spec) {
  std::vector<int> offsets;
  for (const auto &item : Split(spec, ',')) {
    auto dots = item.find("..");
    if (dots == std::string::npos) {
      offsets.push_back(ParseInt(item, "context offset"));
      continue;
    }
    int lo = ParseInt(item.substr(0, dots), "context range start");
    int hi = ParseInt(item.substr(dots + 2), "context range end");
    if (hi < lo) throw ParseError("empty context range " + item);
    for (int o = lo; o <= hi; ++o) offsets.push_back(o);
  }
  if (offsets.empty()) throw ParseError("empty context specification");
  for (std::size_t i = 1; i < offsets.size(); ++i)
    if (offsets[i] <= offsets[i - 1])
      throw ParseError("context offsets must be strictly ascending: " + spec);
  return offsets;
}

FeatureMatrix Splice(const FeatureMatrix &x, const std::vector<int> &offsets) {
  if (offsets.empty()) throw ValidationError("splice needs at least one offset");
  if (!std::is_sorted(offsets.begin(), offsets.end()))
    throw ValidationError("splice offsets must be ascending");
  if (x.Empty()) throw ValidationError("cannot splice empty utterance " + x.UtteranceId());
  const std::size_t d = x.Dim();
  const long last = static_cast<long>(x.NumFrames()) - 1;
  FeatureMatrix out(x.UtteranceId(), x.NumFrames(), d * offsets.size());
  for (std::size_t t = 0; t < x.NumFrames(); ++t) {
    auto row = out.Row(t);
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      long src = std::clamp(static_cast<long>(t) + offsets[k], 0L, last);
      auto in = x.Row(src);
      std::copy(in.begin(), in.end(), row.begin() + k * d);
    }
  }
  return out;
}

std::vector<double> DctMatrix(std::size_t out_dim, std::size_t in_dim) {
  std::vector<double> basis(out_dim * in_dim);
  for (std::size_t k = 0; k < out_dim; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / in_dim);
    for (std::size_t n = 0; n < in_dim; ++n)
      basis[k * in_dim + n] = scale * std::cos(std::numbers::pi * (n + 0.5) * k / in_dim);
  }
  return basis;
}

FeatureMatrix DctReduce(const FeatureMatrix &x, std::size_t out_dim) {
  const std::size_t d = x.Dim();
  if (out_dim == 0) throw ValidationError("DCT output dimension must be positive");
  if (out_dim > d)
    throw ValidationError("DCT output dimension " + std::to_string(out_dim) +
                          " exceeds input dimension " + std::to_string(d));
  const auto basis = DctMatrix(out_dim, d);
  FeatureMatrix out(x.UtteranceId(), x.NumFrames(), out_dim);
  for (std::size_t t = 0; t < x.NumFrames(); ++t) {
    auto in = x.Row(t);
    auto row = out.Row(t);
    for (std::size_t k = 0; k < out_dim; ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < d; ++n) acc += basis[k * d + n] * in[n];
      row[k] = acc;
    }
  }
  return out;
}

FeatureMatrix ConcatFeatures(const FeatureMatrix &a, const FeatureMatrix &b) {
  if (a.UtteranceId() != b.UtteranceId())
    throw ValidationError("cannot concatenate utterances " + a.UtteranceId() + " and " +
                          b.UtteranceId());
  if (a.NumFrames() != b.NumFrames())
    throw ValidationError("utterance " + a.UtteranceId() + ": concatenating " +
                          std::to_string(a.NumFrames()) + " and " +
                          std::to_string(b.NumFrames()) + " frames");
  FeatureMatrix out(a.UtteranceId(), a.NumFrames(), a.Dim() + b.Dim());
  for (std::size_t t = 0; t < a.NumFrames(); ++t) {
    auto row = out.Row(t);
    auto ra = a.Row(t), rb = b.Row(t);
    std::copy(ra.begin(), ra.end(), row.begin());
    std::copy(rb.begin(), rb.end(), row.begin() + a.Dim());
  }
  return out;
}

FeatureMatrix NormalizeMeanVariance(const FeatureMatrix &x) {
  FeatureMatrix out = x;
  const std::size_t n = x.NumFrames();
  if (n == 0) return out;
  for (std::size_t i = 0; i < x.Dim(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t t = 0; t < n; ++t) mean += x(t, i);
    mean /= n;
    for (std::size_t t = 0; t < n; ++t) sq += (x(t, i) - mean) * (x(t, i) - mean);
    const double sd = std::sqrt(sq / n);
    for (std::size_t t = 0; t < n; ++t)
      out(t, i) = sd > 0.0 ? (x(t, i) - mean) / sd : x(t, i) - mean;
  }
  return out;
}

}  // namespace gmmd
