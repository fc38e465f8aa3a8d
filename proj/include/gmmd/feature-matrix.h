// gmmd/feature-matrix.h

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

#ifndef GMMD_FEATURE_MATRIX_H_
#define GMMD_FEATURE_MATRIX_H_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gmmd {

/// Per-utterance sequence of frames sharing one dimension, stored row-major.
/// A zero-dimension matrix is allowed in memory (it is the identity operand
/// of feature concatenation).
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::string utterance_id, std::size_t dim)
      : utterance_id_(std::move(utterance_id)), dim_(dim) {}
  FeatureMatrix(std::string utterance_id, std::size_t num_frames,
                std::size_t dim, double fill = 0.0)
      : utterance_id_(std::move(utterance_id)),
        dim_(dim),
        num_frames_(num_frames),
        data_(num_frames * dim, fill) {}

  const std::string &UtteranceId() const { return utterance_id_; }
  void SetUtteranceId(std::string id) { utterance_id_ = std::move(id); }
  std::size_t Dim() const { return dim_; }
  std::size_t NumFrames() const { return num_frames_; }
  bool Empty() const { return num_frames_ == 0; }

  std::span<const double> Row(std::size_t t) const {
    return {data_.data() + t * dim_, dim_};
  }
  std::span<double> Row(std::size_t t) { return {data_.data() + t * dim_, dim_}; }
  double operator()(std::size_t t, std::size_t i) const {
    return data_[t * dim_ + i];
  }
  double &operator()(std::size_t t, std::size_t i) { return data_[t * dim_ + i]; }

  /// Appends one frame; throws ValidationError when its size differs from Dim().
  void AppendRow(std::span<const double> row);

  const std::vector<double> &Data() const { return data_; }

  /// Throws ValidationError on a non-finite entry.
  void CheckFinite() const;

  bool operator==(const FeatureMatrix &other) const = default;

 private:
  std::string utterance_id_;
  std::size_t dim_ = 0;
  std::size_t num_frames_ = 0;
  std::vector<double> data_;
};

struct AlignmentLabel {
  int state_id = 0;
  int phone_id = 0;
  int hmm_position = 0;  // 0, 1 or 2
  bool operator==(const AlignmentLabel &) const = default;
};

struct AlignmentTrack {
  std::string utterance_id;
  std::vector<AlignmentLabel> labels;
  std::size_t NumFrames() const { return labels.size(); }
  bool operator==(const AlignmentTrack &) const = default;
};

// Ordered maps give the lexicographic utterance order used everywhere.
using FeatureArchive = std::map<std::string, FeatureMatrix>;
using AlignmentArchive = std::map<std::string, AlignmentTrack>;
using WordSequence = std::vector<std::string>;
using TranscriptSet = std::map<std::string, WordSequence>;
/// speaker id -> utterance ids
using SpeakerMap = std::map<std::string, std::vector<std::string>>;

}  // namespace gmmd

#endif  // GMMD_FEATURE_MATRIX_H_
