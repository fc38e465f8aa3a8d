// gmmd/diag-gmm.h

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

#ifndef GMMD_DIAG_GMM_H_
#define GMMD_DIAG_GMM_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gmmd/feature-matrix.h"

namespace gmmd {

/// Weighted mixture of diagonal-covariance Gaussians.
class DiagonalGmm {
 public:
  DiagonalGmm() = default;
  /// means and variances are num_components x dim, row-major.
  DiagonalGmm(std::vector<double> weights, std::vector<double> means,
              std::vector<double> variances);

  std::size_t NumComponents() const { return weights_.size(); }
  std::size_t Dim() const { return dim_; }

  double Weight(std::size_t m) const { return weights_[m]; }
  std::span<const double> Mean(std::size_t m) const {
    return {means_.data() + m * dim_, dim_};
  }
  std::span<const double> Variance(std::size_t m) const {
    return {vars_.data() + m * dim_, dim_};
  }
  const std::vector<double> &Weights() const { return weights_; }
  const std::vector<double> &Means() const { return means_; }
  const std::vector<double> &Variances() const { return vars_; }

  void SetMean(std::size_t m, std::span<const double> mean);

  /// log w_m + log N(o; mu_m, var_m) for every component.
  std::vector<double> ComponentLogDensities(std::span<const double> o) const;
  /// log sum_m w_m N(o; mu_m, var_m), via log-sum-exp.
  double LogLikelihood(std::span<const double> o) const;
  /// Responsibilities of the components for o; they sum to one.
  std::vector<double> ComponentPosteriors(std::span<const double> o) const;

  /// Throws ValidationError unless weights are positive and sum to one
  /// within 1e-9, variances are positive and all values finite.
  void Validate() const;

  bool operator==(const DiagonalGmm &o) const {
    return weights_ == o.weights_ && means_ == o.means_ && vars_ == o.vars_;
  }

 private:
  void CheckDim(std::span<const double> o) const;
  void ComputeGconsts();

  std::size_t dim_ = 0;
  std::vector<double> weights_;
  std::vector<double> means_;
  std::vector<double> vars_;
  std::vector<double> inv_vars_;
  std::vector<double> gconsts_;  // log w - 0.5 (d log 2pi + sum log var)
};

struct EmOptions {
  int num_components = 1;
  int num_iters = 10;
  /// Elementwise variance floor; when unset, 1e-3 times the global data
  /// variance of each dimension.
  std::optional<double> var_floor;
  std::uint64_t seed = 0;
};

/// Initial model for EM: means are data frames chosen by seeded k-means++
/// sampling (the global mean when there is one component); variances are
/// the floored global variance and weights are uniform.
DiagonalGmm InitGmm(const FeatureMatrix &data, const EmOptions &opts);

/// Maximum-likelihood EM from InitGmm. If `loglike_trace` is given it gets
/// the total data log-likelihood of the initializer and after every
/// iteration. A component left with no responsibility mass is re-seeded on
/// the worst-explained frame (with a warning). Throws on empty data or when
/// there are fewer frames than components.
DiagonalGmm EmTrain(const FeatureMatrix &data, const EmOptions &opts,
                    std::vector<double> *loglike_trace = nullptr);

/// Total log-likelihood of all frames.
double TotalLogLikelihood(const DiagonalGmm &gmm, const FeatureMatrix &data);

struct StateInfo {
  int phone_id = 0;
  int hmm_position = 0;
  bool operator==(const StateInfo &) const = default;
};

/// Auxiliary model: one GMM per HMM state, indexed by state id.
struct AuxModel {
  std::vector<DiagonalGmm> states;
  std::vector<StateInfo> info;

  std::size_t NumStates() const { return states.size(); }
  std::size_t Dim() const { return states.empty() ? 0 : states.front().Dim(); }
  /// Throws ValidationError unless N >= 1, the GMMs share a dimension and
  /// each one is valid.
  void Validate() const;
  bool operator==(const AuxModel &) const = default;
};

/// Per-state log-likelihoods of one frame.
std::vector<double> StateLoglikes(const AuxModel &model, std::span<const double> o);

/// Trains one GMM per state on the frames the alignment assigns to it. A
/// state with fewer frames than requested components gets one component per
/// frame; a state id below num_states that never occurs is an error.
/// num_states <= 0 means "largest aligned state id + 1".
AuxModel TrainAuxModel(const FeatureArchive &feats, const AlignmentArchive &ali,
                       const EmOptions &opts, int num_states = 0);

/// Throws ValidationError unless every feature utterance has an alignment
/// of the same length. Extra alignments are ignored.
void CheckAlignmentsCover(const FeatureArchive &feats, const AlignmentArchive &ali);

}  // namespace gmmd

#endif  // GMMD_DIAG_GMM_H_
