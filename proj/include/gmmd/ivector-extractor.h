// gmmd/ivector-extractor.h

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

#ifndef GMMD_IVECTOR_EXTRACTOR_H_
#define GMMD_IVECTOR_EXTRACTOR_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmmd/diag-gmm.h"
#include "gmmd/feature-matrix.h"

namespace gmmd {

/// Zeroth-order counts and centered first-order sums per UBM component.
struct BaumWelchStats {
  Eigen::VectorXd counts;       // K
  Eigen::MatrixXd first_order;  // K x D, row k = sum_t gamma_k(t) (o_t - mu_k)

  BaumWelchStats() = default;
  BaumWelchStats(std::size_t num_components, std::size_t dim)
      : counts(Eigen::VectorXd::Zero(num_components)),
        first_order(Eigen::MatrixXd::Zero(num_components, dim)) {}

  BaumWelchStats &operator+=(const BaumWelchStats &o);
};

/// UBM plus one D x M loading matrix per component; a speaker's means are
/// mu_k + T_k w.
struct TotalVariability {
  DiagonalGmm ubm;
  std::vector<Eigen::MatrixXd> loadings;

  std::size_t NumComponents() const { return loadings.size(); }
  std::size_t FeatureDim() const { return ubm.Dim(); }
  std::size_t IvectorDim() const { return loadings.empty() ? 0 : loadings.front().cols(); }
  /// Throws ValidationError on inconsistent shapes or non-finite loadings.
  void Validate() const;
};

BaumWelchStats AccumulateStats(const DiagonalGmm &ubm, const FeatureMatrix &x);

/// L = I + sum_k N_k T_k' inv(Sigma_k) T_k.
Eigen::MatrixXd PosteriorPrecision(const TotalVariability &tv, const BaumWelchStats &stats);

/// Posterior mean of the latent factor: w = inv(L) sum_k T_k' inv(Sigma_k) F_k.
Eigen::VectorXd ExtractIvector(const TotalVariability &tv, const BaumWelchStats &stats);

/// Seeded loadings: entries are sqrt(var) times scaled standard normals.
TotalVariability InitTotalVariability(const DiagonalGmm &ubm, std::size_t ivector_dim,
                                      std::uint64_t seed);

/// EM for the loadings with the UBM fixed. `objective_trace`, when given,
/// receives the T-dependent part of the stats log-likelihood,
/// sum_s [0.5 b_s' inv(L_s) b_s - 0.5 log det L_s], for the initializer and
/// after every iteration; EM never decreases it.
TotalVariability TrainTotalVariability(const std::vector<BaumWelchStats> &speakers,
                                       const DiagonalGmm &ubm, std::size_t ivector_dim,
                                       int num_iters, std::uint64_t seed,
                                       std::vector<double> *objective_trace = nullptr);

double TotalVariabilityObjective(const TotalVariability &tv,
                                 const std::vector<BaumWelchStats> &speakers);

/// Appends the same trailing coordinates to every frame.
FeatureMatrix AppendIvector(const FeatureMatrix &x, const Eigen::VectorXd &w);

}  // namespace gmmd

#endif  // GMMD_IVECTOR_EXTRACTOR_H_
