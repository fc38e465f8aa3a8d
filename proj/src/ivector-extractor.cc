// ivector-extractor.cc

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

#include "gmmd/ivector-extractor.h"

#include <cmath>
#include <random>

#include <spdlog/spdlog.h>

#include "gmmd/common.h"
#include "gmmd/parallel.h"

namespace gmmd {

BaumWelchStats &BaumWelchStats::operator+=(const BaumWelchStats &o) {
  if (counts.size() != o.counts.size() || first_order.cols() != o.first_order.cols())
    throw ValidationError("adding Baum-Welch stats of different shapes");
  counts += o.counts;
  first_order += o.first_order;
  return *this;
}

void TotalVariability::Validate() const {
  ubm.Validate();
  if (loadings.size() != ubm.NumComponents())
    throw ValidationError("total variability model has " + std::to_string(loadings.size()) +
                          " loading matrices for " + std::to_string(ubm.NumComponents()) +
                          " UBM components");
  for (const auto &t : loadings) {
    if (t.rows() != static_cast<Eigen::Index>(ubm.Dim()) || t.cols() != loadings.front().cols())
      throw ValidationError("loading matrices must all be D x M");
    if (!t.allFinite()) throw ValidationError("loading matrix has non-finite entries");
  }
  if (IvectorDim() < 1) throw ValidationError("i-vector dimension must be at least 1");
}

BaumWelchStats AccumulateStats(const DiagonalGmm &ubm, const FeatureMatrix &x) {
  const std::size_t k_count = ubm.NumComponents(), d = ubm.Dim();
  if (!x.Empty() && x.Dim() != d)
    throw ValidationError("utterance " + x.UtteranceId() + " has dimension " +
                          std::to_string(x.Dim()) + ", UBM has " + std::to_string(d));
  const std::size_t n = x.NumFrames();
  const std::size_t num_blocks = (n + kFrameBlock - 1) / kFrameBlock;
  std::vector<BaumWelchStats> blocks(num_blocks, BaumWelchStats(k_count, d));
  ParallelFor(num_blocks, [&](std::size_t b) {
    BaumWelchStats &st = blocks[b];
    for (std::size_t t = b * kFrameBlock; t < std::min(n, (b + 1) * kFrameBlock); ++t) {
      auto o = x.Row(t);
      auto gamma = ubm.ComponentPosteriors(o);
      for (std::size_t k = 0; k < k_count; ++k) {
        st.counts[k] += gamma[k];
        auto mu = ubm.Mean(k);
        for (std::size_t i = 0; i < d; ++i) st.first_order(k, i) += gamma[k] * (o[i] - mu[i]);
      }
    }
  });
  BaumWelchStats total(k_count, d);
  for (const auto &b : blocks) total += b;
  return total;
}

namespace {

void CheckStats(const TotalVariability &tv, const BaumWelchStats &stats) {
  if (stats.counts.size() != static_cast<Eigen::Index>(tv.NumComponents()) ||
      stats.first_order.rows() != static_cast<Eigen::Index>(tv.NumComponents()) ||
      stats.first_order.cols() != static_cast<Eigen::Index>(tv.FeatureDim()))
    throw ValidationError("Baum-Welch stats do not match the total variability model");
  if (!stats.counts.allFinite() || !stats.first_order.allFinite())
    throw ValidationError("Baum-Welch stats contain non-finite values");
}

Eigen::VectorXd InvVariance(const DiagonalGmm &ubm, std::size_t k) {
  auto var = ubm.Variance(k);
  Eigen::VectorXd iv(var.size());
  for (std::size_t i = 0; i < var.size(); ++i) iv[i] = 1.0 / var[i];
  return iv;
}

// Per-speaker posterior: precision L and linear term b.
struct Posterior {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;
};

Posterior ComputePosterior(const TotalVariability &tv, const BaumWelchStats &stats,
                           const std::vector<Eigen::VectorXd> &inv_vars) {
  const std::size_t m = tv.IvectorDim();
  Posterior p{Eigen::MatrixXd::Identity(m, m), Eigen::VectorXd::Zero(m)};
  for (std::size_t k = 0; k < tv.NumComponents(); ++k) {
    const Eigen::MatrixXd scaled = inv_vars[k].asDiagonal() * tv.loadings[k];  // inv(S) T
    p.linear += scaled.transpose() * stats.first_order.row(k).transpose();
    if (stats.counts[k] != 0.0)
      p.precision += stats.counts[k] * (tv.loadings[k].transpose() * scaled);
  }
  return p;
}

std::vector<Eigen::VectorXd> AllInvVariances(const DiagonalGmm &ubm) {
  std::vector<Eigen::VectorXd> out;
  for (std::size_t k = 0; k < ubm.NumComponents(); ++k) out.push_back(InvVariance(ubm, k));
  return out;
}

}  // namespace

Eigen::MatrixXd PosteriorPrecision(const TotalVariability &tv, const BaumWelchStats &stats) {
  CheckStats(tv, stats);
  return ComputePosterior(tv, stats, AllInvVariances(tv.ubm)).precision;
}

Eigen::VectorXd ExtractIvector(const TotalVariability &tv, const BaumWelchStats &stats) {
  CheckStats(tv, stats);
  auto p = ComputePosterior(tv, stats, AllInvVariances(tv.ubm));
  return p.precision.llt().solve(p.linear);
}

TotalVariability InitTotalVariability(const DiagonalGmm &ubm, std::size_t ivector_dim,
                                      std::uint64_t seed) {
  if (ivector_dim < 1) throw ValidationError("i-vector dimension must be at least 1");
  ubm.Validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  TotalVariability tv;
  tv.ubm = ubm;
  const double scale = 1.0 / std::sqrt(static_cast<double>(ivector_dim));
  for (std::size_t k = 0; k < ubm.NumComponents(); ++k) {
    Eigen::MatrixXd t(ubm.Dim(), ivector_dim);
    auto var = ubm.Variance(k);
    for (std::size_t i = 0; i < ubm.Dim(); ++i)
      for (std::size_t j = 0; j < ivector_dim; ++j) t(i, j) = scale * std::sqrt(var[i]) * noise(rng);
    tv.loadings.push_back(std::move(t));
  }
  return tv;
}

double TotalVariabilityObjective(const TotalVariability &tv,
                                 const std::vector<BaumWelchStats> &speakers) {
  const auto inv_vars = AllInvVariances(tv.ubm);
  double obj = 0.0;
  for (const auto &st : speakers) {
    CheckStats(tv, st);
    auto p = ComputePosterior(tv, st, inv_vars);
    Eigen::LLT<Eigen::MatrixXd> llt(p.precision);
    const Eigen::MatrixXd lower = llt.matrixL();
    obj += 0.5 * p.linear.dot(llt.solve(p.linear)) - lower.diagonal().array().log().sum();
  }
  return obj;
}

TotalVariability TrainTotalVariability(const std::vector<BaumWelchStats> &speakers,
                                       const DiagonalGmm &ubm, std::size_t ivector_dim,
                                       int num_iters, std::uint64_t seed,
                                       std::vector<double> *objective_trace) {
  if (num_iters < 0) throw ValidationError("iteration count must be >= 0");
  if (speakers.empty()) throw ValidationError("total variability training needs speakers");
  TotalVariability tv = InitTotalVariability(ubm, ivector_dim, seed);
  for (const auto &st : speakers) CheckStats(tv, st);
  if (speakers.size() < ivector_dim)
    spdlog::warn("training a {}-dimensional subspace from {} speakers", ivector_dim,
                 speakers.size());
  const std::size_t k_count = ubm.NumComponents(), d = ubm.Dim(), m = ivector_dim;
  const auto inv_vars = AllInvVariances(ubm);
  if (objective_trace) {
    objective_trace->clear();
    objective_trace->push_back(TotalVariabilityObjective(tv, speakers));
  }

  for (int iter = 0; iter < num_iters; ++iter) {
    // E-step per speaker; reduction in speaker order.
    std::vector<Eigen::VectorXd> means(speakers.size());
    std::vector<Eigen::MatrixXd> second(speakers.size());
    ParallelFor(speakers.size(), [&](std::size_t s) {
      auto p = ComputePosterior(tv, speakers[s], inv_vars);
      Eigen::LLT<Eigen::MatrixXd> llt(p.precision);
      means[s] = llt.solve(p.linear);
      second[s] = llt.solve(Eigen::MatrixXd::Identity(m, m)) + means[s] * means[s].transpose();
    });
    for (std::size_t k = 0; k < k_count; ++k) {
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, m);
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t s = 0; s < speakers.size(); ++s) {
        c += speakers[s].first_order.row(k).transpose() * means[s].transpose();
        a += speakers[s].counts[k] * second[s];
      }
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() != Eigen::Success || a.diagonal().minCoeff() <= 1e-10) {
        const double ridge = 1e-6 * (1.0 + a.trace() / m);
        spdlog::warn("iteration {}: component {} has a singular accumulator, adding ridge {}",
                     iter, k, ridge);
        a += ridge * Eigen::MatrixXd::Identity(m, m);
        llt.compute(a);
      }
      // T_k = C A^-1, solved as A T_k' = C'.
      tv.loadings[k] = llt.solve(c.transpose()).transpose();
    }
    if (objective_trace) objective_trace->push_back(TotalVariabilityObjective(tv, speakers));
  }
  return tv;
}

FeatureMatrix AppendIvector(const FeatureMatrix &x, const Eigen::VectorXd &w) {
  const std::size_t extra = w.size();
  FeatureMatrix out(x.UtteranceId(), x.NumFrames(), x.Dim() + extra);
  for (std::size_t t = 0; t < x.NumFrames(); ++t) {
    auto row = out.Row(t);
    auto in = x.Row(t);
    std::copy(in.begin(), in.end(), row.begin());
    for (std::size_t j = 0; j < extra; ++j) row[x.Dim() + j] = w[j];
  }
  return out;
}

}  // namespace gmmd
