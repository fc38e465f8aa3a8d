// diag-gmm.cc

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

#include "gmmd/diag-gmm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include <spdlog/spdlog.h>

#include "gmmd/common.h"
#include "gmmd/parallel.h"

namespace gmmd {

DiagonalGmm::DiagonalGmm(std::vector<double> weights, std::vector<double> means,
                         std::vector<double> variances)
    : weights_(std::move(weights)), means_(std::move(means)), vars_(std::move(variances)) {
  if (weights_.empty()) throw ValidationError("GMM needs at least one component");
  if (means_.size() % weights_.size() != 0 || vars_.size() != means_.size())
    throw ValidationError("GMM parameter sizes are inconsistent");
  dim_ = means_.size() / weights_.size();
  ComputeGconsts();
}

void DiagonalGmm::ComputeGconsts() {
  const std::size_t num_comp = weights_.size();
  inv_vars_.resize(vars_.size());
  gconsts_.assign(num_comp, 0.0);
  for (std::size_t m = 0; m < num_comp; ++m) {
    double g = std::log(weights_[m]) - 0.5 * dim_ * kLog2Pi;
    for (std::size_t i = 0; i < dim_; ++i) {
      g -= 0.5 * std::log(vars_[m * dim_ + i]);
      inv_vars_[m * dim_ + i] = 1.0 / vars_[m * dim_ + i];
    }
    gconsts_[m] = g;
  }
}

void DiagonalGmm::SetMean(std::size_t m, std::span<const double> mean) {
  CheckDim(mean);
  std::copy(mean.begin(), mean.end(), means_.begin() + m * dim_);
}

void DiagonalGmm::CheckDim(std::span<const double> o) const {
  if (o.size() != dim_)
    throw ValidationError("frame of dimension " + std::to_string(o.size()) +
                          " does not match GMM dimension " + std::to_string(dim_));
}

std::vector<double> DiagonalGmm::ComponentLogDensities(std::span<const double> o) const {
  CheckDim(o);
  std::vector<double> out(weights_.size());
  for (std::size_t m = 0; m < weights_.size(); ++m) {
    const double *mu = means_.data() + m * dim_;
    const double *iv = inv_vars_.data() + m * dim_;
    double quad = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double diff = o[i] - mu[i];
      quad += diff * diff * iv[i];
    }
    out[m] = gconsts_[m] - 0.5 * quad;
  }
  return out;
}

namespace {

double LogSumExp(const std::vector<double> &v) {
  double max = *std::max_element(v.begin(), v.end());
  if (max == kLogZero) return kLogZero;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - max);
  return max + std::log(sum);
}

}  // namespace

double DiagonalGmm::LogLikelihood(std::span<const double> o) const {
  return LogSumExp(ComponentLogDensities(o));
}

std::vector<double> DiagonalGmm::ComponentPosteriors(std::span<const double> o) const {
  auto logp = ComponentLogDensities(o);
  double total = LogSumExp(logp);
  for (double &x : logp) x = std::exp(x - total);
  return logp;
}

void DiagonalGmm::Validate() const {
  if (weights_.empty()) throw ValidationError("GMM has no components");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw ValidationError("GMM weight must be positive and finite");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("GMM weights sum to " + std::to_string(sum));
  for (double v : vars_)
    if (!(v > 0.0) || !std::isfinite(v))
      throw ValidationError("GMM variance must be positive and finite");
  for (double mu : means_)
    if (!std::isfinite(mu)) throw ValidationError("GMM mean must be finite");
}

namespace {

struct GlobalStats {
  std::vector<double> mean, var;
};

GlobalStats ComputeGlobalStats(const FeatureMatrix &data) {
  const std::size_t d = data.Dim(), n = data.NumFrames();
  GlobalStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i) s.mean[i] += data(t, i);
  for (double &m : s.mean) m /= n;
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < d; ++i) {
      double diff = data(t, i) - s.mean[i];
      s.var[i] += diff * diff;
    }
  for (double &v : s.var) v /= n;
  return s;
}

std::vector<double> VarianceFloor(const GlobalStats &g, const EmOptions &opts) {
  std::vector<double> floor(g.var.size());
  for (std::size_t i = 0; i < floor.size(); ++i) {
    floor[i] = opts.var_floor ? *opts.var_floor : 1e-3 * g.var[i];
    // Constant dimensions would otherwise get a zero floor.
    if (!(floor[i] > 0.0)) floor[i] = 1e-10;
  }
  return floor;
}

void CheckTrainingInput(const FeatureMatrix &data, const EmOptions &opts) {
  if (data.Empty()) throw ValidationError("EM training needs at least one frame");
  if (data.Dim() == 0) throw ValidationError("EM training needs positive dimension");
  if (opts.num_components < 1) throw ValidationError("EM needs at least one component");
  if (data.NumFrames() < static_cast<std::size_t>(opts.num_components))
    throw ValidationError("EM training has " + std::to_string(data.NumFrames()) +
                          " frames for " + std::to_string(opts.num_components) +
                          " components");
  if (opts.var_floor && !(*opts.var_floor > 0.0))
    throw ValidationError("variance floor must be positive");
  data.CheckFinite();
}

struct EmAccumulator {
  std::vector<double> occ, first, second;
  double loglike = 0.0;
  EmAccumulator(std::size_t m, std::size_t d) : occ(m, 0.0), first(m * d, 0.0), second(m * d, 0.0) {}
  void Add(const EmAccumulator &o) {
    for (std::size_t k = 0; k < occ.size(); ++k) occ[k] += o.occ[k];
    for (std::size_t k = 0; k < first.size(); ++k) first[k] += o.first[k], second[k] += o.second[k];
    loglike += o.loglike;
  }
};

EmAccumulator Accumulate(const DiagonalGmm &gmm, const FeatureMatrix &data) {
  const std::size_t m_count = gmm.NumComponents(), d = gmm.Dim();
  const std::size_t n = data.NumFrames();
  const std::size_t num_blocks = (n + kFrameBlock - 1) / kFrameBlock;
  std::vector<EmAccumulator> blocks(num_blocks, EmAccumulator(m_count, d));
  ParallelFor(num_blocks, [&](std::size_t b) {
    EmAccumulator &acc = blocks[b];
    for (std::size_t t = b * kFrameBlock; t < std::min(n, (b + 1) * kFrameBlock); ++t) {
      auto o = data.Row(t);
      auto logp = gmm.ComponentLogDensities(o);
      double total = LogSumExp(logp);
      acc.loglike += total;
      for (std::size_t m = 0; m < m_count; ++m) {
        double g = std::exp(logp[m] - total);
        acc.occ[m] += g;
        for (std::size_t i = 0; i < d; ++i) {
          acc.first[m * d + i] += g * o[i];
          acc.second[m * d + i] += g * o[i] * o[i];
        }
      }
    }
  });
  EmAccumulator total(m_count, d);
  for (const auto &b : blocks) total.Add(b);
  return total;
}

}  // namespace

DiagonalGmm InitGmm(const FeatureMatrix &data, const EmOptions &opts) {
  CheckTrainingInput(data, opts);
  const auto global = ComputeGlobalStats(data);
  const auto floor = VarianceFloor(global, opts);
  const std::size_t m_count = opts.num_components, d = data.Dim(), n = data.NumFrames();
  std::vector<double> weights(m_count, 1.0 / m_count), means(m_count * d), vars(m_count * d);
  std::vector<double> scale(d);
  for (std::size_t i = 0; i < d; ++i) scale[i] = 1.0 / std::max(global.var[i], floor[i]);
  for (std::size_t m = 0; m < m_count; ++m)
    for (std::size_t i = 0; i < d; ++i) vars[m * d + i] = 1.0 / scale[i];
  if (m_count == 1) {
    std::copy(global.mean.begin(), global.mean.end(), means.begin());
    return DiagonalGmm(std::move(weights), std::move(means), std::move(vars));
  }
  // k-means++ seeding: each mean is a data frame drawn with probability
  // proportional to its variance-scaled squared distance to the nearest mean.
  std::mt19937_64 rng(opts.seed);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t m = 0; m < m_count; ++m) {
    if (m > 0) {
      double total = 0.0;
      for (double v : dist) total += v;
      if (total > 0.0) {
        double r = std::uniform_real_distribution<double>(0.0, total)(rng);
        pick = n - 1;
        for (std::size_t t = 0; t < n; ++t) {
          r -= dist[t];
          if (r < 0.0 && dist[t] > 0.0) { pick = t; break; }
        }
      } else {
        pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      }
    }
    const auto row = data.Row(pick);
    std::copy(row.begin(), row.end(), means.begin() + m * d);
    for (std::size_t t = 0; t < n; ++t) {
      const auto x = data.Row(t);
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += (x[i] - row[i]) * (x[i] - row[i]) * scale[i];
      dist[t] = std::min(dist[t], s);
    }
  }
  return DiagonalGmm(std::move(weights), std::move(means), std::move(vars));
}

double TotalLogLikelihood(const DiagonalGmm &gmm, const FeatureMatrix &data) {
  return Accumulate(gmm, data).loglike;
}

DiagonalGmm EmTrain(const FeatureMatrix &data, const EmOptions &opts,
                    std::vector<double> *loglike_trace) {
  DiagonalGmm gmm = InitGmm(data, opts);
  const auto global = ComputeGlobalStats(data);
  const auto floor = VarianceFloor(global, opts);
  const std::size_t m_count = opts.num_components, d = data.Dim();
  const double n = static_cast<double>(data.NumFrames());
  if (loglike_trace) loglike_trace->clear();

  for (int iter = 0; iter < opts.num_iters; ++iter) {
    EmAccumulator acc = Accumulate(gmm, data);
    if (loglike_trace) loglike_trace->push_back(acc.loglike);
    std::vector<double> weights(m_count), means(m_count * d), vars(m_count * d);
    for (std::size_t m = 0; m < m_count; ++m) {
      if (acc.occ[m] <= 1e-8 * n) {
        // Re-seed on the frame the current model explains worst.
        std::size_t worst = 0;
        double worst_ll = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < data.NumFrames(); ++t) {
          double ll = gmm.LogLikelihood(data.Row(t));
          if (ll < worst_ll) worst_ll = ll, worst = t;
        }
        spdlog::warn("EM iteration {}: component {} starved, re-seeding", iter, m);
        weights[m] = 1.0 / n;
        for (std::size_t i = 0; i < d; ++i) {
          means[m * d + i] = data(worst, i);
          vars[m * d + i] = std::max(global.var[i], floor[i]);
        }
        continue;
      }
      weights[m] = acc.occ[m] / n;
      for (std::size_t i = 0; i < d; ++i) {
        double mu = acc.first[m * d + i] / acc.occ[m];
        double var = acc.second[m * d + i] / acc.occ[m] - mu * mu;
        means[m * d + i] = mu;
        vars[m * d + i] = std::max(var, floor[i]);
      }
    }
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (double &w : weights) w /= wsum;
    gmm = DiagonalGmm(std::move(weights), std::move(means), std::move(vars));
  }
  if (loglike_trace) loglike_trace->push_back(TotalLogLikelihood(gmm, data));
  return gmm;
}

void AuxModel::Validate() const {
  if (states.empty()) throw ValidationError("auxiliary model has no states");
  if (info.size() != states.size())
    throw ValidationError("auxiliary model state metadata size mismatch");
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s].Dim() != states.front().Dim())
      throw ValidationError("state " + std::to_string(s) + " has a different dimension");
    states[s].Validate();
    if (info[s].hmm_position < 0 || info[s].hmm_position > 2 || info[s].phone_id < 0)
      throw ValidationError("state " + std::to_string(s) + " has invalid phone metadata");
  }
}

std::vector<double> StateLoglikes(const AuxModel &model, std::span<const double> o) {
  std::vector<double> out(model.NumStates());
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = model.states[s].LogLikelihood(o);
  return out;
}

void CheckAlignmentsCover(const FeatureArchive &feats, const AlignmentArchive &ali) {
  for (const auto &[utt, x] : feats) {
    auto it = ali.find(utt);
    if (it == ali.end()) throw ValidationError("no alignment for utterance " + utt);
    if (it->second.NumFrames() != x.NumFrames())
      throw ValidationError("utterance " + utt + ": " + std::to_string(x.NumFrames()) +
                            " frames but " + std::to_string(it->second.NumFrames()) +
                            " alignment labels");
  }
}

AuxModel TrainAuxModel(const FeatureArchive &feats, const AlignmentArchive &ali,
                       const EmOptions &opts, int num_states) {
  CheckAlignmentsCover(feats, ali);
  std::size_t dim = feats.empty() ? 0 : feats.begin()->second.Dim();
  int max_state = -1;
  for (const auto &[utt, x] : feats) {
    if (x.Dim() != dim) throw ValidationError("utterance " + utt + " has a different dimension");
    for (const auto &l : ali.at(utt).labels) max_state = std::max(max_state, l.state_id);
  }
  if (num_states <= 0) num_states = max_state + 1;
  if (num_states <= 0) throw ValidationError("no aligned frames to train on");
  if (max_state >= num_states)
    throw ValidationError("state id " + std::to_string(max_state) + " out of range");

  std::vector<FeatureMatrix> per_state(num_states);
  std::vector<std::optional<StateInfo>> info(num_states);
  for (int s = 0; s < num_states; ++s) per_state[s] = FeatureMatrix("state" + std::to_string(s), dim);
  for (const auto &[utt, x] : feats) {
    const auto &labels = ali.at(utt).labels;
    for (std::size_t t = 0; t < x.NumFrames(); ++t) {
      const auto &l = labels[t];
      per_state[l.state_id].AppendRow(x.Row(t));
      StateInfo si{l.phone_id, l.hmm_position};
      if (!info[l.state_id]) info[l.state_id] = si;
      else if (!(*info[l.state_id] == si))
        throw ValidationError("state " + std::to_string(l.state_id) +
                              " is aligned to two different phone positions");
    }
  }

  AuxModel model;
  model.states.resize(num_states);
  model.info.resize(num_states);
  for (int s = 0; s < num_states; ++s) {
    if (per_state[s].Empty())
      throw ValidationError("state " + std::to_string(s) + " has no aligned frames");
    model.info[s] = *info[s];
  }
  ParallelFor(num_states, [&](std::size_t s) {
    EmOptions state_opts = opts;
    state_opts.num_components =
        static_cast<int>(std::min<std::size_t>(opts.num_components, per_state[s].NumFrames()));
    state_opts.seed = opts.seed + s;
    model.states[s] = EmTrain(per_state[s], state_opts);
  });
  return model;
}

}  // namespace gmmd
