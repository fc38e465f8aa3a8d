// tests/test-util.cc

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

#include "test-util.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>

#include <unistd.h>

namespace gmmd {
namespace testing {

double Uniform(Rng &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double Gauss(Rng &rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

int UniformInt(Rng &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

DiagonalGmm RandomGmm(Rng &rng, std::size_t num_components, std::size_t dim) {
  std::vector<double> w(num_components), mu(num_components * dim), var(num_components * dim);
  double sum = 0;
  for (auto &x : w) sum += (x = Uniform(rng, 0.05, 1.0));
  for (auto &x : w) x /= sum;
  for (auto &x : mu) x = 3.0 * Gauss(rng);
  for (auto &x : var) x = Uniform(rng, 0.2, 3.0);
  return DiagonalGmm(w, mu, var);
}

Lattice RandomLattice(Rng &rng, const std::string &utt, int max_arcs, int num_symbols, int max_frames,
                      int frames) {
  int num_nodes = UniformInt(rng, 2, std::min(7, std::max(2, max_arcs + 1)));
  if (frames > 0) num_nodes = std::min(num_nodes, frames + 1);
  else frames = UniformInt(rng, num_nodes - 1, std::max(num_nodes - 1, max_frames));
  std::vector<int> interior(frames - 1);
  std::iota(interior.begin(), interior.end(), 1);
  std::shuffle(interior.begin(), interior.end(), rng);
  std::vector<int> time = {0};
  time.insert(time.end(), interior.begin(), interior.begin() + (num_nodes - 2));
  time.push_back(frames);
  std::sort(time.begin(), time.end());

  Lattice lat;
  lat.utterance_id = utt;
  lat.num_nodes = num_nodes;
  lat.start = 0;
  lat.end = num_nodes - 1;
  auto add = [&](int from, int to) {
    LatticeArc a;
    a.from = from;
    a.to = to;
    a.symbol = UniformInt(rng, 1, num_symbols);
    a.start_frame = time[from];
    a.end_frame = time[to];
    a.acoustic_score = -Uniform(rng, 0.0, 8.0) * (time[to] - time[from]);
    a.lm_score = -Uniform(rng, 0.0, 4.0);
    lat.arcs.push_back(a);
  };
  for (int i = 0; i + 1 < num_nodes; ++i) add(i, i + 1);
  const int extra = UniformInt(rng, 0, std::max(0, max_arcs - (num_nodes - 1)));
  for (int e = 0; e < extra; ++e) {
    const int from = UniformInt(rng, 0, num_nodes - 2);
    const int to = UniformInt(rng, from + 1, num_nodes - 1);
    add(from, to);
  }
  return lat;
}

SyntheticCorpus MakeCorpus(Rng &rng, int num_speakers, int utts_per_speaker, int num_states,
                           std::size_t dim, int frames_per_utt, double speaker_shift) {
  SyntheticCorpus c;
  const int num_phones = (num_states + 2) / 3;
  std::vector<std::vector<double>> means(num_states, std::vector<double>(dim));
  for (int s = 0; s < num_states; ++s) {
    for (auto &m : means[s]) m = 2.5 * Gauss(rng);
    c.truth.states.emplace_back(std::vector<double>{1.0}, means[s], std::vector<double>(dim, 1.0));
    c.truth.info.push_back({s / 3 + 1, s % 3});
  }
  char name[64];
  for (int spk = 0; spk < num_speakers; ++spk) {
    std::snprintf(name, sizeof(name), "spk%02d", spk);
    const std::string spk_id = name;
    std::vector<double> shift(dim);
    for (auto &x : shift) x = speaker_shift * Gauss(rng);
    for (int u = 0; u < utts_per_speaker; ++u) {
      std::snprintf(name, sizeof(name), "%s-utt%02d", spk_id.c_str(), u);
      const std::string utt = name;
      FeatureMatrix x(utt, dim);
      AlignmentTrack track{utt, {}};
      std::vector<int> order(num_phones);
      std::iota(order.begin(), order.end(), 0);
      std::size_t next = order.size();
      while (static_cast<int>(track.NumFrames()) < frames_per_utt) {
        if (next == order.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          next = 0;
        }
        const int phone = order[next++];
        for (int pos = 0; pos < 3 && phone * 3 + pos < num_states; ++pos) {
          const int len = UniformInt(rng, 2, 5);
          const int state = phone * 3 + pos;
          for (int k = 0; k < len && static_cast<int>(track.NumFrames()) < frames_per_utt; ++k) {
            std::vector<double> o(dim);
            for (std::size_t i = 0; i < dim; ++i) o[i] = means[state][i] + shift[i] + Gauss(rng);
            x.AppendRow(o);
            track.labels.push_back({state, phone + 1, pos});
          }
        }
      }
      c.feats.emplace(utt, std::move(x));
      c.ali.emplace(utt, std::move(track));
      c.spk2utt[spk_id].push_back(utt);
    }
  }
  return c;
}

ScratchDir::ScratchDir(const std::string &tag) {
  static int counter = 0;
  auto p = std::filesystem::temp_directory_path() /
           ("gmmd-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  root_ = p.string();
}

ScratchDir::~ScratchDir() {
  std::error_code ec;
  std::filesystem::remove_all(root_, ec);
}

std::string ScratchDir::Path(const std::string &name) const { return root_ + "/" + name; }

void WriteFile(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

namespace {

long double LogSumExp(const std::vector<long double> &v) {
  long double m = -INFINITY;
  for (auto x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  long double s = 0;
  for (auto x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

long double NaiveGmmLogLikelihood(const DiagonalGmm &gmm, std::span<const double> o) {
  const long double pi = 3.141592653589793238462643383279502884L;
  std::vector<long double> terms;
  for (std::size_t m = 0; m < gmm.NumComponents(); ++m) {
    long double log_det = 0, quad = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      const long double v = gmm.Variance(m)[i];
      const long double diff = static_cast<long double>(o[i]) - gmm.Mean(m)[i];
      log_det += std::log(2 * pi * v);
      quad += diff * diff / v;
    }
    terms.push_back(std::log(static_cast<long double>(gmm.Weight(m))) - 0.5L * (log_det + quad));
  }
  return LogSumExp(terms);
}

EnumeratedPosteriors EnumeratePaths(const Lattice &lat, double acoustic_scale) {
  std::map<int, std::vector<std::size_t>> out_arcs;
  for (std::size_t a = 0; a < lat.arcs.size(); ++a) out_arcs[lat.arcs[a].from].push_back(a);
  std::vector<std::vector<std::size_t>> paths;
  std::vector<long double> weights;
  std::vector<std::size_t> stack;
  std::function<void(int, long double)> walk = [&](int node, long double w) {
    if (node == lat.end) {
      paths.push_back(stack);
      weights.push_back(w);
      return;
    }
    for (std::size_t a : out_arcs[node]) {
      const auto &arc = lat.arcs[a];
      stack.push_back(a);
      walk(arc.to, w + static_cast<long double>(arc.acoustic_score) / acoustic_scale + arc.lm_score);
      stack.pop_back();
    }
  };
  walk(lat.start, 0);
  EnumeratedPosteriors r;
  r.num_paths = paths.size();
  r.total_log_like = LogSumExp(weights);
  r.posteriors.assign(lat.arcs.size(), 0);
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const long double share = std::exp(weights[p] - r.total_log_like);
    for (std::size_t a : paths[p]) r.posteriors[a] += share;
  }
  return r;
}

std::vector<std::vector<long double>> FrameSymbolMass(const Lattice &lat,
                                                      const std::vector<long double> &post,
                                                      int num_frames, int num_symbols) {
  std::vector<std::vector<long double>> mass(num_frames, std::vector<long double>(num_symbols + 1, 0));
  for (std::size_t a = 0; a < lat.arcs.size(); ++a)
    for (int t = lat.arcs[a].start_frame; t < lat.arcs[a].end_frame; ++t)
      mass[t][lat.arcs[a].symbol] += post[a];
  return mass;
}

long double DirectDbIndex(const std::vector<std::vector<double>> &vectors,
                          const std::vector<int> &labels) {
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  const std::size_t dim = vectors.front().size();
  std::vector<std::vector<long double>> centroid;
  std::vector<long double> scatter;
  for (const auto &[label, idx] : members) {
    std::vector<long double> c(dim, 0);
    for (auto i : idx)
      for (std::size_t d = 0; d < dim; ++d) c[d] += vectors[i][d];
    for (auto &x : c) x /= idx.size();
    long double ss = 0;
    for (auto i : idx)
      for (std::size_t d = 0; d < dim; ++d) ss += (vectors[i][d] - c[d]) * (vectors[i][d] - c[d]);
    centroid.push_back(c);
    scatter.push_back(std::sqrt(ss / idx.size()));
  }
  const std::size_t k = centroid.size();
  long double total = 0;
  for (std::size_t a = 0; a < k; ++a) {
    long double worst = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      long double dist = 0;
      for (std::size_t d = 0; d < dim; ++d) dist += (centroid[a][d] - centroid[b][d]) * (centroid[a][d] - centroid[b][d]);
      worst = std::max(worst, (scatter[a] + scatter[b]) / std::sqrt(dist));
    }
    total += worst;
  }
  return total / k;
}

std::vector<long double> DirectDct(std::span<const double> x, std::size_t out_dim) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const std::size_t n = x.size();
  std::vector<long double> y(out_dim, 0);
  for (std::size_t k = 0; k < out_dim; ++k) {
    for (std::size_t i = 0; i < n; ++i) y[k] += x[i] * std::cos(pi / n * (i + 0.5L) * k);
    y[k] *= std::sqrt((k == 0 ? 1.0L : 2.0L) / n);
  }
  return y;
}

std::size_t EditDistance(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
  return d[a.size()][b.size()];
}

}  // namespace testing
}  // namespace gmmd
