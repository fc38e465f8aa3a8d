// confusion-network.cc

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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>

#include "gmmd/common.h"
#include "gmmd/lattice-functions.h"

namespace gmmd {

void ConfusionNetwork::Validate() const {
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (bins[b].empty())
      throw ValidationError("confusion network " + utterance_id + ": bin " +
                            std::to_string(b) + " is empty");
    double sum = 0.0;
    for (const auto &e : bins[b]) {
      if (!(e.posterior >= 0.0) || !std::isfinite(e.posterior))
        throw ValidationError("confusion network " + utterance_id + ": bin " +
                              std::to_string(b) + " has an invalid posterior");
      sum += e.posterior;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw ValidationError("confusion network " + utterance_id + ": bin " +
                            std::to_string(b) + " sums to " + std::to_string(sum));
  }
}

namespace {

class Bitset {
 public:
  explicit Bitset(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  bool Test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void Set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void Reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  Bitset &operator|=(const Bitset &o) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
    return *this;
  }

 private:
  std::vector<std::uint64_t> words_;
};

struct Cluster {
  std::vector<int> arcs;
  int word = 0;  // meaningful only during the intra-word stage
  int start = 0, end = 0;
  double mass = 0.0;
  double midpoint_sum = 0.0;
  bool alive = true;

  double MeanMidpoint() const { return midpoint_sum / arcs.size(); }
};

int Overlap(const Cluster &a, const Cluster &b) {
  return std::min(a.end, b.end) - std::max(a.start, b.start);
}

class Clusterer {
 public:
  Clusterer(const Lattice &lat, const std::vector<double> &post) : lat_(lat), post_(post) {
    // reach[n] = nodes reachable from n, n included.
    auto order = lat.TopologicalOrder();
    std::vector<Bitset> reach(lat.num_nodes, Bitset(lat.num_nodes));
    std::vector<std::vector<int>> out(lat.num_nodes);
    for (const auto &arc : lat.arcs) out[arc.from].push_back(arc.to);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      reach[*it].Set(*it);
      for (int next : out[*it]) reach[*it] |= reach[next];
    }

    for (std::size_t a = 0; a < lat.arcs.size(); ++a) {
      const auto &arc = lat.arcs[a];
      if (arc.symbol == SymbolTable::kNullId || !(post[a] > 0.0)) continue;
      Cluster c;
      c.arcs = {static_cast<int>(a)};
      c.word = arc.symbol;
      c.start = arc.start_frame;
      c.end = arc.end_frame;
      c.mass = post[a];
      c.midpoint_sum = 0.5 * (arc.start_frame + arc.end_frame);
      clusters_.push_back(std::move(c));
    }
    const std::size_t n = clusters_.size();
    before_.assign(n, Bitset(n));
    after_.assign(n, Bitset(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto &ai = lat.arcs[clusters_[i].arcs[0]];
      for (std::size_t j = 0; j < n; ++j) {
        const auto &aj = lat.arcs[clusters_[j].arcs[0]];
        if (i != j && reach[ai.to].Test(aj.from)) {
          before_[i].Set(j);
          after_[j].Set(i);
        }
      }
    }
  }

  void IntraWord() {
    std::vector<std::size_t> visit(clusters_.size());
    for (std::size_t i = 0; i < visit.size(); ++i) visit[i] = i;
    std::stable_sort(visit.begin(), visit.end(), [&](std::size_t x, std::size_t y) {
      return clusters_[x].MeanMidpoint() < clusters_[y].MeanMidpoint();
    });
    std::vector<std::size_t> formed;
    for (std::size_t c : visit) {
      std::size_t best = c;
      int best_overlap = 0;
      for (std::size_t f : formed) {
        if (!clusters_[f].alive || clusters_[f].word != clusters_[c].word) continue;
        int ov = Overlap(clusters_[f], clusters_[c]);
        if (ov > best_overlap && Compatible(f, c)) best = f, best_overlap = ov;
      }
      if (best == c) formed.push_back(c);
      else Merge(best, c);
    }
  }

  void InterWord() {
    bool merged = true;
    while (merged) {
      merged = false;
      std::vector<std::size_t> by_mass;
      for (std::size_t i = 0; i < clusters_.size(); ++i)
        if (clusters_[i].alive) by_mass.push_back(i);
      std::stable_sort(by_mass.begin(), by_mass.end(), [&](std::size_t x, std::size_t y) {
        if (clusters_[x].mass != clusters_[y].mass) return clusters_[x].mass > clusters_[y].mass;
        return clusters_[x].MeanMidpoint() < clusters_[y].MeanMidpoint();
      });
      for (std::size_t c : by_mass) {
        if (!clusters_[c].alive) continue;
        for (;;) {
          std::size_t best = c;
          for (std::size_t d : by_mass) {
            if (d == c || !clusters_[d].alive) continue;
            int ov = Overlap(clusters_[c], clusters_[d]);
            if (ov <= 0 || !Compatible(c, d)) continue;
            if (best == c || clusters_[d].mass > clusters_[best].mass ||
                (clusters_[d].mass == clusters_[best].mass &&
                 ov > Overlap(clusters_[c], clusters_[best])))
              best = d;
          }
          if (best == c) break;
          Merge(c, best);
          merged = true;
        }
      }
    }
  }

  ConfusionNetwork Emit() const {
    // Kahn over the closed precedence relation, mean midpoint breaking ties.
    std::vector<std::size_t> alive;
    for (std::size_t i = 0; i < clusters_.size(); ++i)
      if (clusters_[i].alive) alive.push_back(i);
    std::vector<int> pending(clusters_.size(), 0);
    for (std::size_t i : alive)
      for (std::size_t j : alive)
        if (before_[j].Test(i)) ++pending[i];
    auto later = [&](std::size_t x, std::size_t y) {
      double mx = clusters_[x].MeanMidpoint(), my = clusters_[y].MeanMidpoint();
      return mx != my ? mx > my : x > y;
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
    for (std::size_t i : alive)
      if (pending[i] == 0) ready.push(i);

    ConfusionNetwork cn;
    cn.utterance_id = lat_.utterance_id;
    while (!ready.empty()) {
      std::size_t c = ready.top();
      ready.pop();
      for (std::size_t j : alive)
        if (before_[c].Test(j) && --pending[j] == 0) ready.push(j);

      std::map<int, double> mass;
      double total = 0.0;
      for (int a : clusters_[c].arcs) {
        mass[lat_.arcs[a].symbol] += post_[a];
        total += post_[a];
      }
      std::vector<ConfusionBinEntry> bin;
      if (1.0 - total > 1e-9) bin.push_back({SymbolTable::kNullId, 1.0 - total});
      for (const auto &[sym, p] : mass) bin.push_back({sym, p});
      cn.bins.push_back(std::move(bin));
    }
    return cn;
  }

 private:
  bool Compatible(std::size_t i, std::size_t j) const {
    return !before_[i].Test(j) && !before_[j].Test(i);
  }

  // Folds cluster j into i and keeps the precedence relation transitively
  // closed.
  void Merge(std::size_t i, std::size_t j) {
    Cluster &ci = clusters_[i];
    Cluster &cj = clusters_[j];
    ci.arcs.insert(ci.arcs.end(), cj.arcs.begin(), cj.arcs.end());
    ci.start = std::min(ci.start, cj.start);
    ci.end = std::max(ci.end, cj.end);
    ci.mass += cj.mass;
    ci.midpoint_sum += cj.midpoint_sum;
    cj.alive = false;

    const std::size_t n = clusters_.size();
    before_[i] |= before_[j];
    after_[i] |= after_[j];
    for (std::size_t x = 0; x < n; ++x) {
      before_[x].Reset(j);
      after_[x].Reset(j);
    }
    before_[j] = Bitset(n);
    after_[j] = Bitset(n);
    for (std::size_t x = 0; x < n; ++x) {
      if (after_[i].Test(x)) {
        before_[x] |= before_[i];
        before_[x].Set(i);
      }
      if (before_[i].Test(x)) {
        after_[x] |= after_[i];
        after_[x].Set(i);
      }
    }
  }

  const Lattice &lat_;
  const std::vector<double> &post_;
  std::vector<Cluster> clusters_;
  std::vector<Bitset> before_;  // before_[i].Test(j): i precedes j
  std::vector<Bitset> after_;   // transpose of before_
};

}  // namespace

ConfusionNetwork BuildConfusionNetwork(const Lattice &lat, double acoustic_scale) {
  std::vector<double> post;
  if (lat.AllArcsHavePosteriors()) {
    lat.Validate();
    for (const auto &arc : lat.arcs) post.push_back(*arc.posterior);
  } else {
    post = ArcPosteriors(lat, acoustic_scale).posteriors;
  }
  Clusterer clusterer(lat, post);
  clusterer.IntraWord();
  clusterer.InterWord();
  return clusterer.Emit();
}

std::vector<int> ConsensusHypothesis(const ConfusionNetwork &cn) {
  std::vector<int> words;
  for (const auto &bin : cn.bins) {
    if (bin.empty()) continue;
    const ConfusionBinEntry *best = &bin.front();
    for (const auto &e : bin)
      if (e.posterior > best->posterior ||
          (e.posterior == best->posterior && e.symbol < best->symbol))
        best = &e;
    if (best->symbol != SymbolTable::kNullId) words.push_back(best->symbol);
  }
  return words;
}

}  // namespace gmmd
