// lattice-functions.cc

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

#include "gmmd/lattice-functions.h"

#include <algorithm>
#include <cmath>
#include <deque>

#include "gmmd/common.h"

namespace gmmd {

SymbolTable::SymbolTable() { Add(kNullSymbol, kNullId); }

void SymbolTable::Add(const std::string &symbol, int id) {
  if (id < 0) throw ValidationError("negative symbol id for " + symbol);
  auto by_id = by_id_.find(id);
  auto by_sym = by_symbol_.find(symbol);
  if (by_id != by_id_.end() && by_id->second == symbol) return;
  if (by_id != by_id_.end())
    throw ValidationError("symbol id " + std::to_string(id) + " bound to both " +
                          by_id->second + " and " + symbol);
  if (by_sym != by_symbol_.end())
    throw ValidationError("symbol " + symbol + " bound to both " +
                          std::to_string(by_sym->second) + " and " +
                          std::to_string(id));
  by_id_[id] = symbol;
  by_symbol_[symbol] = id;
}

int SymbolTable::AddOrGet(const std::string &symbol) {
  if (auto id = Find(symbol)) return *id;
  int next = by_id_.empty() ? 0 : by_id_.rbegin()->first + 1;
  Add(symbol, next);
  return next;
}

std::optional<int> SymbolTable::Find(const std::string &symbol) const {
  auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> SymbolTable::Find(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

const std::string &SymbolTable::Symbol(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw ValidationError("unknown symbol id " + std::to_string(id));
  return it->second;
}

int SymbolTable::Id(const std::string &symbol) const {
  auto it = by_symbol_.find(symbol);
  if (it == by_symbol_.end()) throw ValidationError("unknown symbol " + symbol);
  return it->second;
}

std::vector<int> SymbolTable::NonNullIds() const {
  std::vector<int> ids;
  for (const auto &[id, sym] : by_id_)
    if (id != kNullId) ids.push_back(id);
  return ids;
}

namespace {

[[noreturn]] void Invalid(const Lattice &lat, const std::string &msg) {
  throw ValidationError("lattice " + lat.utterance_id + ": " + msg);
}

// Kahn's algorithm; returns fewer than num_nodes entries on a cycle.
std::vector<int> KahnOrder(const Lattice &lat) {
  std::vector<int> in_degree(lat.num_nodes, 0);
  std::vector<std::vector<int>> out(lat.num_nodes);
  for (const auto &arc : lat.arcs) {
    ++in_degree[arc.to];
    out[arc.from].push_back(arc.to);
  }
  std::deque<int> ready;
  if (in_degree[lat.start] == 0) ready.push_back(lat.start);
  for (int n = 0; n < lat.num_nodes; ++n)
    if (n != lat.start && in_degree[n] == 0) ready.push_back(n);
  std::vector<int> order;
  order.reserve(lat.num_nodes);
  while (!ready.empty()) {
    int n = ready.front();
    ready.pop_front();
    order.push_back(n);
    for (int next : out[n])
      if (--in_degree[next] == 0) ready.push_back(next);
  }
  return order;
}

}  // namespace

void Lattice::Validate() const {
  if (num_nodes < 2) Invalid(*this, "needs at least two nodes");
  if (start < 0 || start >= num_nodes || end < 0 || end >= num_nodes)
    Invalid(*this, "start/end node out of range");
  if (start == end) Invalid(*this, "start and end node coincide");
  if (arcs.empty()) Invalid(*this, "lattice has no arcs");
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const auto &arc = arcs[a];
    if (arc.from < 0 || arc.from >= num_nodes || arc.to < 0 || arc.to >= num_nodes)
      Invalid(*this, "arc " + std::to_string(a) + " references a missing node");
    if (arc.end_frame <= arc.start_frame)
      Invalid(*this, "arc " + std::to_string(a) + " has non-positive duration");
    if (arc.symbol < 0) Invalid(*this, "arc " + std::to_string(a) + " has negative symbol");
    if (!std::isfinite(arc.acoustic_score) || !std::isfinite(arc.lm_score))
      Invalid(*this, "arc " + std::to_string(a) + " has a non-finite score");
    if (arc.posterior && !std::isfinite(*arc.posterior))
      Invalid(*this, "arc " + std::to_string(a) + " has a non-finite posterior");
  }
  if (static_cast<int>(KahnOrder(*this).size()) != num_nodes)
    Invalid(*this, "cycle detected");

  std::vector<int> in_degree(num_nodes, 0), out_degree(num_nodes, 0);
  for (const auto &arc : arcs) {
    ++out_degree[arc.from];
    ++in_degree[arc.to];
  }
  for (int n = 0; n < num_nodes; ++n) {
    if (n != start && in_degree[n] == 0)
      Invalid(*this, out_degree[n] ? "multiple start nodes (node " + std::to_string(n) + ")"
                                   : "disconnected node " + std::to_string(n));
    if (n != end && out_degree[n] == 0)
      Invalid(*this, "multiple end nodes (node " + std::to_string(n) + ")");
  }
  if (in_degree[start] != 0) Invalid(*this, "arc enters the start node");
  if (out_degree[end] != 0) Invalid(*this, "arc leaves the end node");

  // Reachability both ways; with a single source and sink in a DAG this
  // cannot fail, but the check is what the error guarantees.
  std::vector<std::vector<int>> fwd(num_nodes), bwd(num_nodes);
  for (const auto &arc : arcs) {
    fwd[arc.from].push_back(arc.to);
    bwd[arc.to].push_back(arc.from);
  }
  auto reach = [&](int root, const std::vector<std::vector<int>> &adj) {
    std::vector<char> seen(num_nodes, 0);
    std::vector<int> stack{root};
    seen[root] = 1;
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      for (int m : adj[n])
        if (!seen[m]) seen[m] = 1, stack.push_back(m);
    }
    return seen;
  };
  auto from_start = reach(start, fwd), to_end = reach(end, bwd);
  for (std::size_t a = 0; a < arcs.size(); ++a)
    if (!from_start[arcs[a].from] || !to_end[arcs[a].to])
      Invalid(*this, "unreachable arc " + std::to_string(a));

  std::vector<int> node_time(num_nodes, -1);
  auto stamp = [&](int node, int t, std::size_t a) {
    if (node_time[node] < 0) node_time[node] = t;
    else if (node_time[node] != t)
      Invalid(*this, "arc " + std::to_string(a) + " does not abut at node " +
                         std::to_string(node));
  };
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    stamp(arcs[a].from, arcs[a].start_frame, a);
    stamp(arcs[a].to, arcs[a].end_frame, a);
  }
}

std::vector<int> Lattice::TopologicalOrder() const {
  auto order = KahnOrder(*this);
  if (static_cast<int>(order.size()) != num_nodes) Invalid(*this, "cycle detected");
  return order;
}

int Lattice::StartFrame() const {
  for (const auto &arc : arcs)
    if (arc.from == start) return arc.start_frame;
  return 0;
}

int Lattice::EndFrame() const {
  for (const auto &arc : arcs)
    if (arc.to == end) return arc.end_frame;
  return 0;
}

bool Lattice::AllArcsHavePosteriors() const {
  return !arcs.empty() && std::all_of(arcs.begin(), arcs.end(),
                                      [](const LatticeArc &a) { return a.posterior.has_value(); });
}

ArcPosteriorResult ArcPosteriors(const Lattice &lat, double acoustic_scale) {
  if (!(acoustic_scale > 0.0))
    throw ValidationError("acoustic scale must be positive");
  lat.Validate();
  const auto order = lat.TopologicalOrder();
  const int n = lat.num_nodes;
  std::vector<std::vector<int>> out(n), in(n);
  std::vector<double> weight(lat.arcs.size());
  for (std::size_t a = 0; a < lat.arcs.size(); ++a) {
    const auto &arc = lat.arcs[a];
    out[arc.from].push_back(static_cast<int>(a));
    in[arc.to].push_back(static_cast<int>(a));
    weight[a] = arc.acoustic_score / acoustic_scale + arc.lm_score;
  }
  std::vector<double> alpha(n, kLogZero), beta(n, kLogZero);
  alpha[lat.start] = 0.0;
  for (int node : order)
    for (int a : in[node])
      alpha[node] = LogAdd(alpha[node], alpha[lat.arcs[a].from] + weight[a]);
  beta[lat.end] = 0.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    for (int a : out[*it])
      beta[*it] = LogAdd(beta[*it], beta[lat.arcs[a].to] + weight[a]);

  ArcPosteriorResult result;
  result.total_log_like = alpha[lat.end];
  result.posteriors.resize(lat.arcs.size());
  for (std::size_t a = 0; a < lat.arcs.size(); ++a) {
    const auto &arc = lat.arcs[a];
    result.posteriors[a] =
        std::exp(alpha[arc.from] + weight[a] + beta[arc.to] - result.total_log_like);
  }
  return result;
}

Lattice AttachPosteriors(const Lattice &lat, double acoustic_scale) {
  auto post = ArcPosteriors(lat, acoustic_scale);
  Lattice out = lat;
  for (std::size_t a = 0; a < out.arcs.size(); ++a) out.arcs[a].posterior = post.posteriors[a];
  return out;
}

int PhonePosteriorMatrix::Column(int phone_id) const {
  auto it = std::lower_bound(phone_ids.begin(), phone_ids.end(), phone_id);
  if (it == phone_ids.end() || *it != phone_id) return -1;
  return static_cast<int>(it - phone_ids.begin());
}

FeatureMatrix PhonePosteriorMatrix::ToLog() const {
  FeatureMatrix out = probs;
  for (std::size_t t = 0; t < out.NumFrames(); ++t)
    for (double &v : out.Row(t)) v = std::log(v);
  return out;
}

PhonePosteriorMatrix PhonePosteriorMatrix::FromLog(const FeatureMatrix &log_probs,
                                                   std::vector<int> phone_ids,
                                                   double epsilon) {
  if (log_probs.Dim() != phone_ids.size())
    throw ValidationError("utterance " + log_probs.UtteranceId() + ": " +
                          std::to_string(log_probs.Dim()) + " posterior columns for " +
                          std::to_string(phone_ids.size()) + " phones");
  if (!std::is_sorted(phone_ids.begin(), phone_ids.end()))
    throw ValidationError("phone ids must be ascending");
  PhonePosteriorMatrix p;
  p.phone_ids = std::move(phone_ids);
  p.epsilon = epsilon;
  p.probs = log_probs;
  const double log_floor = std::log(epsilon) + 1e-9;
  for (std::size_t t = 0; t < p.probs.NumFrames(); ++t)
    for (double &v : p.probs.Row(t)) {
      // exp(log(eps)) need not give eps back; keep floored entries absent.
      v = v <= log_floor ? epsilon : std::max(std::exp(v), epsilon);
    }
  return p;
}

PhonePosteriorMatrix PhonePosteriorFeatures(const Lattice &lat, const SymbolTable &phones,
                                            double acoustic_scale, double epsilon,
                                            int num_frames) {
  if (!(epsilon > 0.0)) throw ValidationError("posterior floor must be positive");
  std::vector<double> post;
  if (lat.AllArcsHavePosteriors()) {
    lat.Validate();
    for (const auto &arc : lat.arcs) post.push_back(*arc.posterior);
  } else {
    post = ArcPosteriors(lat, acoustic_scale).posteriors;
  }
  if (num_frames < 0) num_frames = lat.EndFrame();

  PhonePosteriorMatrix p;
  p.phone_ids = phones.NonNullIds();
  p.epsilon = epsilon;
  p.probs = FeatureMatrix(lat.utterance_id, num_frames, p.phone_ids.size(), 0.0);
  for (std::size_t a = 0; a < lat.arcs.size(); ++a) {
    const auto &arc = lat.arcs[a];
    if (arc.start_frame < 0 || arc.end_frame > num_frames)
      throw ValidationError("lattice " + lat.utterance_id + ": arc " + std::to_string(a) +
                            " spans [" + std::to_string(arc.start_frame) + ", " +
                            std::to_string(arc.end_frame) + ") outside [0, " +
                            std::to_string(num_frames) + ")");
    if (arc.symbol == SymbolTable::kNullId) continue;
    int col = p.Column(arc.symbol);
    if (col < 0)
      throw ValidationError("lattice " + lat.utterance_id + ": arc " + std::to_string(a) +
                            " has phone id " + std::to_string(arc.symbol) +
                            " missing from the phone table");
    for (int t = arc.start_frame; t < arc.end_frame; ++t) p.probs(t, col) += post[a];
  }
  for (int t = 0; t < num_frames; ++t)
    for (double &v : p.probs.Row(t)) v = std::max(v, epsilon);
  return p;
}

}  // namespace gmmd
