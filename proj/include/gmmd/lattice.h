// gmmd/lattice.h

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

#ifndef GMMD_LATTICE_H_
#define GMMD_LATTICE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gmmd {

/// Bidirectional symbol_id <-> string map. Id 0 is reserved for the null
/// symbol, printed as "<eps>".
class SymbolTable {
 public:
  static constexpr int kNullId = 0;
  static constexpr const char *kNullSymbol = "<eps>";

  SymbolTable();

  /// Throws ValidationError if either the id or the string is already bound
  /// to something else.
  void Add(const std::string &symbol, int id);
  /// Adds a symbol with the next free id (or returns the existing id).
  int AddOrGet(const std::string &symbol);

  std::optional<int> Find(const std::string &symbol) const;
  std::optional<std::string> Find(int id) const;
  /// Throws ValidationError for an unknown id.
  const std::string &Symbol(int id) const;
  int Id(const std::string &symbol) const;

  /// Non-null ids in ascending order.
  std::vector<int> NonNullIds() const;
  const std::map<int, std::string> &ById() const { return by_id_; }
  std::size_t Size() const { return by_id_.size(); }

 private:
  std::map<int, std::string> by_id_;
  std::map<std::string, int> by_symbol_;
};

struct LatticeArc {
  int from = 0;
  int to = 0;
  int symbol = 0;
  int start_frame = 0;
  int end_frame = 0;
  double acoustic_score = 0.0;  // natural log
  double lm_score = 0.0;        // natural log
  std::optional<double> posterior;

  bool operator==(const LatticeArc &) const = default;
};

/// Acyclic graph of time-spanned scored arcs with one start and one end node.
struct Lattice {
  std::string utterance_id;
  int num_nodes = 0;
  int start = 0;
  int end = 0;
  std::vector<LatticeArc> arcs;

  /// Throws ValidationError naming the utterance when any invariant fails:
  /// node ids in range, at least one arc, acyclic, single start and end,
  /// every arc on a start->end path, positive arc durations, abutting spans.
  void Validate() const;

  /// Node ids in topological order starting at `start`. Throws on a cycle.
  std::vector<int> TopologicalOrder() const;

  /// Frame index at which the lattice begins and ends.
  int StartFrame() const;
  int EndFrame() const;

  bool AllArcsHavePosteriors() const;

  bool operator==(const Lattice &) const = default;
};

using LatticeSet = std::map<std::string, Lattice>;

struct ConfusionBinEntry {
  int symbol = 0;
  double posterior = 0.0;
  bool operator==(const ConfusionBinEntry &) const = default;
};

/// Time-ordered bins of competing symbols; each bin sums to one with the null
/// symbol absorbing the residual mass.
struct ConfusionNetwork {
  std::string utterance_id;
  std::vector<std::vector<ConfusionBinEntry>> bins;

  /// Throws ValidationError if a bin is empty, has a negative posterior or
  /// does not sum to one within 1e-6.
  void Validate() const;
  bool operator==(const ConfusionNetwork &) const = default;
};

using ConfusionNetworkSet = std::map<std::string, ConfusionNetwork>;

}  // namespace gmmd

#endif  // GMMD_LATTICE_H_
