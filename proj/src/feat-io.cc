// feat-io.cc

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

#include "gmmd/feat-io.h"

#include <cmath>
#include <fstream>
#include <optional>

#include "gmmd/common.h"
#include "gmmd/text-utils.h"

namespace gmmd {

namespace {

// Yields tokenized non-blank, non-comment lines and formats located errors.
class LineSource {
 public:
  explicit LineSource(const std::string &path) : path_(path), in_(path) {
    if (!in_) throw ParseError(path + ": cannot open for reading");
  }

  /// False at end of file.
  bool Next(std::vector<std::string> *tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      *tokens = Tokenize(line);
      return true;
    }
    return false;
  }

  std::vector<std::string> Expect(const std::string &what) {
    std::vector<std::string> tokens;
    if (!Next(&tokens)) Fail("unexpected end of file, expected " + what);
    return tokens;
  }

  [[noreturn]] void Fail(const std::string &msg) const {
    std::string where = path_ + ":" + std::to_string(line_no_);
    if (!utterance_.empty()) where += ": utterance " + utterance_;
    throw ParseError(where + ": " + msg);
  }

  void SetUtterance(std::string utt) { utterance_ = std::move(utt); }

  int Int(const std::string &tok, const std::string &what) const {
    try {
      return ParseInt(tok, what);
    } catch (const ParseError &e) {
      Fail(e.what());
    }
  }
  int NonNegative(const std::string &tok, const std::string &what) const {
    int v = Int(tok, what);
    if (v < 0) Fail(what + " must be non-negative");
    return v;
  }
  double Real(const std::string &tok, const std::string &what) const {
    double v;
    try {
      v = ParseDouble(tok, what);
    } catch (const ParseError &e) {
      Fail(e.what());
    }
    if (!std::isfinite(v)) Fail("non-finite " + what + " '" + tok + "'");
    return v;
  }

  void ExpectCount(const std::vector<std::string> &tokens, std::size_t n,
                   const std::string &what) const {
    if (tokens.size() != n)
      Fail(what + ": expected " + std::to_string(n) + " fields, found " +
           std::to_string(tokens.size()));
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::string utterance_;
};

void AppendReal(std::string *out, double v) {
  out->push_back(' ');
  *out += FormatDouble(v);
}

template <typename Map>
void InsertUnique(LineSource &src, Map &map, const std::string &id, typename Map::mapped_type v) {
  if (!map.emplace(id, std::move(v)).second) src.Fail("duplicate id " + id);
}

DiagonalGmm ReadComponents(LineSource &src, int num_comp, int dim) {
  std::vector<double> weights, means, vars;
  for (int m = 0; m < num_comp; ++m) {
    auto tok = src.Expect("mixture component");
    src.ExpectCount(tok, 1 + 2 * dim, "mixture component");
    weights.push_back(src.Real(tok[0], "weight"));
    for (int i = 0; i < dim; ++i) means.push_back(src.Real(tok[1 + i], "mean"));
    for (int i = 0; i < dim; ++i) vars.push_back(src.Real(tok[1 + dim + i], "variance"));
  }
  try {
    DiagonalGmm g(std::move(weights), std::move(means), std::move(vars));
    g.Validate();
    return g;
  } catch (const ValidationError &e) {
    src.Fail(e.what());
  }
}

void WriteComponents(const DiagonalGmm &g, std::string *out) {
  for (std::size_t m = 0; m < g.NumComponents(); ++m) {
    *out += FormatDouble(g.Weight(m));
    for (double v : g.Mean(m)) AppendReal(out, v);
    for (double v : g.Variance(m)) AppendReal(out, v);
    out->push_back('\n');
  }
}

}  // namespace

FeatureArchive ReadFeatureArchive(const std::string &path) {
  LineSource src(path);
  FeatureArchive data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.SetUtterance("");
    if (tok.size() != 4 || tok[0] != "UTT") src.Fail("expected 'UTT <id> <num_frames> <dim>'");
    src.SetUtterance(tok[1]);
    const int frames = src.NonNegative(tok[2], "frame count");
    const int dim = src.NonNegative(tok[3], "dimension");
    FeatureMatrix x(tok[1], dim);
    for (int t = 0; t < frames; ++t) {
      auto row = src.Expect("frame");
      if (row.size() != static_cast<std::size_t>(dim))
        src.Fail("dimension mismatch: frame " + std::to_string(t) + " has " +
                 std::to_string(row.size()) + " values, header says " + std::to_string(dim));
      std::vector<double> values(dim);
      for (int i = 0; i < dim; ++i) values[i] = src.Real(row[i], "feature value");
      x.AppendRow(values);
    }
    InsertUnique(src, data, tok[1], std::move(x));
  }
  return data;
}

void WriteFeatureArchive(const FeatureArchive &data, const std::string &path) {
  std::string out = "# feature archive\n";
  for (const auto &[utt, x] : data) {
    x.CheckFinite();
    out += "UTT " + utt + " " + std::to_string(x.NumFrames()) + " " + std::to_string(x.Dim()) + "\n";
    for (std::size_t t = 0; t < x.NumFrames(); ++t) {
      auto row = x.Row(t);
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(' ');
        out += FormatDouble(row[i]);
      }
      out.push_back('\n');
    }
  }
  AtomicWriteFile(path, out);
}

AlignmentArchive ReadAlignments(const std::string &path) {
  LineSource src(path);
  AlignmentArchive data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.SetUtterance("");
    if (tok.size() != 3 || tok[0] != "ALI") src.Fail("expected 'ALI <id> <num_frames>'");
    src.SetUtterance(tok[1]);
    AlignmentTrack track{tok[1], {}};
    const int frames = src.NonNegative(tok[2], "frame count");
    for (int t = 0; t < frames; ++t) {
      auto row = src.Expect("alignment label");
      src.ExpectCount(row, 3, "alignment label");
      AlignmentLabel l{src.NonNegative(row[0], "state id"), src.NonNegative(row[1], "phone id"),
                       src.NonNegative(row[2], "HMM position")};
      if (l.hmm_position > 2) src.Fail("HMM position must be 0, 1 or 2");
      track.labels.push_back(l);
    }
    InsertUnique(src, data, tok[1], std::move(track));
  }
  return data;
}

void WriteAlignments(const AlignmentArchive &data, const std::string &path) {
  std::string out = "# alignments: state_id phone_id hmm_position\n";
  for (const auto &[utt, track] : data) {
    out += "ALI " + utt + " " + std::to_string(track.NumFrames()) + "\n";
    for (const auto &l : track.labels)
      out += std::to_string(l.state_id) + " " + std::to_string(l.phone_id) + " " +
             std::to_string(l.hmm_position) + "\n";
  }
  AtomicWriteFile(path, out);
}

LatticeSet ReadLatticeSet(const std::string &path) {
  LineSource src(path);
  LatticeSet data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.SetUtterance("");
    if (tok.size() != 6 || tok[0] != "LAT")
      src.Fail("expected 'LAT <id> <num_nodes> <num_arcs> <start_node> <end_node>'");
    src.SetUtterance(tok[1]);
    Lattice lat;
    lat.utterance_id = tok[1];
    lat.num_nodes = src.NonNegative(tok[2], "node count");
    const int num_arcs = src.NonNegative(tok[3], "arc count");
    lat.start = src.NonNegative(tok[4], "start node");
    lat.end = src.NonNegative(tok[5], "end node");
    for (int a = 0; a < num_arcs; ++a) {
      auto row = src.Expect("arc");
      if (row.size() != 7 && row.size() != 8) src.Fail("arc needs 7 or 8 fields");
      LatticeArc arc;
      arc.from = src.NonNegative(row[0], "from node");
      arc.to = src.NonNegative(row[1], "to node");
      arc.symbol = src.NonNegative(row[2], "symbol id");
      arc.start_frame = src.NonNegative(row[3], "start frame");
      arc.end_frame = src.NonNegative(row[4], "end frame");
      arc.acoustic_score = src.Real(row[5], "acoustic score");
      arc.lm_score = src.Real(row[6], "LM score");
      if (row.size() == 8) arc.posterior = src.Real(row[7], "posterior");
      lat.arcs.push_back(arc);
    }
    try {
      lat.Validate();
    } catch (const ValidationError &e) {
      src.Fail(e.what());
    }
    InsertUnique(src, data, tok[1], std::move(lat));
  }
  return data;
}

void WriteLatticeSet(const LatticeSet &data, const std::string &path) {
  std::string out =
      "# lattices: from to symbol start_frame end_frame acoustic_score lm_score [posterior]; "
      "scores are natural-log likelihoods\n";
  for (const auto &[utt, lat] : data) {
    out += "LAT " + utt + " " + std::to_string(lat.num_nodes) + " " +
           std::to_string(lat.arcs.size()) + " " + std::to_string(lat.start) + " " +
           std::to_string(lat.end) + "\n";
    for (const auto &arc : lat.arcs) {
      out += std::to_string(arc.from) + " " + std::to_string(arc.to) + " " +
             std::to_string(arc.symbol) + " " + std::to_string(arc.start_frame) + " " +
             std::to_string(arc.end_frame);
      AppendReal(&out, arc.acoustic_score);
      AppendReal(&out, arc.lm_score);
      if (arc.posterior) AppendReal(&out, *arc.posterior);
      out.push_back('\n');
    }
  }
  AtomicWriteFile(path, out);
}

SymbolTable ReadSymbolTable(const std::string &path) {
  LineSource src(path);
  SymbolTable table;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.ExpectCount(tok, 2, "symbol entry");
    try {
      table.Add(tok[0], src.NonNegative(tok[1], "symbol id"));
    } catch (const ValidationError &e) {
      src.Fail(e.what());
    }
  }
  return table;
}

void WriteSymbolTable(const SymbolTable &table, const std::string &path) {
  std::string out;
  for (const auto &[id, sym] : table.ById()) out += sym + " " + std::to_string(id) + "\n";
  AtomicWriteFile(path, out);
}

AuxModel ReadAuxModel(const std::string &path) {
  LineSource src(path);
  auto tok = src.Expect("GMMSET header");
  if (tok.size() != 3 || tok[0] != "GMMSET") src.Fail("expected 'GMMSET <N> <dim>'");
  const int n = src.NonNegative(tok[1], "state count");
  const int dim = src.NonNegative(tok[2], "dimension");
  AuxModel model;
  for (int s = 0; s < n; ++s) {
    auto st = src.Expect("STATE line");
    if (st.size() != 5 || st[0] != "STATE")
      src.Fail("expected 'STATE <state_id> <phone_id> <hmm_position> <M>'");
    if (src.NonNegative(st[1], "state id") != s)
      src.Fail("states must be listed in order; expected state " + std::to_string(s));
    StateInfo info{src.NonNegative(st[2], "phone id"), src.NonNegative(st[3], "HMM position")};
    if (info.hmm_position > 2) src.Fail("HMM position must be 0, 1 or 2");
    const int m = src.NonNegative(st[4], "component count");
    if (m < 1) src.Fail("state needs at least one component");
    model.states.push_back(ReadComponents(src, m, dim));
    model.info.push_back(info);
  }
  std::vector<std::string> extra;
  if (src.Next(&extra)) src.Fail("trailing content after last state");
  try {
    model.Validate();
  } catch (const ValidationError &e) {
    src.Fail(e.what());
  }
  return model;
}

void WriteAuxModel(const AuxModel &model, const std::string &path) {
  model.Validate();
  std::string out = "# GMM set: weight means variances per component; log-likelihoods are natural log\n";
  out += "GMMSET " + std::to_string(model.NumStates()) + " " + std::to_string(model.Dim()) + "\n";
  for (std::size_t s = 0; s < model.NumStates(); ++s) {
    out += "STATE " + std::to_string(s) + " " + std::to_string(model.info[s].phone_id) + " " +
           std::to_string(model.info[s].hmm_position) + " " +
           std::to_string(model.states[s].NumComponents()) + "\n";
    WriteComponents(model.states[s], &out);
  }
  AtomicWriteFile(path, out);
}

TotalVariability ReadTotalVariability(const std::string &path) {
  LineSource src(path);
  auto tok = src.Expect("TV header");
  if (tok.size() != 4 || tok[0] != "TV") src.Fail("expected 'TV <K> <D> <M>'");
  const int k_count = src.NonNegative(tok[1], "component count");
  const int d = src.NonNegative(tok[2], "feature dimension");
  const int m = src.NonNegative(tok[3], "i-vector dimension");
  if (k_count < 1 || d < 1 || m < 1) src.Fail("K, D and M must be positive");
  TotalVariability tv;
  tv.ubm = ReadComponents(src, k_count, d);
  for (int k = 0; k < k_count; ++k) {
    Eigen::MatrixXd t(d, m);
    for (int i = 0; i < d; ++i) {
      auto row = src.Expect("loading matrix row");
      src.ExpectCount(row, m, "loading matrix row");
      for (int j = 0; j < m; ++j) t(i, j) = src.Real(row[j], "loading");
    }
    tv.loadings.push_back(std::move(t));
  }
  std::vector<std::string> extra;
  if (src.Next(&extra)) src.Fail("trailing content after loading matrices");
  return tv;
}

void WriteTotalVariability(const TotalVariability &tv, const std::string &path) {
  tv.Validate();
  std::string out = "# total variability model: UBM components, then row-major loading matrices\n";
  out += "TV " + std::to_string(tv.NumComponents()) + " " + std::to_string(tv.FeatureDim()) + " " +
         std::to_string(tv.IvectorDim()) + "\n";
  WriteComponents(tv.ubm, &out);
  for (const auto &t : tv.loadings)
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        if (j) out.push_back(' ');
        out += FormatDouble(t(i, j));
      }
      out.push_back('\n');
    }
  AtomicWriteFile(path, out);
}

ConfusionNetworkSet ReadConfusionNetworks(const std::string &path) {
  LineSource src(path);
  ConfusionNetworkSet data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.SetUtterance("");
    if (tok.size() != 3 || tok[0] != "CN") src.Fail("expected 'CN <id> <num_bins>'");
    src.SetUtterance(tok[1]);
    ConfusionNetwork cn;
    cn.utterance_id = tok[1];
    const int bins = src.NonNegative(tok[2], "bin count");
    for (int b = 0; b < bins; ++b) {
      auto hdr = src.Expect("BIN line");
      if (hdr.size() != 3 || hdr[0] != "BIN") src.Fail("expected 'BIN <k> <n>'");
      if (src.NonNegative(hdr[1], "bin index") != b) src.Fail("bins must be numbered in order");
      const int n = src.NonNegative(hdr[2], "entry count");
      std::vector<ConfusionBinEntry> bin;
      for (int e = 0; e < n; ++e) {
        auto row = src.Expect("bin entry");
        src.ExpectCount(row, 2, "bin entry");
        bin.push_back({src.NonNegative(row[0], "symbol id"), src.Real(row[1], "posterior")});
      }
      cn.bins.push_back(std::move(bin));
    }
    try {
      cn.Validate();
    } catch (const ValidationError &e) {
      src.Fail(e.what());
    }
    InsertUnique(src, data, tok[1], std::move(cn));
  }
  return data;
}

void WriteConfusionNetworks(const ConfusionNetworkSet &data, const std::string &path) {
  std::string out = "# confusion networks: symbol_id posterior (probability domain)\n";
  for (const auto &[utt, cn] : data) {
    out += "CN " + utt + " " + std::to_string(cn.bins.size()) + "\n";
    for (std::size_t b = 0; b < cn.bins.size(); ++b) {
      out += "BIN " + std::to_string(b) + " " + std::to_string(cn.bins[b].size()) + "\n";
      for (const auto &e : cn.bins[b]) out += std::to_string(e.symbol) + " " + FormatDouble(e.posterior) + "\n";
    }
  }
  AtomicWriteFile(path, out);
}

TranscriptSet ReadTranscripts(const std::string &path) {
  LineSource src(path);
  TranscriptSet data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.SetUtterance(tok[0]);
    InsertUnique(src, data, tok[0], WordSequence(tok.begin() + 1, tok.end()));
  }
  return data;
}

void WriteTranscripts(const TranscriptSet &data, const std::string &path) {
  std::string out;
  for (const auto &[utt, words] : data) {
    out += utt;
    for (const auto &w : words) out += " " + w;
    out.push_back('\n');
  }
  AtomicWriteFile(path, out);
}

SpeakerMap ReadSpeakerMap(const std::string &path) {
  LineSource src(path);
  SpeakerMap data;
  std::vector<std::string> tok;
  std::map<std::string, std::string> owner;
  while (src.Next(&tok)) {
    if (tok.size() < 2) src.Fail("speaker without utterances");
    for (std::size_t i = 1; i < tok.size(); ++i)
      if (!owner.emplace(tok[i], tok[0]).second)
        src.Fail("utterance " + tok[i] + " listed for two speakers");
    InsertUnique(src, data, tok[0], std::vector<std::string>(tok.begin() + 1, tok.end()));
  }
  return data;
}

std::vector<double> ReadVector(const std::string &path) {
  LineSource src(path);
  std::vector<double> v;
  std::vector<std::string> tok;
  while (src.Next(&tok))
    for (const auto &t : tok) v.push_back(src.Real(t, "value"));
  return v;
}

std::map<std::string, double> ReadScalarMap(const std::string &path) {
  LineSource src(path);
  std::map<std::string, double> data;
  std::vector<std::string> tok;
  while (src.Next(&tok)) {
    src.ExpectCount(tok, 2, "key/value entry");
    InsertUnique(src, data, tok[0], src.Real(tok[1], "value"));
  }
  return data;
}

void WriteScalarMap(const std::map<std::string, double> &data, const std::string &path) {
  std::string out;
  for (const auto &[key, v] : data) out += key + " " + FormatDouble(v) + "\n";
  AtomicWriteFile(path, out);
}

}  // namespace gmmd
