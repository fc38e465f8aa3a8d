// analysis.cc

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

#include "gmmd/analysis.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <spdlog/fmt/fmt.h>

#include "gmmd/common.h"

namespace gmmd {

double DbIndex(const std::vector<std::vector<double>> &vectors, const std::vector<int> &labels) {
  if (vectors.size() != labels.size())
    throw ValidationError("DB index: " + std::to_string(vectors.size()) + " vectors but " +
                          std::to_string(labels.size()) + " labels");
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
  if (members.size() < 2) throw ValidationError("DB index needs at least two clusters");
  const std::size_t d = vectors.front().size();
  for (const auto &v : vectors)
    if (v.size() != d) throw ValidationError("DB index: vectors differ in dimension");

  std::vector<std::vector<double>> centroids;
  std::vector<double> scatter;
  for (const auto &[label, idx] : members) {
    std::vector<double> c(d, 0.0);
    for (std::size_t i : idx)
      for (std::size_t j = 0; j < d; ++j) c[j] += vectors[i][j];
    for (double &x : c) x /= idx.size();
    double sq = 0.0;
    for (std::size_t i : idx)
      for (std::size_t j = 0; j < d; ++j) sq += (vectors[i][j] - c[j]) * (vectors[i][j] - c[j]);
    scatter.push_back(std::sqrt(sq / idx.size()));
    centroids.push_back(std::move(c));
  }
  const std::size_t k_count = centroids.size();
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k_count; ++j) {
      if (j == k) continue;
      double sq = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        sq += (centroids[k][i] - centroids[j][i]) * (centroids[k][i] - centroids[j][i]);
      const double rho = std::sqrt(sq);
      if (rho == 0.0) throw ValidationError("DB index: two clusters share a centroid");
      worst = std::max(worst, (scatter[k] + scatter[j]) / rho);
    }
    total += worst;
  }
  return total / k_count;
}

std::vector<bool> SpeechMask(const AlignmentTrack &ref, const std::set<int> &silence_phones) {
  std::vector<bool> mask(ref.NumFrames());
  for (std::size_t t = 0; t < mask.size(); ++t)
    mask[t] = !silence_phones.count(ref.labels[t].phone_id);
  return mask;
}

FrameErrorCounts &FrameErrorCounts::operator+=(const FrameErrorCounts &o) {
  speech_frames += o.speech_frames;
  errors += o.errors;
  oracle_errors += o.oracle_errors;
  return *this;
}

namespace {

void CheckLengths(const PhonePosteriorMatrix &p, const AlignmentTrack &ref,
                  const std::vector<bool> &mask) {
  if (p.NumFrames() != ref.NumFrames() || mask.size() != ref.NumFrames())
    throw ValidationError("utterance " + ref.utterance_id + ": " + std::to_string(p.NumFrames()) +
                          " posterior frames, " + std::to_string(ref.NumFrames()) +
                          " reference frames, " + std::to_string(mask.size()) + " mask entries");
}

}  // namespace

FrameErrorCounts FrameErrorRates(const PhonePosteriorMatrix &p, const AlignmentTrack &ref,
                                 const std::vector<bool> &speech_mask) {
  CheckLengths(p, ref, speech_mask);
  FrameErrorCounts c;
  const std::size_t m = p.phone_ids.size();
  for (std::size_t t = 0; t < ref.NumFrames(); ++t) {
    if (!speech_mask[t]) continue;
    ++c.speech_frames;
    const int col = p.Column(ref.labels[t].phone_id);
    std::size_t best = 0;
    for (std::size_t k = 1; k < m; ++k)
      if (p.probs(t, k) > p.probs(t, best)) best = k;
    const bool any = m > 0 && p.Present(t, best);
    if (!any || static_cast<int>(best) != col) ++c.errors;
    if (col < 0 || !p.Present(t, col)) ++c.oracle_errors;
  }
  return c;
}

std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> cdf;
  const double n = values.size();
  for (std::size_t i = 0; i < values.size(); ++i)
    if (i + 1 == values.size() || values[i + 1] != values[i]) cdf.emplace_back(values[i], (i + 1) / n);
  return cdf;
}

std::vector<HistogramBin> Histogram(const std::vector<double> &values, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("histogram bin width must be positive");
  std::vector<HistogramBin> bins;
  if (values.empty()) return bins;
  std::map<long long, std::size_t> counts;
  for (double v : values) ++counts[static_cast<long long>(std::floor(v / bin_width))];
  for (long long k = counts.begin()->first; k <= counts.rbegin()->first; ++k) {
    HistogramBin b;
    b.lower = k * bin_width;
    auto it = counts.find(k);
    b.count = it == counts.end() ? 0 : it->second;
    b.fraction = static_cast<double>(b.count) / values.size();
    bins.push_back(b);
  }
  return bins;
}

LatticeStatsReport LatticeStatistics(const std::vector<PhonePosteriorMatrix> &posteriors,
                                     const std::vector<AlignmentTrack> &refs,
                                     const std::vector<std::vector<bool>> &speech_masks) {
  if (posteriors.size() != refs.size() || refs.size() != speech_masks.size())
    throw ValidationError("lattice statistics: input sets differ in size");
  LatticeStatsReport r;
  for (std::size_t u = 0; u < refs.size(); ++u) {
    const auto &p = posteriors[u];
    CheckLengths(p, refs[u], speech_masks[u]);
    const std::size_t m = p.phone_ids.size();
    for (std::size_t t = 0; t < refs[u].NumFrames(); ++t) {
      if (!speech_masks[u][t]) continue;
      std::size_t present = 0;
      for (std::size_t k = 0; k < m; ++k) present += p.Present(t, k);
      r.num_alternatives.push_back(present);
      const int col = p.Column(refs[u].labels[t].phone_id);
      if (col < 0 || !p.Present(t, col)) continue;
      const double ref_p = p.probs(t, col);
      std::size_t rank = 1;
      for (std::size_t k = 0; k < m; ++k)
        if (p.probs(t, k) > ref_p || (p.probs(t, k) == ref_p && static_cast<int>(k) < col)) ++rank;
      r.correct_rank.push_back(rank);
      r.correct_logprob.push_back(std::log(ref_p));
    }
  }
  if (!r.correct_logprob.empty()) {
    double sum = 0.0;
    for (double v : r.correct_logprob) sum += v;
    r.mean_logprob = sum / r.correct_logprob.size();
    double sq = 0.0;
    for (double v : r.correct_logprob) sq += (v - r.mean_logprob) * (v - r.mean_logprob);
    r.sd_logprob = std::sqrt(sq / r.correct_logprob.size());
  }
  return r;
}

std::string LatticeStatsText(const LatticeStatsReport &r, double bin_width) {
  std::string out;
  out += fmt::format("speech frames: {}\n", r.num_alternatives.size());
  out += fmt::format("frames with correct phone: {}\n", r.correct_rank.size());
  out += fmt::format("average correct log-prob: {:.4f} +- {:.4f}\n", r.mean_logprob, r.sd_logprob);
  out += "number of alternatives (value, cdf):\n";
  for (auto [v, f] : EmpiricalCdf(r.num_alternatives)) out += fmt::format("  {:g} {:.6f}\n", v, f);
  out += "rank of correct phone (value, cdf):\n";
  for (auto [v, f] : EmpiricalCdf(r.correct_rank)) out += fmt::format("  {:g} {:.6f}\n", v, f);
  out += "correct log-prob histogram (bin lower edge, count, fraction):\n";
  for (const auto &b : Histogram(r.correct_logprob, bin_width))
    out += fmt::format("  {:g} {} {:.6f}\n", b.lower, b.count, b.fraction);
  return out;
}

std::string LatticeStatsTable(const LatticeStatsReport &r, double bin_width) {
  std::string out = "section\tvalue\tfraction\n";
  for (auto [v, f] : EmpiricalCdf(r.num_alternatives))
    out += fmt::format("alternatives_cdf\t{}\t{}\n", v, f);
  for (auto [v, f] : EmpiricalCdf(r.correct_rank)) out += fmt::format("rank_cdf\t{}\t{}\n", v, f);
  for (const auto &b : Histogram(r.correct_logprob, bin_width))
    out += fmt::format("logprob_hist\t{}\t{}\n", b.lower, b.fraction);
  out += fmt::format("mean_logprob\t{}\t\nsd_logprob\t{}\t\n", r.mean_logprob, r.sd_logprob);
  return out;
}

EditCounts &EditCounts::operator+=(const EditCounts &o) {
  ref_words += o.ref_words;
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  return *this;
}

EditCounts AlignWords(const WordSequence &ref, const WordSequence &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      cost[i][j] = std::min({cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]), cost[i][j - 1] + 1,
                             cost[i - 1][j] + 1});
  EditCounts c;
  c.ref_words = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && cost[i][j] == cost[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      c.substitutions += ref[i - 1] != hyp[j - 1];
      --i, --j;
    } else if (j > 0 && cost[i][j] == cost[i][j - 1] + 1) {
      ++c.insertions;
      --j;
    } else {
      ++c.deletions;
      --i;
    }
  }
  return c;
}

double WerReport::Wer() const {
  if (total.ref_words == 0)
    return total.Errors() ? std::numeric_limits<double>::infinity() : 0.0;
  return 100.0 * total.Errors() / total.ref_words;
}

WerReport WerScore(const TranscriptSet &refs, const TranscriptSet &hyps) {
  for (const auto &[utt, words] : hyps)
    if (!refs.count(utt)) throw ValidationError("hypothesis for unknown utterance " + utt);
  WerReport r;
  static const WordSequence kEmpty;
  for (const auto &[utt, ref] : refs) {
    auto it = hyps.find(utt);
    EditCounts c = AlignWords(ref, it == hyps.end() ? kEmpty : it->second);
    r.per_utterance[utt] = c;
    r.total += c;
  }
  return r;
}

std::string WerText(const WerReport &r) {
  return fmt::format("%WER {:.2f} [ {} / {}, {} ins, {} del, {} sub ]\n", r.Wer(), r.total.Errors(),
                     r.total.ref_words, r.total.insertions, r.total.deletions,
                     r.total.substitutions);
}

std::string WerTable(const WerReport &r) {
  std::string out = "utterance\tref_words\tsubstitutions\tinsertions\tdeletions\n";
  auto row = [&](const std::string &name, const EditCounts &c) {
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", name, c.ref_words, c.substitutions, c.insertions,
                       c.deletions);
  };
  for (const auto &[utt, c] : r.per_utterance) row(utt, c);
  row("TOTAL", r.total);
  return out;
}

double RelativeWerr(double base_wer, double system_wer) {
  if (base_wer == 0.0) throw ValidationError("relative WER reduction undefined for zero baseline");
  return 100.0 * (base_wer - system_wer) / base_wer;
}

WerrReport ComputeWerr(const WerReport &base, const WerReport &system, const SpeakerMap *speakers,
                       const std::map<std::string, double> *gains) {
  if (base.per_utterance.size() != system.per_utterance.size())
    throw ValidationError("WER reports cover different utterance sets");
  for (const auto &[utt, c] : base.per_utterance) {
    auto it = system.per_utterance.find(utt);
    if (it == system.per_utterance.end() || it->second.ref_words != c.ref_words)
      throw ValidationError("WER reports disagree on utterance " + utt);
  }
  WerrReport r;
  r.base_wer = base.Wer();
  r.system_wer = system.Wer();
  r.werr = RelativeWerr(r.base_wer, r.system_wer);
  if (!speakers) return r;
  for (const auto &[spk, utts] : *speakers) {
    WerReport b, s;
    for (const auto &utt : utts) {
      auto it = base.per_utterance.find(utt);
      if (it == base.per_utterance.end()) continue;
      b.total += it->second;
      s.total += system.per_utterance.at(utt);
    }
    WerrRow row;
    row.speaker = spk;
    row.base_wer = b.Wer();
    row.system_wer = s.Wer();
    if (row.base_wer > 0.0) row.werr = RelativeWerr(row.base_wer, row.system_wer);
    if (gains) {
      auto g = gains->find(spk);
      if (g != gains->end()) row.likelihood_gain = g->second;
    }
    r.speakers.push_back(row);
  }
  return r;
}

std::string WerrText(const WerrReport &r) {
  std::string out = fmt::format("baseline WER {:.2f}  system WER {:.2f}  relative WERR {:.1f}%\n",
                                r.base_wer, r.system_wer, r.werr);
  std::size_t improved = 0;
  for (const auto &row : r.speakers) {
    out += fmt::format("  {} base {:.2f} system {:.2f} WERR {}", row.speaker, row.base_wer,
                       row.system_wer, row.werr ? fmt::format("{:.1f}%", *row.werr) : "n/a");
    if (row.likelihood_gain) out += fmt::format(" gain {:.6f}", *row.likelihood_gain);
    out += "\n";
    improved += row.system_wer < row.base_wer;
  }
  if (!r.speakers.empty())
    out += fmt::format("speakers improved: {} / {}\n", improved, r.speakers.size());
  return out;
}

std::string WerrTable(const WerrReport &r) {
  std::string out = "speaker\tbase_wer\tsystem_wer\twerr\tlikelihood_gain\n";
  out += fmt::format("ALL\t{}\t{}\t{}\t\n", r.base_wer, r.system_wer, r.werr);
  for (const auto &row : r.speakers)
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", row.speaker, row.base_wer, row.system_wer,
                       row.werr ? fmt::format("{}", *row.werr) : "",
                       row.likelihood_gain ? fmt::format("{}", *row.likelihood_gain) : "");
  return out;
}

const std::set<std::string> &PhoneGroup(const std::string &name) {
  static const std::map<std::string, std::set<std::string>> kGroups = {
      {"vowels", {"UH", "OW", "AO", "EY", "ER", "AA", "AY", "IY", "EH", "AE", "IH", "AH"}},
      {"consonants-1", {"L", "R", "M", "N", "NG", "W"}},
      {"consonants-2", {"P", "T", "D", "K", "CH", "F", "V", "TH", "S", "Z", "SH"}},
  };
  auto it = kGroups.find(name);
  if (it == kGroups.end()) throw ValidationError("unknown phone group " + name);
  return it->second;
}

std::string BasePhone(const std::string &phone) {
  std::string p = phone;
  if (p.size() > 2 && p[p.size() - 2] == '_' && std::string("BIES").find(p.back()) != std::string::npos)
    p.resize(p.size() - 2);
  while (!p.empty() && std::isdigit(static_cast<unsigned char>(p.back()))) p.pop_back();
  for (char &c : p) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return p;
}

std::vector<LabeledVector> TsneSelect(const FeatureArchive &vectors, const AlignmentArchive &ali,
                                      const SymbolTable &phones, const std::string &group,
                                      int hmm_position) {
  const auto &members = PhoneGroup(group);
  std::vector<LabeledVector> rows;
  for (const auto &[utt, x] : vectors) {
    auto it = ali.find(utt);
    if (it == ali.end()) throw ValidationError("no alignment for utterance " + utt);
    if (it->second.NumFrames() != x.NumFrames())
      throw ValidationError("utterance " + utt + ": alignment length mismatch");
    for (std::size_t t = 0; t < x.NumFrames(); ++t) {
      const auto &l = it->second.labels[t];
      if (l.hmm_position != hmm_position) continue;
      std::string base = BasePhone(phones.Symbol(l.phone_id));
      if (!members.count(base)) continue;
      auto row = x.Row(t);
      rows.push_back({base, std::vector<double>(row.begin(), row.end())});
    }
  }
  return rows;
}

std::string TsneTable(const std::vector<LabeledVector> &rows, std::size_t dim) {
  std::string out = "label";
  for (std::size_t i = 0; i < dim; ++i) out += fmt::format("\tx{}", i);
  out += "\n";
  for (const auto &r : rows) {
    out += r.label;
    for (double v : r.values) out += fmt::format("\t{}", v);
    out += "\n";
  }
  return out;
}

}  // namespace gmmd
