// gmmd/analysis.h

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

#ifndef GMMD_ANALYSIS_H_
#define GMMD_ANALYSIS_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gmmd/feature-matrix.h"
#include "gmmd/lattice-functions.h"

namespace gmmd {

// ---------------------------------------------------------------------------
// Cluster validity

/// Davies-Bouldin index: mean over clusters of max_{j != k}
/// (s_k + s_j) / d(c_k, c_j), where s_k is the root-mean-square distance of
/// the members of k to their centroid c_k. Lower is better. Needs at least
/// two clusters; coincident centroids are an error.
double DbIndex(const std::vector<std::vector<double>> &vectors, const std::vector<int> &labels);

// ---------------------------------------------------------------------------
// Frame-level phone diagnostics

/// Frames whose reference phone is not a silence phone.
std::vector<bool> SpeechMask(const AlignmentTrack &ref, const std::set<int> &silence_phones);

struct FrameErrorCounts {
  std::size_t speech_frames = 0;
  std::size_t errors = 0;         // argmax phone != reference phone
  std::size_t oracle_errors = 0;  // reference phone absent (<= floor)

  double Fer() const { return speech_frames ? double(errors) / speech_frames : 0.0; }
  double OracleFer() const { return speech_frames ? double(oracle_errors) / speech_frames : 0.0; }
  FrameErrorCounts &operator+=(const FrameErrorCounts &o);
};

/// Counts over speech frames. The argmax takes the lowest phone id on ties;
/// a frame where no phone rises above the floor counts as an error.
FrameErrorCounts FrameErrorRates(const PhonePosteriorMatrix &p, const AlignmentTrack &ref,
                                 const std::vector<bool> &speech_mask);

struct HistogramBin {
  double lower = 0.0;
  std::size_t count = 0;
  double fraction = 0.0;
};

/// (value, cumulative fraction) at every distinct value, ascending.
std::vector<std::pair<double, double>> EmpiricalCdf(std::vector<double> values);
/// Fixed-width bins anchored at 0 (bin k covers [k w, (k+1) w)).
std::vector<HistogramBin> Histogram(const std::vector<double> &values, double bin_width);

struct LatticeStatsReport {
  std::vector<double> num_alternatives;  // per speech frame
  std::vector<double> correct_rank;      // 1-based, frames where present
  std::vector<double> correct_logprob;   // frames where present
  double mean_logprob = 0.0;
  double sd_logprob = 0.0;
};

/// Per speech frame: the number of phones above the floor, the rank of the
/// reference phone among them (descending posterior, lower id first on
/// ties) and its log posterior.
LatticeStatsReport LatticeStatistics(const std::vector<PhonePosteriorMatrix> &posteriors,
                                     const std::vector<AlignmentTrack> &refs,
                                     const std::vector<std::vector<bool>> &speech_masks);

std::string LatticeStatsText(const LatticeStatsReport &r, double bin_width);
std::string LatticeStatsTable(const LatticeStatsReport &r, double bin_width);

// ---------------------------------------------------------------------------
// Word error rate

struct EditCounts {
  std::size_t ref_words = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  std::size_t Errors() const { return substitutions + insertions + deletions; }
  EditCounts &operator+=(const EditCounts &o);
  bool operator==(const EditCounts &) const = default;
};

/// Unit-cost Levenshtein alignment. The backtrace prefers a match or
/// substitution, then an insertion, then a deletion.
EditCounts AlignWords(const WordSequence &ref, const WordSequence &hyp);

struct WerReport {
  std::map<std::string, EditCounts> per_utterance;
  EditCounts total;
  /// Percent.
  double Wer() const;
};

/// Throws ValidationError for a hypothesis whose utterance has no
/// reference. A reference without hypothesis is scored as all deletions.
WerReport WerScore(const TranscriptSet &refs, const TranscriptSet &hyps);
std::string WerText(const WerReport &r);
std::string WerTable(const WerReport &r);

/// 100 * (base - system) / base. Throws when base is zero.
double RelativeWerr(double base_wer, double system_wer);

struct WerrRow {
  std::string speaker;
  double base_wer = 0.0;
  double system_wer = 0.0;
  std::optional<double> werr;  // absent when the baseline is error-free
  std::optional<double> likelihood_gain;
};

struct WerrReport {
  double base_wer = 0.0;
  double system_wer = 0.0;
  double werr = 0.0;
  std::vector<WerrRow> speakers;
};

/// Overall and (optionally) per-speaker relative WER reduction. The two
/// reports must cover the same utterances.
WerrReport ComputeWerr(const WerReport &base, const WerReport &system,
                       const SpeakerMap *speakers = nullptr,
                       const std::map<std::string, double> *gains = nullptr);
std::string WerrText(const WerrReport &r);
std::string WerrTable(const WerrReport &r);

// ---------------------------------------------------------------------------
// Labeled vector export for external embedding tools

/// Phone group member lists (ARPAbet base phones): "vowels",
/// "consonants-1", "consonants-2". Throws ValidationError otherwise.
const std::set<std::string> &PhoneGroup(const std::string &name);

/// "AH1_I" -> "AH": drops a word-position suffix and stress digits.
std::string BasePhone(const std::string &phone);

struct LabeledVector {
  std::string label;
  std::vector<double> values;
};

/// Rows whose HMM position is `hmm_position` and whose phone belongs to the
/// group, in utterance then frame order.
std::vector<LabeledVector> TsneSelect(const FeatureArchive &vectors, const AlignmentArchive &ali,
                                      const SymbolTable &phones, const std::string &group,
                                      int hmm_position = 1);
/// Tab-separated: header "label x0 x1 ..." then one row per vector.
std::string TsneTable(const std::vector<LabeledVector> &rows, std::size_t dim);

}  // namespace gmmd

#endif  // GMMD_ANALYSIS_H_
