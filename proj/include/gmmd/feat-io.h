// gmmd/feat-io.h

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

#ifndef GMMD_FEAT_IO_H_
#define GMMD_FEAT_IO_H_

#include <map>
#include <string>
#include <vector>

#include "gmmd/diag-gmm.h"
#include "gmmd/feature-matrix.h"
#include "gmmd/ivector-extractor.h"
#include "gmmd/lattice.h"

namespace gmmd {

// All formats are line-oriented text. Lines starting with '#' are comments;
// writers emit one naming the format and the log base of any scores.
// Utterances are written in lexicographic id order and reals in their
// shortest round-trip decimal form. Readers throw ParseError carrying the
// path, line and utterance; writers go through a temporary file and rename.

/// UTT <id> <num_frames> <dim>, then one frame per line.
FeatureArchive ReadFeatureArchive(const std::string &path);
void WriteFeatureArchive(const FeatureArchive &data, const std::string &path);

/// ALI <id> <num_frames>, then "<state_id> <phone_id> <hmm_position>" lines.
AlignmentArchive ReadAlignments(const std::string &path);
void WriteAlignments(const AlignmentArchive &data, const std::string &path);

/// LAT <id> <num_nodes> <num_arcs> <start> <end>, then arcs
/// "<from> <to> <symbol> <start_frame> <end_frame> <ac> <lm> [<posterior>]".
/// Every lattice is validated.
LatticeSet ReadLatticeSet(const std::string &path);
void WriteLatticeSet(const LatticeSet &data, const std::string &path);

/// "<string> <id>" lines; "<eps> 0" is implied.
SymbolTable ReadSymbolTable(const std::string &path);
void WriteSymbolTable(const SymbolTable &table, const std::string &path);

/// GMMSET <N> <dim>; per state "STATE <state_id> <phone_id> <hmm_position> <M>"
/// followed by M lines "<weight> <mean...> <var...>".
AuxModel ReadAuxModel(const std::string &path);
void WriteAuxModel(const AuxModel &model, const std::string &path);

/// TV <K> <D> <M>, K UBM component lines, then K row-major D x M matrices.
TotalVariability ReadTotalVariability(const std::string &path);
void WriteTotalVariability(const TotalVariability &tv, const std::string &path);

/// CN <id> <num_bins>; per bin "BIN <k> <n>" then n lines "<symbol_id> <posterior>".
ConfusionNetworkSet ReadConfusionNetworks(const std::string &path);
void WriteConfusionNetworks(const ConfusionNetworkSet &data, const std::string &path);

/// "<utterance> <word> <word> ..." lines.
TranscriptSet ReadTranscripts(const std::string &path);
void WriteTranscripts(const TranscriptSet &data, const std::string &path);

/// "<speaker> <utterance> <utterance> ..." lines.
SpeakerMap ReadSpeakerMap(const std::string &path);

/// Whitespace-separated reals.
std::vector<double> ReadVector(const std::string &path);

/// "<key> <real>" lines.
std::map<std::string, double> ReadScalarMap(const std::string &path);
void WriteScalarMap(const std::map<std::string, double> &data, const std::string &path);

}  // namespace gmmd

#endif  // GMMD_FEAT_IO_H_
