// gmmd/text-utils.h

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

#ifndef GMMD_TEXT_UTILS_H_
#define GMMD_TEXT_UTILS_H_

#include <string>
#include <string_view>
#include <vector>

namespace gmmd {

std::vector<std::string> Split(std::string_view s, char sep);
/// Whitespace tokenization.
std::vector<std::string> Tokenize(std::string_view s);
std::string Trim(std::string_view s);

/// Strict numeric parsing; throws ParseError mentioning `what`.
int ParseInt(std::string_view s, std::string_view what);
long long ParseInt64(std::string_view s, std::string_view what);
double ParseDouble(std::string_view s, std::string_view what);

/// Shortest decimal that reads back to the same double (17 significant
/// digits at most, never fewer than needed).
std::string FormatDouble(double v);

/// Writes `content` to `path` through a temporary file and a rename, so a
/// failed write never leaves a partial file behind.
void AtomicWriteFile(const std::string &path, const std::string &content);
std::string ReadFileToString(const std::string &path);

}  // namespace gmmd

#endif  // GMMD_TEXT_UTILS_H_
