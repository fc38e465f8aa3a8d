// gmmd/common.h

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

#ifndef GMMD_COMMON_H_
#define GMMD_COMMON_H_

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gmmd {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &what) : std::runtime_error(what) {}
};

/// Malformed input file. The message carries the file, line and utterance
/// context when they are known.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A well-formed object that violates a structural invariant (cyclic
/// lattice, dimension mismatch between two operands, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log(exp(a) + exp(b)) without overflow.
inline double LogAdd(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kLogZero) return a;
  return a + std::log1p(std::exp(b - a));
}

}  // namespace gmmd

#endif  // GMMD_COMMON_H_
