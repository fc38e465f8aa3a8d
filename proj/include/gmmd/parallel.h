// gmmd/parallel.h

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

#ifndef GMMD_PARALLEL_H_
#define GMMD_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace gmmd {

/// Process-wide worker count used by ParallelFor (default 1).
void SetNumThreads(int num_threads);
int NumThreads();

/// Runs fn(0) .. fn(n-1) on up to NumThreads() workers. Callers write
/// results into per-index slots and reduce them in index order afterwards,
/// which keeps every output independent of the thread count. If any call
/// throws, the exception from the lowest index is rethrown.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)> &fn);

/// Block size used when splitting frame loops into deterministic chunks.
inline constexpr std::size_t kFrameBlock = 1024;

}  // namespace gmmd

#endif  // GMMD_PARALLEL_H_
