// cli.h

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

#ifndef GMMD_TOOLS_CLI_H_
#define GMMD_TOOLS_CLI_H_

#include <string>
#include <vector>

namespace gmmd {

/// Runs one gmmdtk command line (without the program name). Global flags
/// (--seed, --threads, --log-level) may precede the subcommand. Returns the
/// process exit status; errors are reported on stderr.
int RunCli(const std::vector<std::string> &args);

}  // namespace gmmd

#endif  // GMMD_TOOLS_CLI_H_
