/* Copyright 2026 The QCLand Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef QCL_CLI_HPP
#define QCL_CLI_HPP

#include <string>
#include <vector>

namespace qcl {

/// Entry point behind the qcland binary. Returns the process exit code;
/// failures print a machine-readable JSON error record on stderr.
int run_cli(int argc, const char* const* argv);

/// Convenience overload for in-process invocation (tests); `args` excludes
/// the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace qcl

#endif  // QCL_CLI_HPP
