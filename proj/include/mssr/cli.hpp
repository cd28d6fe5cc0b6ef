// Copyright 2026 The MSSR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>

namespace mssr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Command-line entry point: subcommands train, infer, eval, inspect,
/// self-test and split. Results go to `out`, diagnostics to `err`.
/// Returns 0 on success, 1 when the operation fails and 2 on a usage error
/// (nothing is executed in that case).
int dispatch(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace mssr
