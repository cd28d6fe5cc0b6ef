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
#include <string>
#include <vector>

namespace mssr {

struct SelfTestCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Quick built-in checks: operator gradchecks, a direct-convolution oracle,
/// preset audits, metric closed forms, self-ensemble and tiling identities
/// and a checkpoint roundtrip. Prints one line per case to `out`.
std::vector<SelfTestCase> run_self_test(std::ostream& out);

}  // namespace mssr
