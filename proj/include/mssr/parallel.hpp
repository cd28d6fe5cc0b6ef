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

#include <cstddef>
#include <functional>

namespace mssr {

/// Worker cap from MSSR_THREADS (0 or unset = hardware concurrency).
int worker_threads();

/// Overrides the environment for the current process; 0 restores auto.
void set_worker_threads(int threads);

/// Runs fn(i) for i in [0, count). Indices are split into contiguous chunks,
/// one per worker; fn must only write state owned by index i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mssr
