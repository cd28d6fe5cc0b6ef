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

#include <array>
#include <cstdint>
#include <string_view>

namespace mssr {

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a64(std::string_view text);

/// Deterministic random stream: xoshiro256** whose 256-bit state is filled
/// by SplitMix64 from the 64-bit seed.
///
/// Named substreams use seed' = seed XOR fnv1a64(name), so a stream is fully
/// determined by (root seed, name) and draws are bit-identical on every
/// platform. All randomness in the toolkit flows through this class.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Independent substream keyed by name (derived from the seed, not from the
  /// current position of this stream).
  SeededRng derive(std::string_view name) const;

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, bound); bound must be positive. Unbiased.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Fair coin from the top bit of one draw.
  bool coin();

  /// Standard normal via Box-Muller (consumes two draws).
  double normal();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// Free-function spelling of SeededRng::derive.
inline SeededRng derive_stream(const SeededRng& rng, std::string_view name) {
  return rng.derive(name);
}

}  // namespace mssr
