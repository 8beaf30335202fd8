// Copyright (c) 2026 The ERFC Authors
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
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

#include <tbb/parallel_for.h>

namespace emo {

using Rng = std::mt19937_64;

// All randomness in the library descends from one user seed. A child seed is
// splitmix64 folded over (parent, tag0, tag1, ...), so the seed of any unit of
// work (a tree, a fold, a conversation) depends only on its coordinates and
// never on scheduling order.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> tags);

// Stable 64-bit FNV-1a, used wherever a string (conv_id) has to be hashed
// reproducibly across runs and platforms.
std::uint64_t fnv1a64(std::string_view s);

// Deterministic parallel loop. Each index writes only to its own slot, so the
// result does not depend on the number of worker threads. Concurrency is
// capped by whatever tbb::global_control the caller installed.
template <typename Fn>
void parallel_for(std::size_t n, Fn &&fn) {
  if (n == 0) return;
  if (n == 1) {
    fn(std::size_t{0});
    return;
  }
  tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { fn(i); });
}

}  // namespace emo
