// Copyright 2026 The metaprior Authors
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

#ifndef METAPRIOR_RNG_HPP_
#define METAPRIOR_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace metaprior {

// splitmix64 step; used to derive independent sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministically derive a seed for a named sub-stream of `master`.
// Replicated simulations use this so that each (seed, purpose) pair gets an
// independent generator without any shared mutable state.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = master ^ 0x517cc1b727220a95ULL;
  for (char ch : tag) {
    h ^= static_cast<std::uint8_t>(ch);
    splitmix64(h);
  }
  return splitmix64(h);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index) {
  std::uint64_t h = derive_seed(master, tag) ^ (index * 0x9e3779b97f4a7c15ULL);
  return splitmix64(h);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace metaprior

#endif  // METAPRIOR_RNG_HPP_
