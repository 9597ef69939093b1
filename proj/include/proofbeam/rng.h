// Copyright 2026 The Proofbeam Authors. All Rights Reserved.
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
// =============================================================================

#ifndef PROOFBEAM_RNG_H_
#define PROOFBEAM_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace proofbeam {

// Uniform integer in [lo, hi] by rejection sampling. Unlike the standard
// distributions this yields the same sequence with every standard library.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi);

// Uniform double in [0, 1) from the top 53 bits.
double uniform_unit(std::mt19937_64& rng);

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, 0, i - 1)]);
  }
}

}  // namespace proofbeam

#endif  // PROOFBEAM_RNG_H_
