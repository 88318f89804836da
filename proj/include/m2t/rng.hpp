// Copyright 2026 The m2tc Authors.
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

#ifndef M2T_RNG_HPP_
#define M2T_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

namespace m2t {

// Deterministic 64-bit generator (SplitMix64, Steele et al.). Schedules and
// synthetic data derived from a seed must be reproducible across platforms
// and standard libraries, so this generator is part of the file-format
// contract: state' = state + 0x9E3779B97F4A7C15, output = mix(state').
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Modulo reduction: the tiny bias is irrelevant here,
  // what matters is that every implementation reduces the same way.
  uint64_t next_below(uint64_t n) { return next() % n; }

  // Uniform double in [0, 1), 53 usable bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Standard normal via Box-Muller (one value per call, no caching so the
  // draw sequence stays position-independent).
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  uint64_t state_;
};

// Fisher-Yates with SplitMix64 index draws; part of the schedule contract.
template <typename T>
void shuffle_in_place(std::vector<T>& v, SplitMix64& rng) {
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = static_cast<size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace m2t

#endif  // M2T_RNG_HPP_
