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

#include "m2t/gmm.hpp"

#include <algorithm>
#include <numeric>

namespace m2t {

std::vector<uint32_t> quantize_pmf(const Eigen::VectorXd& probs,
                                   int precision_bits) {
  check_contract(precision_bits >= 8 && precision_bits <= 16,
                 "quantize_pmf: precision must be in [8, 16]");
  const int n = static_cast<int>(probs.size());
  check_contract(n >= 1, "quantize_pmf: empty support");
  const uint32_t total = 1u << precision_bits;
  check_contract(static_cast<uint32_t>(n) <= total,
                 "quantize_pmf: support larger than 2^precision symbols");

  std::vector<uint32_t> freq(static_cast<size_t>(n), 1);
  const uint32_t spare = total - static_cast<uint32_t>(n);
  if (spare == 0) return freq;

  double mass = 0.0;
  for (int i = 0; i < n; ++i) mass += std::max(probs[i], 0.0);

  if (mass <= 0.0) {
    // Degenerate input: spread the counts evenly, low bins first.
    uint32_t base = spare / static_cast<uint32_t>(n);
    uint32_t extra = spare % static_cast<uint32_t>(n);
    for (int i = 0; i < n; ++i) {
      freq[i] += base + (static_cast<uint32_t>(i) < extra ? 1 : 0);
    }
    return freq;
  }

  std::vector<double> remainder(static_cast<size_t>(n));
  uint32_t assigned = 0;
  for (int i = 0; i < n; ++i) {
    double share = std::max(probs[i], 0.0) / mass * spare;
    uint32_t whole = static_cast<uint32_t>(share);
    freq[i] += whole;
    assigned += whole;
    remainder[i] = share - whole;
  }

  uint32_t left = spare - assigned;
  std::vector<int> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return remainder[a] > remainder[b];
  });
  for (uint32_t i = 0; i < left; ++i) {
    freq[idx[i % n]] += 1;
  }
  return freq;
}

}  // namespace m2t
