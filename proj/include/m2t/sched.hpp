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

#ifndef M2T_SCHED_HPP_
#define M2T_SCHED_HPP_

#include <cstdint>
#include <vector>

#include "m2t/gmm.hpp"

namespace m2t {

enum class ScheduleKind : uint8_t { kRandom = 0, kEntropy = 1, kQlds = 2 };

const char* schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

// How many tokens each step uncovers. Derived from the power curve
// f(x) = total * (x / steps)^alpha: cumulative counts are rounded half away
// from zero, repaired to be strictly increasing (each at least previous + 1,
// capped at total), then the per-step sizes are sorted ascending so group
// sizes never shrink. For alpha >= 1 the sort only fixes rounding jitter.
struct GroupSizes {
  std::vector<int> sizes;       // ascending, every entry >= 1, sums to total
  std::vector<int> cumulative;  // strictly increasing prefix sums of sizes
};

GroupSizes group_sizes(int steps, double alpha, int total);

// Ordered partition of a tile's token positions. For random and qlds kinds
// the per-step position lists are materialized here; the entropy kind keeps
// only the sizes and resolves locations during coding from decoded-so-far
// context, so sender and receiver stay in lockstep.
struct MaskSchedule {
  ScheduleKind kind = ScheduleKind::kQlds;
  int steps = 1;
  double alpha = 2.2;
  int w_t = 1;
  uint64_t seed = 0;
  GroupSizes groups;
  std::vector<std::vector<int>> masks;  // empty for the entropy kind

  int total() const { return w_t * w_t; }
  bool has_static_masks() const { return kind != ScheduleKind::kEntropy; }
};

// Builds a schedule from header-level fields only. Random locations come
// from a SplitMix64-seeded Fisher-Yates shuffle of 0..w_t^2-1; qlds
// locations from qlds_order(w_t). Both are split by group_sizes().
MaskSchedule make_schedule(ScheduleKind kind, int steps, double alpha, int w_t,
                           uint64_t seed);

// Picks the k remaining positions with the smallest entropy, ties broken by
// ascending position index. The returned mask is sorted by position index,
// which is also the order those tokens are coded in.
std::vector<int> lowest_entropy_mask(const std::vector<double>& entropy_bits,
                                     const std::vector<int>& remaining, int k);

// Convenience overload computing token entropies from mixture parameters
// over the symbol support [lo, hi].
template <typename Scalar>
std::vector<int> lowest_entropy_mask(const std::vector<GmmToken<Scalar>>& params,
                                     const std::vector<int>& remaining, int k,
                                     int lo, int hi) {
  std::vector<double> h(remaining.size());
  for (size_t i = 0; i < remaining.size(); ++i) {
    h[i] = token_entropy(params[remaining[i]], lo, hi);
  }
  return lowest_entropy_mask(h, remaining, k);
}

}  // namespace m2t

#endif  // M2T_SCHED_HPP_
