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

#include "m2t/sched.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "m2t/errors.hpp"
#include "m2t/qlds.hpp"
#include "m2t/rng.hpp"

namespace m2t {

const char* schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kRandom: return "random";
    case ScheduleKind::kEntropy: return "entropy";
    case ScheduleKind::kQlds: return "qlds";
  }
  return "?";
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "random") return ScheduleKind::kRandom;
  if (name == "entropy") return ScheduleKind::kEntropy;
  if (name == "qlds") return ScheduleKind::kQlds;
  throw ContractError("unknown schedule kind: " + name);
}

GroupSizes group_sizes(int steps, double alpha, int total) {
  check_contract(total >= 1, "group_sizes: total must be >= 1");
  check_contract(steps >= 1 && steps <= total,
                 "group_sizes: need 1 <= steps <= total");
  check_contract(alpha >= 1.0, "group_sizes: alpha must be >= 1");

  std::vector<int> cum(static_cast<size_t>(steps));
  int prev = 0;
  for (int i = 1; i <= steps; ++i) {
    double f = total * std::pow(static_cast<double>(i) / steps, alpha);
    int c = static_cast<int>(std::llround(f));
    c = std::max(c, prev + 1);
    c = std::min(c, total);
    cum[static_cast<size_t>(i) - 1] = c;
    prev = c;
  }
  cum.back() = total;

  GroupSizes out;
  out.sizes.resize(static_cast<size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out.sizes[static_cast<size_t>(i)] =
        cum[static_cast<size_t>(i)] - (i == 0 ? 0 : cum[static_cast<size_t>(i) - 1]);
  }
  std::sort(out.sizes.begin(), out.sizes.end());

  out.cumulative.resize(static_cast<size_t>(steps));
  int acc = 0;
  for (int i = 0; i < steps; ++i) {
    acc += out.sizes[static_cast<size_t>(i)];
    out.cumulative[static_cast<size_t>(i)] = acc;
  }
  return out;
}

MaskSchedule make_schedule(ScheduleKind kind, int steps, double alpha, int w_t,
                           uint64_t seed) {
  check_contract(w_t >= 1, "make_schedule: w_t must be >= 1");
  MaskSchedule s;
  s.kind = kind;
  s.steps = steps;
  s.alpha = alpha;
  s.w_t = w_t;
  s.seed = seed;
  s.groups = group_sizes(steps, alpha, w_t * w_t);

  if (kind == ScheduleKind::kEntropy) return s;  // locations resolved lazily

  std::vector<int> positions;
  if (kind == ScheduleKind::kQlds) {
    positions = qlds_order(w_t).cells;
  } else {
    positions.resize(static_cast<size_t>(w_t) * w_t);
    std::iota(positions.begin(), positions.end(), 0);
    SplitMix64 rng(seed);
    shuffle_in_place(positions, rng);
  }

  s.masks.resize(static_cast<size_t>(steps));
  size_t off = 0;
  for (int i = 0; i < steps; ++i) {
    size_t n = static_cast<size_t>(s.groups.sizes[static_cast<size_t>(i)]);
    s.masks[static_cast<size_t>(i)].assign(positions.begin() + off,
                                           positions.begin() + off + n);
    off += n;
  }
  return s;
}

std::vector<int> lowest_entropy_mask(const std::vector<double>& entropy_bits,
                                     const std::vector<int>& remaining, int k) {
  check_contract(entropy_bits.size() == remaining.size(),
                 "lowest_entropy_mask: entropy/remaining size mismatch");
  check_contract(k >= 0 && static_cast<size_t>(k) <= remaining.size(),
                 "lowest_entropy_mask: k exceeds remaining positions");
  std::vector<size_t> idx(remaining.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (entropy_bits[a] != entropy_bits[b]) {
      return entropy_bits[a] < entropy_bits[b];
    }
    return remaining[a] < remaining[b];
  });
  std::vector<int> mask(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) mask[static_cast<size_t>(i)] = remaining[idx[static_cast<size_t>(i)]];
  std::sort(mask.begin(), mask.end());
  return mask;
}

}  // namespace m2t
