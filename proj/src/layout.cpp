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

#include "m2t/layout.hpp"

#include <algorithm>

#include "m2t/errors.hpp"

namespace m2t {

AttnMask M2TLayout::attention_mask() const {
  const int n = total();
  AttnMask a(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      a(p, q) = group_of_slot[static_cast<size_t>(q)] <=
                        group_of_slot[static_cast<size_t>(p)]
                    ? 1
                    : 0;
    }
  }
  return a;
}

M2TLayout build_layout(int w_t, const std::vector<std::vector<int>>& masks) {
  check_contract(w_t >= 1, "build_layout: w_t must be >= 1");
  check_contract(!masks.empty(), "build_layout: no masks");
  const int n = w_t * w_t;

  M2TLayout lay;
  lay.w_t = w_t;
  lay.steps = static_cast<int>(masks.size());
  lay.group_of_slot.reserve(static_cast<size_t>(n));
  lay.input_token_pos.reserve(static_cast<size_t>(n));
  lay.pos_index.reserve(static_cast<size_t>(n));
  lay.target_perm.reserve(static_cast<size_t>(n));

  std::vector<char> covered(static_cast<size_t>(n), 0);
  size_t prev_size = 0;
  for (size_t i = 0; i < masks.size(); ++i) {
    const std::vector<int>& cur = masks[i];
    check_contract(!cur.empty(), "build_layout: empty group");
    check_contract(cur.size() >= prev_size,
                   "build_layout: shrinking group sizes");
    lay.group_sizes.push_back(static_cast<int>(cur.size()));
    const std::vector<int>* prev = i == 0 ? nullptr : &masks[i - 1];
    for (size_t j = 0; j < cur.size(); ++j) {
      int target = cur[j];
      check_contract(target >= 0 && target < n && !covered[static_cast<size_t>(target)],
                     "build_layout: masks not a disjoint cover");
      covered[static_cast<size_t>(target)] = 1;
      lay.group_of_slot.push_back(static_cast<int>(i));
      lay.target_perm.push_back(target);
      if (prev != nullptr && j < prev->size()) {
        lay.input_token_pos.push_back((*prev)[j]);
        lay.pos_index.push_back((*prev)[j]);
      } else {
        lay.input_token_pos.push_back(kMaskPad);
        lay.pos_index.push_back(target);
      }
    }
    prev_size = cur.size();
  }
  check_contract(lay.total() == n, "build_layout: masks do not cover the tile");
  return lay;
}

M2TLayout build_layout(const MaskSchedule& schedule) {
  check_contract(schedule.has_static_masks(),
                 "build_layout: entropy schedules resolve masks during coding");
  return build_layout(schedule.w_t, schedule.masks);
}

}  // namespace m2t
