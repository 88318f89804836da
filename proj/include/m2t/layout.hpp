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

#ifndef M2T_LAYOUT_HPP_
#define M2T_LAYOUT_HPP_

#include <Eigen/Core>
#include <vector>

#include "m2t/sched.hpp"

namespace m2t {

constexpr int kMaskPad = -1;

using AttnMask = Eigen::Matrix<uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Group-causal sequence layout. The input is the schedule's groups shifted
// by one: input group 1 is |M_1| mask-pad slots, input group i >= 2 is the
// tokens of M_{i-1} followed by |M_i| - |M_{i-1}| mask-pad slots. Slot j of
// group i predicts the j-th token of M_i, and every slot carries the
// positional index of the grid cell it stands for: real tokens their own
// cell, pad slots the cell they predict.
struct M2TLayout {
  int w_t = 0;
  int steps = 0;
  std::vector<int> group_sizes;      // ascending
  std::vector<int> group_of_slot;    // length w_t^2, 0-based group ids
  std::vector<int> input_token_pos;  // tile position fed at slot, or kMaskPad
  std::vector<int> pos_index;        // positional-table cell per slot
  std::vector<int> target_perm;      // slot j predicts tile position target_perm[j]

  int total() const { return static_cast<int>(target_perm.size()); }

  // Block lower-triangular visibility: A(p, q) = 1 iff group(q) <= group(p).
  AttnMask attention_mask() const;
};

// Builds the layout from resolved masks (one position list per step, sizes
// non-decreasing). Throws ContractError on shrinking group sizes.
M2TLayout build_layout(int w_t, const std::vector<std::vector<int>>& masks);

// Convenience overload for schedules with static masks.
M2TLayout build_layout(const MaskSchedule& schedule);

}  // namespace m2t

#endif  // M2T_LAYOUT_HPP_
