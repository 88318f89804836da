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

#include <numeric>

#include "doctest.h"
#include "m2t/errors.hpp"

TEST_CASE("unit raster groups reduce to the classic decoder shift") {
  // One leading pad followed by tokens 0..n-2; inclusive triangular mask.
  const int w_t = 3;
  const int n = 9;
  std::vector<std::vector<int>> masks;
  for (int i = 0; i < n; ++i) masks.push_back({i});
  m2t::M2TLayout lay = m2t::build_layout(w_t, masks);
  REQUIRE(lay.total() == n);
  CHECK(lay.input_token_pos[0] == m2t::kMaskPad);
  CHECK(lay.pos_index[0] == 0);
  for (int j = 1; j < n; ++j) {
    CHECK(lay.input_token_pos[static_cast<size_t>(j)] == j - 1);
    CHECK(lay.pos_index[static_cast<size_t>(j)] == j - 1);
    CHECK(lay.group_of_slot[static_cast<size_t>(j)] == j);
  }
  std::vector<int> identity(static_cast<size_t>(n));
  std::iota(identity.begin(), identity.end(), 0);
  CHECK(lay.target_perm == identity);
  m2t::AttnMask a = lay.attention_mask();
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      CHECK(a(p, q) == (q <= p ? 1 : 0));
    }
  }
}

TEST_CASE("single step layout is all pads with full attention") {
  std::vector<std::vector<int>> masks = {{3, 1, 0, 2}};
  m2t::M2TLayout lay = m2t::build_layout(2, masks);
  for (int j = 0; j < 4; ++j) {
    CHECK(lay.input_token_pos[static_cast<size_t>(j)] == m2t::kMaskPad);
    CHECK(lay.pos_index[static_cast<size_t>(j)] == masks[0][static_cast<size_t>(j)]);
  }
  CHECK(lay.target_perm == masks[0]);
  m2t::AttnMask a = lay.attention_mask();
  CHECK(static_cast<int>(a.sum()) == 16);
}

TEST_CASE("two-group hand example") {
  // Groups {2} then {0,1,3}: input [PAD, tok2, PAD, PAD], targets
  // [2,0,1,3], blocks of sizes 1 and 3.
  std::vector<std::vector<int>> masks = {{2}, {0, 1, 3}};
  m2t::M2TLayout lay = m2t::build_layout(2, masks);
  CHECK(lay.input_token_pos == std::vector<int>{m2t::kMaskPad, 2, m2t::kMaskPad,
                                                m2t::kMaskPad});
  CHECK(lay.target_perm == std::vector<int>{2, 0, 1, 3});
  // Pads carry the positional index of the cell they predict; the real
  // token keeps its own cell.
  CHECK(lay.pos_index == std::vector<int>{2, 2, 1, 3});
  CHECK(lay.group_of_slot == std::vector<int>{0, 1, 1, 1});
  m2t::AttnMask a = lay.attention_mask();
  CHECK(a(0, 1) == 0);  // group 0 cannot see group 1
  CHECK(a(1, 0) == 1);
  CHECK(a(2, 3) == 1);  // within-group visibility
}

TEST_CASE("target permutation concatenates the masks and inverts") {
  std::vector<std::vector<int>> masks = {{5}, {0, 7}, {1, 2, 3, 4, 6, 8}};
  m2t::M2TLayout lay = m2t::build_layout(3, masks);
  std::vector<int> expect;
  for (const auto& m : masks) expect.insert(expect.end(), m.begin(), m.end());
  CHECK(lay.target_perm == expect);
  std::vector<int> inverse(static_cast<size_t>(lay.total()), -1);
  for (int j = 0; j < lay.total(); ++j) {
    CHECK(inverse[static_cast<size_t>(lay.target_perm[static_cast<size_t>(j)])] == -1);
    inverse[static_cast<size_t>(lay.target_perm[static_cast<size_t>(j)])] = j;
  }
  for (int p = 0; p < lay.total(); ++p) {
    CHECK(lay.target_perm[static_cast<size_t>(inverse[static_cast<size_t>(p)])] == p);
  }
}

TEST_CASE("shrinking groups are rejected") {
  std::vector<std::vector<int>> masks = {{0, 1}, {2}, {3}};
  CHECK_THROWS_AS(m2t::build_layout(2, masks), m2t::ContractError);
}

TEST_CASE("non-covering masks are rejected") {
  std::vector<std::vector<int>> masks = {{0}, {1, 2}};
  CHECK_THROWS_AS(m2t::build_layout(2, masks), m2t::ContractError);
  std::vector<std::vector<int>> dup = {{0}, {0, 1}};
  CHECK_THROWS_AS(m2t::build_layout(2, dup), m2t::ContractError);
}
