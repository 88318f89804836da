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

#ifndef M2T_GRID_HPP_
#define M2T_GRID_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace m2t {

// Integer token grid of shape (h, w, c), row-major, one int16 per channel
// entry. Channels of one (row, col) site form a token. Immutable by
// convention once filled; cheap to share between tile workers.
struct TokenGrid {
  int h = 0;
  int w = 0;
  int c = 0;
  std::vector<int16_t> values;  // h * w * c, row-major (h, w, c)

  TokenGrid() = default;
  TokenGrid(int h_, int w_, int c_)
      : h(h_), w(w_), c(c_),
        values(static_cast<size_t>(h_) * w_ * c_, 0) {}

  int16_t& at(int row, int col, int ch) {
    return values[(static_cast<size_t>(row) * w + col) * c + ch];
  }
  int16_t at(int row, int col, int ch) const {
    return values[(static_cast<size_t>(row) * w + col) * c + ch];
  }
  size_t size() const { return values.size(); }
  bool operator==(const TokenGrid& o) const {
    return h == o.h && w == o.w && c == o.c && values == o.values;
  }
};

// Grid cut into full w_t x w_t tiles (zero padded), row-major tile order.
// Original (h, w) retained so untile() can crop the padding back off.
struct TileSet {
  int orig_h = 0;
  int orig_w = 0;
  int c = 0;
  int w_t = 0;
  int tiles_y = 0;  // ceil(orig_h / w_t)
  int tiles_x = 0;  // ceil(orig_w / w_t)
  std::vector<TokenGrid> tiles;  // tiles_y * tiles_x, each w_t x w_t x c

  int tile_count() const { return tiles_y * tiles_x; }
};

// Pads with zeros up to multiples of w_t, then splits row-major over tile
// coordinates. w_t >= 1 required.
TileSet tile(const TokenGrid& grid, int w_t);

// Exact inverse of tile(): reassembles and crops. Throws ContractError if
// the tile list is inconsistent with the recorded dimensions.
TokenGrid untile(const TileSet& tiles);

// Binary grid file: magic "M2TG", version u8(=1), h u32, w u32, c u32,
// then h*w*c int16, all little-endian.
void write_grid(const TokenGrid& grid, const std::string& path);
TokenGrid read_grid(const std::string& path);

// In-memory form of the same format (used by tests and the CLI).
std::vector<uint8_t> serialize_grid(const TokenGrid& grid);
TokenGrid parse_grid(const std::vector<uint8_t>& bytes);

}  // namespace m2t

#endif  // M2T_GRID_HPP_
