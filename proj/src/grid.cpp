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

#include "m2t/grid.hpp"

#include <cstring>
#include <fstream>

#include "m2t/errors.hpp"

namespace m2t {

namespace {

constexpr char kMagic[4] = {'M', '2', 'T', 'G'};
constexpr uint8_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
  out.push_back(static_cast<uint8_t>(v >> 16));
  out.push_back(static_cast<uint8_t>(v >> 24));
}

uint32_t get_u32(const std::vector<uint8_t>& in, size_t& pos) {
  if (pos + 4 > in.size()) throw FormatError("grid file truncated");
  uint32_t v = static_cast<uint32_t>(in[pos]) |
               static_cast<uint32_t>(in[pos + 1]) << 8 |
               static_cast<uint32_t>(in[pos + 2]) << 16 |
               static_cast<uint32_t>(in[pos + 3]) << 24;
  pos += 4;
  return v;
}

}  // namespace

TileSet tile(const TokenGrid& grid, int w_t) {
  check_contract(w_t >= 1, "tile: w_t must be >= 1");
  check_contract(grid.h >= 1 && grid.w >= 1 && grid.c >= 1,
                 "tile: empty grid");
  TileSet out;
  out.orig_h = grid.h;
  out.orig_w = grid.w;
  out.c = grid.c;
  out.w_t = w_t;
  out.tiles_y = (grid.h + w_t - 1) / w_t;
  out.tiles_x = (grid.w + w_t - 1) / w_t;
  out.tiles.reserve(static_cast<size_t>(out.tiles_y) * out.tiles_x);
  for (int ty = 0; ty < out.tiles_y; ++ty) {
    for (int tx = 0; tx < out.tiles_x; ++tx) {
      TokenGrid t(w_t, w_t, grid.c);
      for (int r = 0; r < w_t; ++r) {
        int gr = ty * w_t + r;
        if (gr >= grid.h) break;  // rest stays zero padded
        for (int col = 0; col < w_t; ++col) {
          int gc = tx * w_t + col;
          if (gc >= grid.w) break;
          for (int ch = 0; ch < grid.c; ++ch) {
            t.at(r, col, ch) = grid.at(gr, gc, ch);
          }
        }
      }
      out.tiles.push_back(std::move(t));
    }
  }
  return out;
}

TokenGrid untile(const TileSet& tiles) {
  check_contract(static_cast<int>(tiles.tiles.size()) ==
                     tiles.tiles_y * tiles.tiles_x,
                 "untile: tile count does not match recorded dims");
  for (const TokenGrid& t : tiles.tiles) {
    check_contract(t.h == tiles.w_t && t.w == tiles.w_t && t.c == tiles.c,
                   "untile: tile shape mismatch");
  }
  TokenGrid out(tiles.orig_h, tiles.orig_w, tiles.c);
  for (int ty = 0; ty < tiles.tiles_y; ++ty) {
    for (int tx = 0; tx < tiles.tiles_x; ++tx) {
      const TokenGrid& t = tiles.tiles[static_cast<size_t>(ty) * tiles.tiles_x + tx];
      for (int r = 0; r < tiles.w_t; ++r) {
        int gr = ty * tiles.w_t + r;
        if (gr >= tiles.orig_h) break;
        for (int col = 0; col < tiles.w_t; ++col) {
          int gc = tx * tiles.w_t + col;
          if (gc >= tiles.orig_w) break;
          for (int ch = 0; ch < tiles.c; ++ch) {
            out.at(gr, gc, ch) = t.at(r, col, ch);
          }
        }
      }
    }
  }
  return out;
}

std::vector<uint8_t> serialize_grid(const TokenGrid& grid) {
  std::vector<uint8_t> out;
  out.reserve(9 + grid.size() * 2 + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  put_u32(out, static_cast<uint32_t>(grid.h));
  put_u32(out, static_cast<uint32_t>(grid.w));
  put_u32(out, static_cast<uint32_t>(grid.c));
  for (int16_t v : grid.values) {
    uint16_t u = static_cast<uint16_t>(v);
    out.push_back(static_cast<uint8_t>(u));
    out.push_back(static_cast<uint8_t>(u >> 8));
  }
  return out;
}

TokenGrid parse_grid(const std::vector<uint8_t>& bytes) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("grid file: bad magic");
  }
  if (bytes[4] != kVersion) throw FormatError("grid file: unsupported version");
  size_t pos = 5;
  uint32_t h = get_u32(bytes, pos);
  uint32_t w = get_u32(bytes, pos);
  uint32_t c = get_u32(bytes, pos);
  if (h < 1 || w < 1 || c < 1 || h > (1u << 20) || w > (1u << 20) ||
      c > (1u << 16)) {
    throw FormatError("grid file: implausible dimensions");
  }
  size_t n = static_cast<size_t>(h) * w * c;
  if (bytes.size() != pos + 2 * n) throw FormatError("grid file truncated");
  TokenGrid grid(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  for (size_t i = 0; i < n; ++i) {
    uint16_t u = static_cast<uint16_t>(bytes[pos + 2 * i]) |
                 static_cast<uint16_t>(bytes[pos + 2 * i + 1]) << 8;
    grid.values[i] = static_cast<int16_t>(u);
  }
  return grid;
}

void write_grid(const TokenGrid& grid, const std::string& path) {
  std::vector<uint8_t> bytes = serialize_grid(grid);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("write failed: " + path);
}

TokenGrid read_grid(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return parse_grid(bytes);
}

}  // namespace m2t
