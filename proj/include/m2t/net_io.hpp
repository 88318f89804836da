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
//
// Checkpoint format (little-endian): magic "M2TC", version u8(=1), config
// (layers, width, mlp_hidden, heads, channels, n_mix, w_t as u32, delta
// f64), tensor count u32, then per tensor: name length u8, name bytes,
// rows u32, cols u32, rows*cols f64 values column-major.

#ifndef M2T_NET_IO_HPP_
#define M2T_NET_IO_HPP_

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "m2t/net.hpp"

namespace m2t {

namespace detail {

inline void put_u32le(std::ofstream& f, uint32_t v) {
  uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                  static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
  f.write(reinterpret_cast<const char*>(b), 4);
}

inline uint32_t get_u32le(std::ifstream& f) {
  uint8_t b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  if (!f) throw FormatError("checkpoint truncated");
  return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
         static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

inline void put_f64le(std::ofstream& f, double v) {
  static_assert(sizeof(double) == 8);
  uint64_t u;
  std::memcpy(&u, &v, 8);
  uint8_t b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<uint8_t>(u >> (8 * i));
  f.write(reinterpret_cast<const char*>(b), 8);
}

inline double get_f64le(std::ifstream& f) {
  uint8_t b[8];
  f.read(reinterpret_cast<char*>(b), 8);
  if (!f) throw FormatError("checkpoint truncated");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

}  // namespace detail

template <typename Scalar>
void save_checkpoint(const ModelState<Scalar>& st, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f.write("M2TC", 4);
  uint8_t version = 1;
  f.write(reinterpret_cast<const char*>(&version), 1);
  const ModelConfig& c = st.config;
  for (int v : {c.layers, c.width, c.mlp_hidden, c.heads, c.channels, c.n_mix,
                c.w_t}) {
    detail::put_u32le(f, static_cast<uint32_t>(v));
  }
  detail::put_f64le(f, c.delta);
  detail::put_u32le(f, static_cast<uint32_t>(st.layout.specs().size()));
  for (const TensorSpec& s : st.layout.specs()) {
    uint8_t len = static_cast<uint8_t>(s.name.size());
    f.write(reinterpret_cast<const char*>(&len), 1);
    f.write(s.name.data(), len);
    detail::put_u32le(f, static_cast<uint32_t>(s.rows));
    detail::put_u32le(f, static_cast<uint32_t>(s.cols));
    auto m = st.mat(s.name);
    for (int j = 0; j < s.cols; ++j) {
      for (int i = 0; i < s.rows; ++i) {
        detail::put_f64le(f, static_cast<double>(m(i, j)));
      }
    }
  }
  if (!f) throw FormatError("write failed: " + path);
}

template <typename Scalar>
ModelState<Scalar> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, "M2TC", 4) != 0) {
    throw FormatError("checkpoint: bad magic");
  }
  uint8_t version = 0;
  f.read(reinterpret_cast<char*>(&version), 1);
  if (!f || version != 1) throw FormatError("checkpoint: unsupported version");
  ModelConfig c;
  c.layers = static_cast<int>(detail::get_u32le(f));
  c.width = static_cast<int>(detail::get_u32le(f));
  c.mlp_hidden = static_cast<int>(detail::get_u32le(f));
  c.heads = static_cast<int>(detail::get_u32le(f));
  c.channels = static_cast<int>(detail::get_u32le(f));
  c.n_mix = static_cast<int>(detail::get_u32le(f));
  c.w_t = static_cast<int>(detail::get_u32le(f));
  c.delta = detail::get_f64le(f);
  c.validate();

  ModelState<Scalar> st(c);
  uint32_t count = detail::get_u32le(f);
  if (count != st.layout.specs().size()) {
    throw FormatError("checkpoint: tensor count mismatch");
  }
  for (uint32_t t = 0; t < count; ++t) {
    uint8_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 1);
    std::string name(len, '\0');
    f.read(name.data(), len);
    if (!f) throw FormatError("checkpoint truncated");
    uint32_t rows = detail::get_u32le(f);
    uint32_t cols = detail::get_u32le(f);
    const TensorSpec& spec = st.layout.spec(name);
    if (static_cast<int>(rows) != spec.rows || static_cast<int>(cols) != spec.cols) {
      throw FormatError("checkpoint: tensor shape mismatch for " + name);
    }
    auto m = st.mat(name);
    for (uint32_t j = 0; j < cols; ++j) {
      for (uint32_t i = 0; i < rows; ++i) {
        m(static_cast<int>(i), static_cast<int>(j)) =
            static_cast<Scalar>(detail::get_f64le(f));
      }
    }
  }
  return st;
}

}  // namespace m2t

#endif  // M2T_NET_IO_HPP_
