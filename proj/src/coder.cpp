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

#include "m2t/coder.hpp"

#include <cstring>

namespace m2t {

namespace {

constexpr char kMagic[4] = {'M', '2', 'T', 'B'};
constexpr uint8_t kVersion = 1;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  put_u16(out, static_cast<uint16_t>(v));
  put_u16(out, static_cast<uint16_t>(v >> 16));
}
void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  put_u32(out, static_cast<uint32_t>(v));
  put_u32(out, static_cast<uint32_t>(v >> 32));
}

struct Reader {
  const std::vector<uint8_t>& b;
  size_t pos = 0;
  uint8_t u8() {
    if (pos + 1 > b.size()) throw FormatError("bitstream truncated");
    return b[pos++];
  }
  uint16_t u16() { return static_cast<uint16_t>(u8() | (u8() << 8)); }
  uint32_t u32() {
    uint32_t lo = u16();
    return lo | (static_cast<uint32_t>(u16()) << 16);
  }
  uint64_t u64() {
    uint64_t lo = u32();
    return lo | (static_cast<uint64_t>(u32()) << 32);
  }
};

}  // namespace

const char* path_mode_name(PathMode mode) {
  return mode == PathMode::kMt ? "mt" : "m2t";
}

PathMode path_mode_from_name(const std::string& name) {
  if (name == "mt") return PathMode::kMt;
  if (name == "m2t") return PathMode::kM2t;
  throw ContractError("unknown path mode: " + name);
}

std::vector<uint8_t> serialize_bitstream(
    const BitstreamHeader& header,
    const std::vector<std::vector<uint8_t>>& payloads) {
  check_contract(payloads.size() == header.payload_lens.size(),
                 "serialize_bitstream: payload count mismatch");
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  put_u32(out, header.h);
  put_u32(out, header.w);
  put_u32(out, header.c);
  put_u16(out, header.w_t);
  put_u16(out, header.steps);
  put_u32(out, header.alpha_milli);
  out.push_back(static_cast<uint8_t>(header.kind));
  put_u64(out, header.seed);
  put_u16(out, static_cast<uint16_t>(header.lo));
  put_u16(out, static_cast<uint16_t>(header.hi));
  put_u32(out, header.tile_count());
  for (uint32_t len : header.payload_lens) put_u32(out, len);
  for (const std::vector<uint8_t>& p : payloads) {
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

void parse_bitstream(const std::vector<uint8_t>& bytes, BitstreamHeader* header,
                     std::vector<std::vector<uint8_t>>* payloads) {
  if (bytes.size() < 5 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bitstream: bad magic");
  }
  if (bytes[4] != kVersion) throw FormatError("bitstream: unsupported version");
  Reader r{bytes, 5};
  header->h = r.u32();
  header->w = r.u32();
  header->c = r.u32();
  header->w_t = r.u16();
  header->steps = r.u16();
  header->alpha_milli = r.u32();
  uint8_t kind = r.u8();
  if (kind > 2) throw FormatError("bitstream: unknown schedule kind");
  header->kind = static_cast<ScheduleKind>(kind);
  header->seed = r.u64();
  header->lo = static_cast<int16_t>(r.u16());
  header->hi = static_cast<int16_t>(r.u16());
  uint32_t count = r.u32();
  if (count > (1u << 24)) throw FormatError("bitstream: implausible tile count");
  header->payload_lens.resize(count);
  for (uint32_t i = 0; i < count; ++i) header->payload_lens[i] = r.u32();
  payloads->clear();
  payloads->reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = header->payload_lens[i];
    if (r.pos + len > bytes.size()) throw FormatError("bitstream truncated");
    payloads->emplace_back(bytes.begin() + static_cast<long>(r.pos),
                           bytes.begin() + static_cast<long>(r.pos + len));
    r.pos += len;
  }
  if (r.pos != bytes.size()) throw FormatError("bitstream: trailing bytes");
}

}  // namespace m2t
