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
// Grid codec. Tiles are coded independently: MT runs S masked forward
// passes, uncovering one group per step; M2T runs a single teacher-forced
// pass with the block-triangular attention mask on the sender and an
// incremental cached pass on the receiver. Both M2T sides compute
// bit-identical mixture parameters (see net.hpp), so their quantized PMFs
// match and the round trip is exact.

#ifndef M2T_CODER_HPP_
#define M2T_CODER_HPP_

#include <string>
#include <thread>
#include <vector>

#include "m2t/grid.hpp"
#include "m2t/layout.hpp"
#include "m2t/net.hpp"
#include "m2t/rc.hpp"
#include "m2t/sched.hpp"
#include "m2t/trainer.hpp"

namespace m2t {

enum class PathMode : uint8_t { kMt = 0, kM2t = 1 };

const char* path_mode_name(PathMode mode);
PathMode path_mode_from_name(const std::string& name);

// Bitstream header; fully determines schedule reconstruction. Layout
// (little-endian): magic "M2TB", version u8, h u32, w u32, c u32, w_T u16,
// S u16, alpha_milli u32, kind u8, seed u64, lo i16, hi i16, tile_count
// u32, per-tile payload length u32[tile_count], then the payloads.
struct BitstreamHeader {
  uint32_t h = 0, w = 0, c = 0;
  uint16_t w_t = 0, steps = 0;
  uint32_t alpha_milli = 2200;
  ScheduleKind kind = ScheduleKind::kQlds;
  uint64_t seed = 0;
  int16_t lo = 0, hi = 0;
  std::vector<uint32_t> payload_lens;

  double alpha() const { return alpha_milli / 1000.0; }
  uint32_t tile_count() const { return static_cast<uint32_t>(payload_lens.size()); }
};

std::vector<uint8_t> serialize_bitstream(
    const BitstreamHeader& header,
    const std::vector<std::vector<uint8_t>>& payloads);
void parse_bitstream(const std::vector<uint8_t>& bytes, BitstreamHeader* header,
                     std::vector<std::vector<uint8_t>>* payloads);

// Instrumentation shared by both paths. model_tokens counts input positions
// fed through the transformer for coding proper; sched_tokens counts the
// auxiliary passes the entropy location schedule needs on the M2T path.
struct CodeStats {
  uint64_t model_tokens = 0;
  uint64_t sched_tokens = 0;
  double nll_bits = 0.0;
  uint64_t payload_bytes = 0;

  CodeStats& operator+=(const CodeStats& o) {
    model_tokens += o.model_tokens;
    sched_tokens += o.sched_tokens;
    nll_bits += o.nll_bits;
    payload_bytes += o.payload_bytes;
    return *this;
  }
};

struct CodecParams {
  PathMode path = PathMode::kM2t;
  ScheduleKind kind = ScheduleKind::kQlds;
  int steps = 12;
  uint32_t alpha_milli = 2200;
  uint64_t seed = 0;
  int precision = 16;
  int threads = 1;
};

namespace detail {

// Symbol range stored in the header: always includes 0 so zero padding of
// partial tiles is codable.
inline void symbol_range(const TokenGrid& grid, int16_t* lo, int16_t* hi) {
  int mn = 0, mx = 0;
  for (int16_t v : grid.values) {
    mn = std::min(mn, static_cast<int>(v));
    mx = std::max(mx, static_cast<int>(v));
  }
  *lo = static_cast<int16_t>(mn);
  *hi = static_cast<int16_t>(mx);
}

template <typename Scalar>
void encode_token_channels(RangeEncoder& enc, const GmmToken<Scalar>& params,
                           const std::vector<int>& token, int lo, int hi,
                           int precision, double* nll_bits) {
  for (int ch = 0; ch < params.channels(); ++ch) {
    Eigen::VectorXd probs = bin_pmf_range(GmmChannel::from(params, ch), lo, hi);
    FreqTable table = FreqTable::from_freqs(quantize_pmf(probs, precision));
    int sym = token[static_cast<size_t>(ch)] - lo;
    check_contract(sym >= 0 && sym < table.symbols(),
                   "encode: symbol outside support");
    enc.encode(table.cum[static_cast<size_t>(sym)], table.freq(sym), precision);
    double p = std::max(probs[sym], 1e-300);
    *nll_bits += -std::log2(p);
  }
}

template <typename Scalar>
void decode_token_channels(RangeDecoder& dec, const GmmToken<Scalar>& params,
                           std::vector<int>* token, int lo, int hi,
                           int precision) {
  for (int ch = 0; ch < params.channels(); ++ch) {
    Eigen::VectorXd probs = bin_pmf_range(GmmChannel::from(params, ch), lo, hi);
    FreqTable table = FreqTable::from_freqs(quantize_pmf(probs, precision));
    uint32_t dv = dec.decode_target(precision);
    int sym = table.find(dv);
    dec.consume(table.cum[static_cast<size_t>(sym)], table.freq(sym));
    (*token)[static_cast<size_t>(ch)] = lo + sym;
  }
}

// All-masked slot sequence in raster order with the given tokens uncovered.
template <typename Scalar>
std::vector<TokenSlot<Scalar>> mt_slots(const std::vector<std::vector<int>>& tokens,
                                        const std::vector<char>& present) {
  std::vector<TokenSlot<Scalar>> slots;
  slots.reserve(tokens.size());
  for (size_t p = 0; p < tokens.size(); ++p) {
    if (present[p]) {
      slots.push_back(token_slot<Scalar>(tokens[p], static_cast<int>(p)));
    } else {
      slots.push_back(masked_slot<Scalar>(static_cast<int>(p)));
    }
  }
  return slots;
}

}  // namespace detail

// MT tile coding: S forward passes over the full (partially masked) tile;
// step i codes the tokens of group i with their predicted PMFs, then
// uncovers them at the input. The entropy kind picks each group as the
// remaining positions with the lowest predicted token entropy, which both
// sides can do because selection only uses decoded-so-far context.
template <typename Scalar>
std::vector<uint8_t> encode_tile_mt(const std::vector<std::vector<int>>& tokens,
                                    const ModelState<Scalar>& model,
                                    const MaskSchedule& sched, int lo, int hi,
                                    int precision, CodeStats* stats) {
  const int n = sched.total();
  RangeEncoder enc;
  std::vector<char> present(static_cast<size_t>(n), 0);
  std::vector<int> remaining(static_cast<size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  ForwardStats fwd;
  for (int step = 0; step < sched.steps; ++step) {
    auto slots = detail::mt_slots<Scalar>(tokens, present);
    std::vector<GmmToken<Scalar>> params = forward_masked(model, slots, nullptr, &fwd);
    std::vector<int> mask;
    if (sched.has_static_masks()) {
      mask = sched.masks[static_cast<size_t>(step)];
    } else {
      mask = lowest_entropy_mask(params, remaining,
                                 sched.groups.sizes[static_cast<size_t>(step)], lo, hi);
    }
    for (int p : mask) {
      detail::encode_token_channels(enc, params[static_cast<size_t>(p)],
                                    tokens[static_cast<size_t>(p)], lo, hi,
                                    precision, &stats->nll_bits);
      present[static_cast<size_t>(p)] = 1;
    }
    if (!sched.has_static_masks()) {
      std::vector<int> next;
      next.reserve(remaining.size() - mask.size());
      for (int p : remaining) {
        if (!present[static_cast<size_t>(p)]) next.push_back(p);
      }
      remaining = std::move(next);
    }
  }
  stats->model_tokens += fwd.tokens;
  std::vector<uint8_t> bytes = enc.finish();
  stats->payload_bytes += bytes.size();
  return bytes;
}

template <typename Scalar>
std::vector<std::vector<int>> decode_tile_mt(const std::vector<uint8_t>& bytes,
                                             const ModelState<Scalar>& model,
                                             const MaskSchedule& sched, int lo,
                                             int hi, int precision,
                                             CodeStats* stats) {
  const int n = sched.total();
  const int c = model.config.channels;
  RangeDecoder dec(bytes.data(), bytes.size());
  std::vector<std::vector<int>> tokens(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(c), 0));
  std::vector<char> present(static_cast<size_t>(n), 0);
  std::vector<int> remaining(static_cast<size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  ForwardStats fwd;
  for (int step = 0; step < sched.steps; ++step) {
    auto slots = detail::mt_slots<Scalar>(tokens, present);
    std::vector<GmmToken<Scalar>> params = forward_masked(model, slots, nullptr, &fwd);
    std::vector<int> mask;
    if (sched.has_static_masks()) {
      mask = sched.masks[static_cast<size_t>(step)];
    } else {
      mask = lowest_entropy_mask(params, remaining,
                                 sched.groups.sizes[static_cast<size_t>(step)], lo, hi);
    }
    for (int p : mask) {
      detail::decode_token_channels(dec, params[static_cast<size_t>(p)],
                                    &tokens[static_cast<size_t>(p)], lo, hi,
                                    precision);
      present[static_cast<size_t>(p)] = 1;
    }
    if (!sched.has_static_masks()) {
      std::vector<int> next;
      next.reserve(remaining.size() - mask.size());
      for (int p : remaining) {
        if (!present[static_cast<size_t>(p)]) next.push_back(p);
      }
      remaining = std::move(next);
    }
  }
  if (dec.overrun() > 0) throw FormatError("decode_tile_mt: payload too short");
  stats->model_tokens += fwd.tokens;
  return tokens;
}

namespace detail {

// Resolves entropy-kind masks by replaying the MT-style uncovering with the
// given tokens (the sender's ground truth equals the receiver's decoded
// values, so both sides derive the same masks). Counted as schedule work,
// not coding work.
template <typename Scalar>
std::vector<std::vector<int>> resolve_entropy_masks(
    const std::vector<std::vector<int>>& tokens, const ModelState<Scalar>& model,
    const MaskSchedule& sched, int lo, int hi, CodeStats* stats) {
  const int n = sched.total();
  std::vector<std::vector<int>> masks;
  masks.reserve(static_cast<size_t>(sched.steps));
  std::vector<char> present(static_cast<size_t>(n), 0);
  std::vector<int> remaining(static_cast<size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  ForwardStats fwd;
  for (int step = 0; step < sched.steps; ++step) {
    auto slots = mt_slots<Scalar>(tokens, present);
    std::vector<GmmToken<Scalar>> params = forward_masked(model, slots, nullptr, &fwd);
    std::vector<int> mask = lowest_entropy_mask(
        params, remaining, sched.groups.sizes[static_cast<size_t>(step)], lo, hi);
    for (int p : mask) present[static_cast<size_t>(p)] = 1;
    std::vector<int> next;
    next.reserve(remaining.size() - mask.size());
    for (int p : remaining) {
      if (!present[static_cast<size_t>(p)]) next.push_back(p);
    }
    remaining = std::move(next);
    masks.push_back(std::move(mask));
  }
  stats->sched_tokens += fwd.tokens;
  return masks;
}

template <typename Scalar>
std::vector<TokenSlot<Scalar>> layout_slots(
    const M2TLayout& layout, const std::vector<std::vector<int>>& tokens) {
  std::vector<TokenSlot<Scalar>> slots;
  slots.reserve(static_cast<size_t>(layout.total()));
  for (int j = 0; j < layout.total(); ++j) {
    int fed = layout.input_token_pos[static_cast<size_t>(j)];
    if (fed == kMaskPad) {
      slots.push_back(masked_slot<Scalar>(layout.pos_index[static_cast<size_t>(j)],
                                          layout.group_of_slot[static_cast<size_t>(j)]));
    } else {
      slots.push_back(token_slot<Scalar>(tokens[static_cast<size_t>(fed)],
                                         layout.pos_index[static_cast<size_t>(j)],
                                         layout.group_of_slot[static_cast<size_t>(j)]));
    }
  }
  return slots;
}

}  // namespace detail

// M2T tile coding, sender side: one teacher-forced forward pass under the
// block-triangular mask yields every group's parameters at once; tokens are
// coded in target-permutation order.
template <typename Scalar>
std::vector<uint8_t> encode_tile_m2t(const std::vector<std::vector<int>>& tokens,
                                     const ModelState<Scalar>& model,
                                     const MaskSchedule& sched, int lo, int hi,
                                     int precision, CodeStats* stats) {
  std::vector<std::vector<int>> masks =
      sched.has_static_masks()
          ? sched.masks
          : detail::resolve_entropy_masks(tokens, model, sched, lo, hi, stats);
  M2TLayout layout = build_layout(sched.w_t, masks);
  AttnMask mask = layout.attention_mask();
  auto slots = detail::layout_slots<Scalar>(layout, tokens);
  ForwardStats fwd;
  std::vector<GmmToken<Scalar>> params = forward_masked(model, slots, &mask, &fwd);
  RangeEncoder enc;
  for (int j = 0; j < layout.total(); ++j) {
    int p = layout.target_perm[static_cast<size_t>(j)];
    detail::encode_token_channels(enc, params[static_cast<size_t>(j)],
                                  tokens[static_cast<size_t>(p)], lo, hi, precision,
                                  &stats->nll_bits);
  }
  stats->model_tokens += fwd.tokens;
  std::vector<uint8_t> bytes = enc.finish();
  stats->payload_bytes += bytes.size();
  return bytes;
}

// M2T tile coding, receiver side: group i's input slots (the previous
// group's decoded tokens plus mask pads) go through the cached incremental
// forward; group i's tokens are then decoded and feed group i+1.
template <typename Scalar>
std::vector<std::vector<int>> decode_tile_m2t(const std::vector<uint8_t>& bytes,
                                              const ModelState<Scalar>& model,
                                              const MaskSchedule& sched, int lo,
                                              int hi, int precision,
                                              CodeStats* stats) {
  const int n = sched.total();
  const int c = model.config.channels;
  RangeDecoder dec(bytes.data(), bytes.size());
  std::vector<std::vector<int>> tokens(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(c), 0));
  KvCache<Scalar> cache(model.config, n);
  ForwardStats fwd;
  ForwardStats sched_fwd;
  std::vector<char> present(static_cast<size_t>(n), 0);
  std::vector<int> remaining(static_cast<size_t>(n));
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> prev_mask;
  for (int step = 0; step < sched.steps; ++step) {
    std::vector<int> mask;
    if (sched.has_static_masks()) {
      mask = sched.masks[static_cast<size_t>(step)];
    } else {
      auto aux_slots = detail::mt_slots<Scalar>(tokens, present);
      std::vector<GmmToken<Scalar>> aux =
          forward_masked(model, aux_slots, nullptr, &sched_fwd);
      mask = lowest_entropy_mask(aux, remaining,
                                 sched.groups.sizes[static_cast<size_t>(step)], lo, hi);
    }
    const int size = static_cast<int>(mask.size());
    std::vector<TokenSlot<Scalar>> chunk;
    chunk.reserve(static_cast<size_t>(size));
    for (int j = 0; j < size; ++j) {
      if (j < static_cast<int>(prev_mask.size())) {
        int fed = prev_mask[static_cast<size_t>(j)];
        chunk.push_back(token_slot<Scalar>(tokens[static_cast<size_t>(fed)], fed, step));
      } else {
        chunk.push_back(masked_slot<Scalar>(mask[static_cast<size_t>(j)], step));
      }
    }
    std::vector<GmmToken<Scalar>> params = forward_cached(model, cache, chunk, &fwd);
    for (int j = 0; j < size; ++j) {
      int p = mask[static_cast<size_t>(j)];
      detail::decode_token_channels(dec, params[static_cast<size_t>(j)],
                                    &tokens[static_cast<size_t>(p)], lo, hi,
                                    precision);
      present[static_cast<size_t>(p)] = 1;
    }
    if (!sched.has_static_masks()) {
      std::vector<int> next;
      next.reserve(remaining.size() - mask.size());
      for (int p : remaining) {
        if (!present[static_cast<size_t>(p)]) next.push_back(p);
      }
      remaining = std::move(next);
    }
    prev_mask = std::move(mask);
  }
  if (dec.overrun() > 0) throw FormatError("decode_tile_m2t: payload too short");
  stats->model_tokens += fwd.tokens;
  stats->sched_tokens += sched_fwd.tokens;
  return tokens;
}

struct EncodedGrid {
  BitstreamHeader header;
  std::vector<std::vector<uint8_t>> payloads;
  CodeStats stats;
};

template <typename Scalar>
EncodedGrid encode_grid(const TokenGrid& grid, const ModelState<Scalar>& model,
                        const CodecParams& p) {
  check_contract(grid.c == model.config.channels,
                 "encode_grid: grid channels do not match the model");
  const int w_t = model.config.w_t;
  MaskSchedule sched = make_schedule(p.kind, p.steps, p.alpha_milli / 1000.0,
                                     w_t, p.seed);
  EncodedGrid out;
  detail::symbol_range(grid, &out.header.lo, &out.header.hi);
  check_contract(out.header.hi - out.header.lo + 1 <= (1 << p.precision),
                 "encode_grid: symbol range exceeds coder precision");
  out.header.h = static_cast<uint32_t>(grid.h);
  out.header.w = static_cast<uint32_t>(grid.w);
  out.header.c = static_cast<uint32_t>(grid.c);
  out.header.w_t = static_cast<uint16_t>(w_t);
  out.header.steps = static_cast<uint16_t>(p.steps);
  out.header.alpha_milli = p.alpha_milli;
  out.header.kind = p.kind;
  out.header.seed = p.seed;

  TileSet tiles = tile(grid, w_t);
  const int count = tiles.tile_count();
  out.payloads.resize(static_cast<size_t>(count));
  std::vector<CodeStats> tile_stats(static_cast<size_t>(count));

  auto work = [&](int t) {
    std::vector<std::vector<int>> tokens = tokens_of_tile(tiles.tiles[static_cast<size_t>(t)]);
    if (p.path == PathMode::kMt) {
      out.payloads[static_cast<size_t>(t)] =
          encode_tile_mt(tokens, model, sched, out.header.lo, out.header.hi,
                         p.precision, &tile_stats[static_cast<size_t>(t)]);
    } else {
      out.payloads[static_cast<size_t>(t)] =
          encode_tile_m2t(tokens, model, sched, out.header.lo, out.header.hi,
                          p.precision, &tile_stats[static_cast<size_t>(t)]);
    }
  };
  const int workers = std::max(1, std::min(p.threads, count));
  if (workers == 1) {
    for (int t = 0; t < count; ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&, wkr]() {
        for (int t = wkr; t < count; t += workers) work(t);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  out.header.payload_lens.resize(static_cast<size_t>(count));
  for (int t = 0; t < count; ++t) {
    out.header.payload_lens[static_cast<size_t>(t)] =
        static_cast<uint32_t>(out.payloads[static_cast<size_t>(t)].size());
    out.stats += tile_stats[static_cast<size_t>(t)];
  }
  return out;
}

template <typename Scalar>
TokenGrid decode_grid(const BitstreamHeader& header,
                      const std::vector<std::vector<uint8_t>>& payloads,
                      const ModelState<Scalar>& model, PathMode path,
                      int precision, int threads, CodeStats* stats) {
  check_contract(static_cast<int>(header.c) == model.config.channels,
                 "decode_grid: header channels do not match the model");
  check_contract(static_cast<int>(header.w_t) == model.config.w_t,
                 "decode_grid: header tile size does not match the model");
  MaskSchedule sched = make_schedule(header.kind, header.steps, header.alpha(),
                                     header.w_t, header.seed);
  TileSet tiles;
  tiles.orig_h = static_cast<int>(header.h);
  tiles.orig_w = static_cast<int>(header.w);
  tiles.c = static_cast<int>(header.c);
  tiles.w_t = header.w_t;
  tiles.tiles_y = (tiles.orig_h + tiles.w_t - 1) / tiles.w_t;
  tiles.tiles_x = (tiles.orig_w + tiles.w_t - 1) / tiles.w_t;
  const int count = tiles.tile_count();
  check_contract(static_cast<uint32_t>(count) == header.tile_count(),
                 "decode_grid: tile count mismatch");
  tiles.tiles.assign(static_cast<size_t>(count),
                     TokenGrid(tiles.w_t, tiles.w_t, tiles.c));
  std::vector<CodeStats> tile_stats(static_cast<size_t>(count));

  auto work = [&](int t) {
    std::vector<std::vector<int>> tokens;
    if (path == PathMode::kMt) {
      tokens = decode_tile_mt(payloads[static_cast<size_t>(t)], model, sched,
                              header.lo, header.hi, precision,
                              &tile_stats[static_cast<size_t>(t)]);
    } else {
      tokens = decode_tile_m2t(payloads[static_cast<size_t>(t)], model, sched,
                               header.lo, header.hi, precision,
                               &tile_stats[static_cast<size_t>(t)]);
    }
    TokenGrid& tg = tiles.tiles[static_cast<size_t>(t)];
    for (int r = 0; r < tiles.w_t; ++r) {
      for (int col = 0; col < tiles.w_t; ++col) {
        for (int ch = 0; ch < tiles.c; ++ch) {
          tg.at(r, col, ch) = static_cast<int16_t>(
              tokens[static_cast<size_t>(r) * tiles.w_t + col][static_cast<size_t>(ch)]);
        }
      }
    }
  };
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int t = 0; t < count; ++t) work(t);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int wkr = 0; wkr < workers; ++wkr) {
      pool.emplace_back([&, wkr]() {
        for (int t = wkr; t < count; t += workers) work(t);
      });
    }
    for (std::thread& th : pool) th.join();
  }
  if (stats != nullptr) {
    for (const CodeStats& s : tile_stats) *stats += s;
  }
  return untile(tiles);
}

}  // namespace m2t

#endif  // M2T_CODER_HPP_
