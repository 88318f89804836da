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
// Byte-renormalizing range coder (64-bit low with carry propagation through
// pending 0xFF bytes, 32-bit range). Frequency totals are a power of two so
// the range split is a shift. Flush costs five bytes; worst-case overhead
// stays within the documented 16-byte slack.

#ifndef M2T_RC_HPP_
#define M2T_RC_HPP_

#include <cstdint>
#include <vector>

#include "m2t/errors.hpp"

namespace m2t {

class RangeEncoder {
 public:
  // Encodes a symbol occupying [cum, cum + freq) of the 2^precision_bits
  // total. freq must be nonzero.
  void encode(uint32_t cum, uint32_t freq, int precision_bits) {
    uint32_t r = range_ >> precision_bits;
    low_ += static_cast<uint64_t>(cum) * r;
    range_ = freq * r;
    while (range_ < kTop) {
      shift_low();
      range_ <<= 8;
    }
  }

  // Flushes pending bytes and returns the stream. The encoder is spent.
  std::vector<uint8_t> finish() {
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

 private:
  static constexpr uint32_t kTop = 1u << 24;

  void shift_low() {
    if (static_cast<uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
      uint8_t carry = static_cast<uint8_t>(low_ >> 32);
      out_.push_back(static_cast<uint8_t>(cache_ + carry));
      while (pending_ > 0) {
        out_.push_back(static_cast<uint8_t>(0xFF + carry));
        --pending_;
      }
      cache_ = static_cast<uint8_t>(low_ >> 24);
    } else {
      ++pending_;
    }
    low_ = (low_ & 0x00FFFFFFull) << 8;
  }

  uint64_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint8_t cache_ = 0;
  uint64_t pending_ = 0;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t size) : data_(data), size_(size) {
    next_byte();  // the encoder's initial zero cache byte
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | next_byte();
  }

  // Returns a value in [0, 2^precision_bits) locating the next symbol's
  // cumulative slot. Follow with consume() for the matched symbol.
  uint32_t decode_target(int precision_bits) {
    r_ = range_ >> precision_bits;
    uint32_t dv = code_ / r_;
    uint32_t maxv = (1u << precision_bits) - 1;
    return dv < maxv ? dv : maxv;
  }

  void consume(uint32_t cum, uint32_t freq) {
    code_ -= cum * r_;
    range_ = freq * r_;
    while (range_ < kTop) {
      code_ = (code_ << 8) | next_byte();
      range_ <<= 8;
    }
  }

  // Bytes requested past the end of the stream; nonzero after decoding the
  // expected symbol count means the payload was shorter than a well-formed
  // stream for those symbols.
  size_t overrun() const { return overrun_; }

 private:
  static constexpr uint32_t kTop = 1u << 24;

  uint8_t next_byte() {
    if (pos_ < size_) return data_[pos_++];
    ++overrun_;
    return 0;
  }

  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
  size_t overrun_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
  uint32_t r_ = 1;
};

// Cumulative form of a quantized PMF: cum has n+1 entries, cum[n] equals
// 2^precision, every per-symbol frequency is >= 1.
struct FreqTable {
  std::vector<uint32_t> cum;

  static FreqTable from_freqs(const std::vector<uint32_t>& freq) {
    FreqTable t;
    t.cum.resize(freq.size() + 1);
    t.cum[0] = 0;
    for (size_t i = 0; i < freq.size(); ++i) t.cum[i + 1] = t.cum[i] + freq[i];
    return t;
  }

  uint32_t freq(int s) const { return cum[static_cast<size_t>(s) + 1] - cum[static_cast<size_t>(s)]; }
  int symbols() const { return static_cast<int>(cum.size()) - 1; }

  // Largest s with cum[s] <= dv.
  int find(uint32_t dv) const {
    int lo = 0;
    int hi = symbols() - 1;
    while (lo < hi) {
      int mid = (lo + hi + 1) / 2;
      if (cum[static_cast<size_t>(mid)] <= dv) {
        lo = mid;
      } else {
        hi = mid - 1;
      }
    }
    return lo;
  }
};

// Whole-sequence helpers; symbols[i] indexes into tables[i].
std::vector<uint8_t> rc_encode(const std::vector<int>& symbols,
                               const std::vector<FreqTable>& tables,
                               int precision_bits);
std::vector<int> rc_decode(const std::vector<uint8_t>& bytes,
                           const std::vector<FreqTable>& tables,
                           int precision_bits);

}  // namespace m2t

#endif  // M2T_RC_HPP_
