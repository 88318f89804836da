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

#include "m2t/rc.hpp"

namespace m2t {

std::vector<uint8_t> rc_encode(const std::vector<int>& symbols,
                               const std::vector<FreqTable>& tables,
                               int precision_bits) {
  check_contract(symbols.size() == tables.size(),
                 "rc_encode: symbols/tables size mismatch");
  RangeEncoder enc;
  for (size_t i = 0; i < symbols.size(); ++i) {
    const FreqTable& t = tables[i];
    int s = symbols[i];
    check_contract(s >= 0 && s < t.symbols(), "rc_encode: symbol outside support");
    enc.encode(t.cum[static_cast<size_t>(s)], t.freq(s), precision_bits);
  }
  return enc.finish();
}

std::vector<int> rc_decode(const std::vector<uint8_t>& bytes,
                           const std::vector<FreqTable>& tables,
                           int precision_bits) {
  RangeDecoder dec(bytes.data(), bytes.size());
  std::vector<int> out(tables.size());
  for (size_t i = 0; i < tables.size(); ++i) {
    const FreqTable& t = tables[i];
    uint32_t dv = dec.decode_target(precision_bits);
    int s = t.find(dv);
    dec.consume(t.cum[static_cast<size_t>(s)], t.freq(s));
    out[i] = s;
  }
  if (dec.overrun() > 0) throw FormatError("rc_decode: stream too short");
  return out;
}

}  // namespace m2t
