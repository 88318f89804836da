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

#ifndef M2T_SYNTH_HPP_
#define M2T_SYNTH_HPP_

#include <cmath>
#include <vector>

#include "m2t/grid.hpp"
#include "m2t/rng.hpp"

namespace m2t {

// Spatially correlated integer fields: per channel a separable first-order
// Gauss-Markov process (AR(1) along rows, then along columns), scaled,
// rounded and clamped. Neighbor correlation ~rho per axis gives schedules
// something to exploit without any image pipeline.
class GaussMarkovSource {
 public:
  GaussMarkovSource(int h, int w, int channels, uint64_t seed,
                    double rho = 0.9, double amplitude = 2.0, int clamp = 12)
      : h_(h), w_(w), channels_(channels), rho_(rho), amplitude_(amplitude),
        clamp_(clamp), rng_(seed) {}

  TokenGrid next() {
    TokenGrid g(h_, w_, channels_);
    const double innov = std::sqrt(1.0 - rho_ * rho_);
    std::vector<double> field(static_cast<size_t>(h_) * w_);
    for (int ch = 0; ch < channels_; ++ch) {
      for (int r = 0; r < h_; ++r) {
        for (int col = 0; col < w_; ++col) {
          double n = rng_.next_normal();
          double prev = col > 0 ? field[static_cast<size_t>(r) * w_ + col - 1] : 0.0;
          field[static_cast<size_t>(r) * w_ + col] =
              col > 0 ? rho_ * prev + innov * n : n;
        }
      }
      for (int col = 0; col < w_; ++col) {
        for (int r = 1; r < h_; ++r) {
          field[static_cast<size_t>(r) * w_ + col] =
              rho_ * field[static_cast<size_t>(r - 1) * w_ + col] +
              innov * field[static_cast<size_t>(r) * w_ + col];
        }
      }
      for (int r = 0; r < h_; ++r) {
        for (int col = 0; col < w_; ++col) {
          double v = amplitude_ * field[static_cast<size_t>(r) * w_ + col];
          long q = std::lround(v);
          if (q > clamp_) q = clamp_;
          if (q < -clamp_) q = -clamp_;
          g.at(r, col, ch) = static_cast<int16_t>(q);
        }
      }
    }
    return g;
  }

 private:
  int h_, w_, channels_;
  double rho_, amplitude_;
  int clamp_;
  SplitMix64 rng_;
};

}  // namespace m2t

#endif  // M2T_SYNTH_HPP_
