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

#ifndef M2T_QLDS_HPP_
#define M2T_QLDS_HPP_

#include <cstdint>
#include <vector>

namespace m2t {

// 2D low-discrepancy point, both coordinates in [0, 1).
struct LdsPoint {
  double u = 0.0;  // column axis
  double v = 0.0;  // row axis
};

// Permutation of the w_t x w_t grid cells obtained by quantizing the
// low-discrepancy sequence and skipping repeats. `consumed` (K) is the
// number of raw points it took to cover every cell.
struct QldsOrder {
  int w_t = 0;
  std::vector<int> cells;  // linear ids row * w_t + col, a bijection
  int64_t consumed = 0;
};

// Plastic constant: the real root of x^3 = x + 1, computed by Newton
// iteration to full double precision.
double plastic_constant();

// i-th point of the Roberts 2D sequence, x_i = i * (1/rho, 1/rho^2) mod 1.
LdsPoint lds_point(int64_t i);

// Quantized low-discrepancy order over the w_t x w_t grid. Iterates
// i = 1, 2, 3, ..., maps each point to a cell with
// col = min(floor(w_t * u), w_t - 1) (likewise for rows), appends cells not
// seen before, and stops once all w_t^2 cells are covered.
//
// The floor quantizer is hard-coded; see docs/qlds.md for the measured
// covering constants of the candidate quantizers.
QldsOrder qlds_order(int w_t);

// Exact discrepancy of a 1D point set: sup over intervals [a, b) of
// |count/N - (b - a)|. The supremum is attained with endpoints at point
// coordinates with open/closed sides, so brute force over those candidates
// is exact.
double discrepancy_1d(const std::vector<double>& xs);

}  // namespace m2t

#endif  // M2T_QLDS_HPP_
