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

#include "m2t/qlds.hpp"

#include <algorithm>
#include <cmath>

#include "m2t/errors.hpp"

namespace m2t {

double plastic_constant() {
  // Newton on f(x) = x^3 - x - 1 from x = 1.3; converges in a handful of
  // steps and is stationary once at full precision.
  double x = 1.3;
  for (int it = 0; it < 64; ++it) {
    double f = x * x * x - x - 1.0;
    double df = 3.0 * x * x - 1.0;
    double next = x - f / df;
    if (next == x) break;
    x = next;
  }
  return x;
}

LdsPoint lds_point(int64_t i) {
  static const double rho = plastic_constant();
  static const double phi_u = 1.0 / rho;
  static const double phi_v = 1.0 / (rho * rho);
  double di = static_cast<double>(i);
  LdsPoint p;
  p.u = std::fmod(di * phi_u, 1.0);
  p.v = std::fmod(di * phi_v, 1.0);
  return p;
}

QldsOrder qlds_order(int w_t) {
  check_contract(w_t >= 1, "qlds_order: w_t must be >= 1");
  const int n = w_t * w_t;
  QldsOrder order;
  order.w_t = w_t;
  order.cells.reserve(n);
  std::vector<char> seen(static_cast<size_t>(n), 0);
  int covered = 0;
  int64_t i = 0;
  while (covered < n) {
    ++i;
    LdsPoint p = lds_point(i);
    int col = std::min(static_cast<int>(w_t * p.u), w_t - 1);
    int row = std::min(static_cast<int>(w_t * p.v), w_t - 1);
    int cell = row * w_t + col;
    if (!seen[cell]) {
      seen[cell] = 1;
      order.cells.push_back(cell);
      ++covered;
    }
  }
  order.consumed = i;
  return order;
}

double discrepancy_1d(const std::vector<double>& xs) {
  check_contract(!xs.empty(), "discrepancy_1d: empty point set");
  std::vector<double> s(xs);
  std::sort(s.begin(), s.end());
  const int n = static_cast<int>(s.size());
  const double inv_n = 1.0 / n;

  auto count_le = [&](double x) {
    return static_cast<int>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
  };
  auto count_lt = [&](double x) {
    return static_cast<int>(std::lower_bound(s.begin(), s.end(), x) - s.begin());
  };

  // Candidate endpoints: 0, 1 and the distinct point values. For a pair
  // a <= b we evaluate the closed count (points in [a, b]) against length
  // b - a, and the open count (points in (a, b)) against the same length;
  // these are the limits of [a, b + eps) and [a + eps, b) respectively.
  std::vector<double> cand(s);
  cand.push_back(0.0);
  cand.push_back(1.0);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  double best = 0.0;
  for (size_t ia = 0; ia < cand.size(); ++ia) {
    for (size_t ib = ia; ib < cand.size(); ++ib) {
      double a = cand[ia];
      double b = cand[ib];
      double len = b - a;
      int closed = count_le(b) - count_lt(a);
      int open = count_lt(b) - count_le(a);
      best = std::max(best, std::abs(closed * inv_n - len));
      if (open > 0 || len > 0.0) {
        best = std::max(best, std::abs(open * inv_n - len));
      }
    }
  }
  return best;
}

}  // namespace m2t
