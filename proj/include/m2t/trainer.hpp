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

#ifndef M2T_TRAINER_HPP_
#define M2T_TRAINER_HPP_

#include <functional>
#include <numeric>
#include <vector>

#include "m2t/layout.hpp"
#include "m2t/net_train.hpp"
#include "m2t/synth.hpp"

namespace m2t {

// Tile values as n x c integer rows, position p = row * w_t + col.
inline std::vector<std::vector<int>> tokens_of_tile(const TokenGrid& tile) {
  std::vector<std::vector<int>> t(static_cast<size_t>(tile.h) * tile.w,
                                  std::vector<int>(static_cast<size_t>(tile.c)));
  for (int r = 0; r < tile.h; ++r) {
    for (int col = 0; col < tile.w; ++col) {
      for (int ch = 0; ch < tile.c; ++ch) {
        t[static_cast<size_t>(r) * tile.w + col][static_cast<size_t>(ch)] =
            tile.at(r, col, ch);
      }
    }
  }
  return t;
}

// MT training example: a uniform mask ratio in [ratio_lo, ratio_hi] decides
// how many positions are masked; masked tokens are the regression targets.
// Quantization noise u ~ U(-1/2, 1/2) is added per token entry and shared
// between a token's appearance as context and as target.
template <typename Scalar>
TrainItem<Scalar> make_mt_item(const std::vector<std::vector<int>>& tokens,
                               int w_t, double ratio_lo, double ratio_hi,
                               SplitMix64& rng) {
  const int n = w_t * w_t;
  const int c = static_cast<int>(tokens[0].size());
  TrainItem<Scalar> item;
  item.targets.resize(c, n);
  Eigen::MatrixXd noisy(c, n);
  for (int p = 0; p < n; ++p) {
    for (int ch = 0; ch < c; ++ch) {
      noisy(ch, p) = tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)] +
                     rng.next_uniform(-0.5, 0.5);
    }
  }
  item.targets = noisy;

  double ratio = rng.next_uniform(ratio_lo, ratio_hi);
  int n_masked = std::max(1, std::min(n, static_cast<int>(std::lround(ratio * n))));
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(order, rng);
  std::vector<char> is_masked(static_cast<size_t>(n), 0);
  item.loss_slots.assign(order.begin(), order.begin() + n_masked);
  for (int p : item.loss_slots) is_masked[static_cast<size_t>(p)] = 1;

  item.slots.reserve(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    if (is_masked[static_cast<size_t>(p)]) {
      item.slots.push_back(masked_slot<Scalar>(p));
    } else {
      TokenSlot<Scalar> s;
      s.present = true;
      s.pos_index = p;
      s.value = noisy.col(p).cast<Scalar>();
      item.slots.push_back(std::move(s));
    }
  }
  return item;
}

// M2T training example: teacher-forced layout slots; every slot is a loss
// slot, targets permuted per the layout. The same noise draw serves a
// token's input and target appearances.
template <typename Scalar>
TrainItem<Scalar> make_m2t_item(const std::vector<std::vector<int>>& tokens,
                                const M2TLayout& layout, SplitMix64& rng) {
  const int n = layout.total();
  const int c = static_cast<int>(tokens[0].size());
  Eigen::MatrixXd noisy(c, n);
  for (int p = 0; p < n; ++p) {
    for (int ch = 0; ch < c; ++ch) {
      noisy(ch, p) = tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)] +
                     rng.next_uniform(-0.5, 0.5);
    }
  }
  TrainItem<Scalar> item;
  item.targets.resize(c, n);
  item.slots.reserve(static_cast<size_t>(n));
  item.loss_slots.resize(static_cast<size_t>(n));
  std::iota(item.loss_slots.begin(), item.loss_slots.end(), 0);
  for (int j = 0; j < n; ++j) {
    int fed = layout.input_token_pos[static_cast<size_t>(j)];
    if (fed == kMaskPad) {
      item.slots.push_back(masked_slot<Scalar>(layout.pos_index[static_cast<size_t>(j)],
                                               layout.group_of_slot[static_cast<size_t>(j)]));
    } else {
      TokenSlot<Scalar> s;
      s.present = true;
      s.pos_index = layout.pos_index[static_cast<size_t>(j)];
      s.group = layout.group_of_slot[static_cast<size_t>(j)];
      s.value = noisy.col(fed).cast<Scalar>();
      item.slots.push_back(std::move(s));
    }
    item.targets.col(j) = noisy.col(layout.target_perm[static_cast<size_t>(j)]);
  }
  return item;
}

enum class TrainMode { kMt, kM2t };

struct TrainOptions {
  TrainMode mode = TrainMode::kMt;
  int steps = 2000;
  int batch = 8;
  double lr = 1e-3;
  uint64_t seed = 7;
  double mask_ratio_lo = 0.05;  // MT masking range
  double mask_ratio_hi = 0.99;
  MaskSchedule schedule;  // M2T mode only; must have static masks
  // Called every log_every steps with (step, mean bits per symbol).
  int log_every = 50;
  std::function<void(int, double)> on_log;
};

// Adam on the chosen loss over synthetic tiles. Returns the final logged
// loss (bits per symbol). Throws ContractError if the loss goes NaN.
template <typename Scalar>
double train(ModelState<Scalar>& st, GaussMarkovSource& source,
             const TrainOptions& opt) {
  using Vec = typename ModelState<Scalar>::Vec;
  const ModelConfig& cfg = st.config;
  M2TLayout layout;
  AttnMask mask;
  const AttnMask* mask_ptr = nullptr;
  if (opt.mode == TrainMode::kM2t) {
    layout = build_layout(opt.schedule);
    mask = layout.attention_mask();
    mask_ptr = &mask;
  }

  SplitMix64 rng(opt.seed);
  AdamOptimizer adam(st.layout.size());
  Vec grad(st.params.size());
  double last_loss = 0.0;
  for (int step = 0; step < opt.steps; ++step) {
    std::vector<TrainItem<Scalar>> items;
    items.reserve(static_cast<size_t>(opt.batch));
    int symbols = 0;
    for (int b = 0; b < opt.batch; ++b) {
      std::vector<std::vector<int>> tokens = tokens_of_tile(source.next());
      if (opt.mode == TrainMode::kMt) {
        items.push_back(make_mt_item<Scalar>(tokens, cfg.w_t, opt.mask_ratio_lo,
                                             opt.mask_ratio_hi, rng));
      } else {
        items.push_back(make_m2t_item<Scalar>(tokens, layout, rng));
      }
      symbols += static_cast<int>(items.back().loss_slots.size()) * cfg.channels;
    }
    double bits = loss_and_grad(st, items, mask_ptr, &grad);
    double mean_bits = bits / symbols;
    if (!std::isfinite(mean_bits)) {
      throw ContractError("training diverged (non-finite loss at step " +
                          std::to_string(step) + ")");
    }
    grad /= static_cast<Scalar>(symbols);
    adam.step(st.params, grad, opt.lr);
    last_loss = mean_bits;
    if (opt.on_log && (step % opt.log_every == 0 || step == opt.steps - 1)) {
      opt.on_log(step, mean_bits);
    }
  }
  return last_loss;
}

}  // namespace m2t

#endif  // M2T_TRAINER_HPP_
