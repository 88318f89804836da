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

#include "m2t/net.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "doctest.h"
#include "m2t/net_io.hpp"
#include "m2t/net_train.hpp"
#include "m2t/synth.hpp"
#include "m2t/trainer.hpp"

namespace {

using State = m2t::ModelState<double>;

m2t::ModelConfig tiny_config(int w_t = 4) {
  m2t::ModelConfig cfg;
  cfg.layers = 2;
  cfg.width = 16;
  cfg.mlp_hidden = 32;
  cfg.heads = 2;
  cfg.channels = 2;
  cfg.n_mix = 3;
  cfg.w_t = w_t;
  return cfg;
}

std::vector<std::vector<int>> random_tokens(int n, int c, m2t::SplitMix64& rng) {
  std::vector<std::vector<int>> t(static_cast<size_t>(n),
                                  std::vector<int>(static_cast<size_t>(c)));
  for (auto& tok : t) {
    for (auto& v : tok) v = static_cast<int>(rng.next_below(9)) - 4;
  }
  return t;
}

double max_param_rel_diff(const std::vector<m2t::GmmToken<double>>& a,
                          const std::vector<m2t::GmmToken<double>>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    auto rel = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
      for (int r = 0; r < x.rows(); ++r) {
        for (int col = 0; col < x.cols(); ++col) {
          double denom = std::max({std::abs(x(r, col)), std::abs(y(r, col)), 1e-9});
          worst = std::max(worst, std::abs(x(r, col) - y(r, col)) / denom);
        }
      }
    };
    rel(a[i].mean, b[i].mean);
    rel(a[i].scale, b[i].scale);
    rel(a[i].weight, b[i].weight);
  }
  return worst;
}

}  // namespace

TEST_CASE("embed: masked slots share the mask vector plus positionals") {
  State st = m2t::init_model<double>(tiny_config(), 3);
  Eigen::VectorXd mask_vec = st.mat("mask").col(0);
  for (int p = 0; p < 4; ++p) {
    Eigen::VectorXd e = m2t::embed_slot(st, m2t::masked_slot<double>(p));
    Eigen::VectorXd want = mask_vec + Eigen::VectorXd(st.mat("pos").col(p));
    CHECK((e - want).norm() == 0.0);
  }
}

TEST_CASE("embed: zero token is bias plus positional") {
  State st = m2t::init_model<double>(tiny_config(), 4);
  Eigen::VectorXd e = m2t::embed_slot(st, m2t::token_slot<double>({0, 0}, 5));
  Eigen::VectorXd want =
      Eigen::VectorXd(st.mat("embed.b").col(0)) + Eigen::VectorXd(st.mat("pos").col(5));
  CHECK((e - want).norm() < 1e-15);
}

TEST_CASE("embed: delta scaling identity") {
  m2t::ModelConfig cfg = tiny_config();
  State st = m2t::init_model<double>(cfg, 5);
  m2t::TokenSlot<double> raw;
  raw.present = true;
  raw.pos_index = 1;
  raw.value = Eigen::Vector2d(3.0, -2.0);
  Eigen::VectorXd direct = m2t::embed_slot(st, raw);
  // Feeding delta * value through a model with delta' = delta^2 divides it
  // back; same dense layer, same result.
  m2t::TokenSlot<double> scaled = raw;
  scaled.value *= cfg.delta;
  State st2 = st;
  st2.config.delta = cfg.delta * cfg.delta;
  Eigen::VectorXd via = m2t::embed_slot(st2, scaled);
  CHECK((direct - via).norm() < 1e-12);
}

TEST_CASE("all-ones attention mask equals no mask") {
  m2t::ModelConfig cfg = tiny_config();
  State st = m2t::init_model<double>(cfg, 6);
  m2t::SplitMix64 rng(7);
  auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);
  std::vector<m2t::TokenSlot<double>> slots;
  for (int p = 0; p < cfg.tokens(); ++p) {
    slots.push_back(p % 3 == 0 ? m2t::masked_slot<double>(p)
                               : m2t::token_slot<double>(tokens[static_cast<size_t>(p)], p));
  }
  auto open = m2t::forward_masked(st, slots, nullptr);
  m2t::AttnMask ones = m2t::AttnMask::Constant(cfg.tokens(), cfg.tokens(), 1);
  auto masked = m2t::forward_masked(st, slots, &ones);
  CHECK(max_param_rel_diff(open, masked) == 0.0);
}

TEST_CASE("permuting slots with their positions permutes outputs") {
  m2t::ModelConfig cfg = tiny_config();
  State st = m2t::init_model<double>(cfg, 8);
  m2t::SplitMix64 rng(9);
  auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);
  std::vector<m2t::TokenSlot<double>> slots;
  for (int p = 0; p < cfg.tokens(); ++p) {
    slots.push_back(m2t::token_slot<double>(tokens[static_cast<size_t>(p)], p));
  }
  auto base = m2t::forward_masked(st, slots, nullptr);

  std::vector<int> perm(static_cast<size_t>(cfg.tokens()));
  std::iota(perm.begin(), perm.end(), 0);
  m2t::shuffle_in_place(perm, rng);
  std::vector<m2t::TokenSlot<double>> shuffled;
  for (int j = 0; j < cfg.tokens(); ++j) {
    shuffled.push_back(slots[static_cast<size_t>(perm[static_cast<size_t>(j)])]);
  }
  auto moved = m2t::forward_masked(st, shuffled, nullptr);
  std::vector<m2t::GmmToken<double>> realigned(static_cast<size_t>(cfg.tokens()));
  for (int j = 0; j < cfg.tokens(); ++j) {
    realigned[static_cast<size_t>(perm[static_cast<size_t>(j)])] = moved[static_cast<size_t>(j)];
  }
  CHECK(max_param_rel_diff(base, realigned) < 1e-9);
}

TEST_CASE("cached incremental forward equals one-shot block-masked forward") {
  m2t::ModelConfig cfg = tiny_config(4);
  State st = m2t::init_model<double>(cfg, 10);
  m2t::SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int steps = 1 + static_cast<int>(rng.next_below(6));
    double alpha = rng.next_uniform(1.0, 3.0);
    auto kind = trial % 2 == 0 ? m2t::ScheduleKind::kQlds : m2t::ScheduleKind::kRandom;
    m2t::MaskSchedule sched = m2t::make_schedule(kind, steps, alpha, cfg.w_t, trial);
    m2t::M2TLayout lay = m2t::build_layout(sched);
    auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);

    std::vector<m2t::TokenSlot<double>> slots;
    for (int j = 0; j < lay.total(); ++j) {
      int fed = lay.input_token_pos[static_cast<size_t>(j)];
      if (fed == m2t::kMaskPad) {
        slots.push_back(m2t::masked_slot<double>(lay.pos_index[static_cast<size_t>(j)],
                                                 lay.group_of_slot[static_cast<size_t>(j)]));
      } else {
        slots.push_back(m2t::token_slot<double>(tokens[static_cast<size_t>(fed)],
                                                lay.pos_index[static_cast<size_t>(j)],
                                                lay.group_of_slot[static_cast<size_t>(j)]));
      }
    }
    m2t::AttnMask mask = lay.attention_mask();
    auto oneshot = m2t::forward_masked(st, slots, &mask);

    m2t::KvCache<double> cache(cfg, cfg.tokens());
    std::vector<m2t::GmmToken<double>> incremental;
    size_t off = 0;
    for (int g = 0; g < steps; ++g) {
      size_t sz = static_cast<size_t>(lay.group_sizes[static_cast<size_t>(g)]);
      std::vector<m2t::TokenSlot<double>> chunk(slots.begin() + static_cast<long>(off),
                                                slots.begin() + static_cast<long>(off + sz));
      auto part = m2t::forward_cached(st, cache, chunk);
      incremental.insert(incremental.end(), part.begin(), part.end());
      off += sz;
    }
    REQUIRE(incremental.size() == oneshot.size());
    // Spec tolerance is 1e-5 relative; the per-position kernels make the two
    // paths bit-identical, so expect exact agreement.
    CHECK(max_param_rel_diff(oneshot, incremental) == 0.0);
  }
}

TEST_CASE("causality: later-group perturbations leave earlier groups fixed") {
  m2t::ModelConfig cfg = tiny_config(4);
  State st = m2t::init_model<double>(cfg, 12);
  m2t::SplitMix64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    int steps = 2 + static_cast<int>(rng.next_below(5));
    m2t::MaskSchedule sched = m2t::make_schedule(m2t::ScheduleKind::kQlds, steps,
                                                 rng.next_uniform(1.0, 3.0),
                                                 cfg.w_t, 0);
    m2t::M2TLayout lay = m2t::build_layout(sched);
    auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);
    auto make_slots = [&](const std::vector<std::vector<int>>& toks) {
      std::vector<m2t::TokenSlot<double>> slots;
      for (int j = 0; j < lay.total(); ++j) {
        int fed = lay.input_token_pos[static_cast<size_t>(j)];
        if (fed == m2t::kMaskPad) {
          slots.push_back(m2t::masked_slot<double>(lay.pos_index[static_cast<size_t>(j)],
                                                   lay.group_of_slot[static_cast<size_t>(j)]));
        } else {
          slots.push_back(m2t::token_slot<double>(toks[static_cast<size_t>(fed)],
                                                  lay.pos_index[static_cast<size_t>(j)],
                                                  lay.group_of_slot[static_cast<size_t>(j)]));
        }
      }
      return slots;
    };
    m2t::AttnMask mask = lay.attention_mask();
    auto base = m2t::forward_masked(st, make_slots(tokens), &mask);

    // Perturb a token fed in some group j >= 1 and check groups < j.
    int cut = 1 + static_cast<int>(rng.next_below(static_cast<uint64_t>(steps - 1)));
    int fed_pos = -1;
    for (int j = 0; j < lay.total(); ++j) {
      if (lay.group_of_slot[static_cast<size_t>(j)] == cut &&
          lay.input_token_pos[static_cast<size_t>(j)] != m2t::kMaskPad) {
        fed_pos = lay.input_token_pos[static_cast<size_t>(j)];
        break;
      }
    }
    if (fed_pos < 0) continue;  // all-pad group (first group only)
    auto perturbed = tokens;
    perturbed[static_cast<size_t>(fed_pos)][0] += 3;
    auto after = m2t::forward_masked(st, make_slots(perturbed), &mask);
    double worst = 0.0;
    for (int j = 0; j < lay.total(); ++j) {
      if (lay.group_of_slot[static_cast<size_t>(j)] >= cut) continue;
      std::vector<m2t::GmmToken<double>> a{base[static_cast<size_t>(j)]};
      std::vector<m2t::GmmToken<double>> b{after[static_cast<size_t>(j)]};
      worst = std::max(worst, max_param_rel_diff(a, b));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("full-AR degeneration matches a plain triangular next-token run") {
  m2t::ModelConfig cfg = tiny_config(3);
  State st = m2t::init_model<double>(cfg, 14);
  m2t::SplitMix64 rng(15);
  const int n = cfg.tokens();
  auto tokens = random_tokens(n, cfg.channels, rng);

  std::vector<std::vector<int>> unit_masks;
  for (int i = 0; i < n; ++i) unit_masks.push_back({i});
  m2t::M2TLayout lay = m2t::build_layout(cfg.w_t, unit_masks);
  m2t::AttnMask mask = lay.attention_mask();
  std::vector<m2t::TokenSlot<double>> slots;
  for (int j = 0; j < n; ++j) {
    int fed = lay.input_token_pos[static_cast<size_t>(j)];
    slots.push_back(fed == m2t::kMaskPad
                        ? m2t::masked_slot<double>(lay.pos_index[static_cast<size_t>(j)])
                        : m2t::token_slot<double>(tokens[static_cast<size_t>(fed)],
                                                  lay.pos_index[static_cast<size_t>(j)]));
  }
  auto via_layout = m2t::forward_masked(st, slots, &mask);

  // Independent construction: shifted inputs, strict raster positions, a
  // hand-built inclusive triangular mask.
  std::vector<m2t::TokenSlot<double>> plain;
  plain.push_back(m2t::masked_slot<double>(0));
  for (int j = 1; j < n; ++j) {
    plain.push_back(m2t::token_slot<double>(tokens[static_cast<size_t>(j - 1)], j - 1));
  }
  m2t::AttnMask tri(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) tri(p, q) = q <= p ? 1 : 0;
  }
  auto via_plain = m2t::forward_masked(st, plain, &tri);
  CHECK(max_param_rel_diff(via_layout, via_plain) <= 1e-6);
}

TEST_CASE("MT all-mask step equals M2T restricted to one step") {
  m2t::ModelConfig cfg = tiny_config(3);
  State st = m2t::init_model<double>(cfg, 16);
  const int n = cfg.tokens();
  // MT step 1: raster mask slots, no attention mask.
  std::vector<m2t::TokenSlot<double>> mt;
  for (int p = 0; p < n; ++p) mt.push_back(m2t::masked_slot<double>(p));
  auto mt_params = m2t::forward_masked(st, mt, nullptr);

  // M2T with S=1 under a qlds order: all pads, all-visible mask, outputs
  // permuted to schedule order.
  m2t::MaskSchedule sched = m2t::make_schedule(m2t::ScheduleKind::kQlds, 1, 2.2,
                                               cfg.w_t, 0);
  m2t::M2TLayout lay = m2t::build_layout(sched);
  std::vector<m2t::TokenSlot<double>> m2tslots;
  for (int j = 0; j < n; ++j) {
    m2tslots.push_back(m2t::masked_slot<double>(lay.pos_index[static_cast<size_t>(j)],
                                                0));
  }
  m2t::AttnMask mask = lay.attention_mask();
  auto m2t_params = m2t::forward_masked(st, m2tslots, &mask);
  std::vector<m2t::GmmToken<double>> realigned(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    realigned[static_cast<size_t>(lay.target_perm[static_cast<size_t>(j)])] =
        m2t_params[static_cast<size_t>(j)];
  }
  CHECK(max_param_rel_diff(mt_params, realigned) < 1e-9);
}

TEST_CASE("traced forward agrees with the inference forward") {
  m2t::ModelConfig cfg = tiny_config(4);
  State st = m2t::init_model<double>(cfg, 17);
  m2t::SplitMix64 rng(18);
  auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);
  std::vector<m2t::TokenSlot<double>> slots;
  for (int p = 0; p < cfg.tokens(); ++p) {
    slots.push_back(p % 2 == 0 ? m2t::masked_slot<double>(p)
                               : m2t::token_slot<double>(tokens[static_cast<size_t>(p)], p));
  }
  auto inference = m2t::forward_masked(st, slots, nullptr);
  m2t::detail::Trace<double> tr = m2t::detail::traced_forward(st, slots, nullptr);
  double worst = 0.0;
  for (int p = 0; p < cfg.tokens(); ++p) {
    m2t::GmmToken<double> from_trace =
        m2t::head_to_gmm<double>(cfg, Eigen::VectorXd(tr.head_raw.col(p)));
    std::vector<m2t::GmmToken<double>> a{inference[static_cast<size_t>(p)]};
    std::vector<m2t::GmmToken<double>> b{from_trace};
    worst = std::max(worst, max_param_rel_diff(a, b));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("nll oracles: deterministic, two-symbol uniform, naive sum") {
  m2t::ModelConfig cfg = tiny_config(2);
  const int n = cfg.tokens();
  m2t::SplitMix64 rng(19);
  auto tokens = random_tokens(n, cfg.channels, rng);

  // Deterministic PMF at the true symbols: ~0 bits.
  std::vector<m2t::GmmToken<double>> sharp(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    m2t::GmmToken<double>& t = sharp[static_cast<size_t>(p)];
    t.mean.resize(cfg.channels, 3);
    t.scale = Eigen::MatrixXd::Constant(cfg.channels, 3, m2t::kSigmaMin);
    t.weight = Eigen::MatrixXd::Constant(cfg.channels, 3, 1.0 / 3.0);
    for (int ch = 0; ch < cfg.channels; ++ch) {
      t.mean.row(ch).setConstant(tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)]);
    }
  }
  std::vector<int> all(static_cast<size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  double bits = m2t::nll_mt_bits(tokens, all, sharp);
  CHECK(bits / (n * cfg.channels) < 0.01);

  // Half/half two-symbol mixture: 1 bit per channel per token.
  std::vector<m2t::GmmToken<double>> coin(static_cast<size_t>(n));
  std::vector<std::vector<int>> binary(static_cast<size_t>(n),
                                       std::vector<int>(static_cast<size_t>(cfg.channels)));
  for (int p = 0; p < n; ++p) {
    m2t::GmmToken<double>& t = coin[static_cast<size_t>(p)];
    t.mean.resize(cfg.channels, 3);
    t.scale = Eigen::MatrixXd::Constant(cfg.channels, 3, m2t::kSigmaMin);
    t.weight.resize(cfg.channels, 3);
    for (int ch = 0; ch < cfg.channels; ++ch) {
      t.mean(ch, 0) = 0.0;
      t.mean(ch, 1) = 1.0;
      t.mean(ch, 2) = 0.0;
      t.weight.row(ch) << 0.5, 0.5, 0.0;
      binary[static_cast<size_t>(p)][static_cast<size_t>(ch)] =
          static_cast<int>(rng.next_below(2));
    }
  }
  bits = m2t::nll_mt_bits(binary, all, coin);
  CHECK(bits / (n * cfg.channels) == doctest::Approx(1.0).epsilon(0.01));

  // Random params against a per-symbol loop written in place.
  State st = m2t::init_model<double>(cfg, 20);
  std::vector<m2t::TokenSlot<double>> slots;
  for (int p = 0; p < n; ++p) slots.push_back(m2t::masked_slot<double>(p));
  auto params = m2t::forward_masked(st, slots, nullptr);
  std::vector<int> masked = {0, 2, 3};
  double naive = 0.0;
  for (int p : masked) {
    for (int ch = 0; ch < cfg.channels; ++ch) {
      double pm = m2t::bin_pmf(m2t::GmmChannel::from(params[static_cast<size_t>(p)], ch),
                               tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)]);
      naive -= std::log2(pm);
    }
  }
  CHECK(m2t::nll_mt_bits(tokens, masked, params) == doctest::Approx(naive).epsilon(1e-12));

  // M2T variant sums all slots in target order.
  m2t::MaskSchedule sched = m2t::make_schedule(m2t::ScheduleKind::kQlds, 2, 2.2,
                                               cfg.w_t, 0);
  m2t::M2TLayout lay = m2t::build_layout(sched);
  double m2t_naive = 0.0;
  for (int j = 0; j < n; ++j) {
    int p = lay.target_perm[static_cast<size_t>(j)];
    for (int ch = 0; ch < cfg.channels; ++ch) {
      double pm = m2t::bin_pmf(m2t::GmmChannel::from(params[static_cast<size_t>(j)], ch),
                               tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)]);
      m2t_naive -= std::log2(pm);
    }
  }
  CHECK(m2t::nll_m2t_bits(tokens, lay, params) == doctest::Approx(m2t_naive).epsilon(1e-12));
}

TEST_CASE("checkpoint round trip preserves parameters and config") {
  m2t::ModelConfig cfg = tiny_config(3);
  State st = m2t::init_model<double>(cfg, 21);
  std::string path = "test_ckpt.m2tc";
  m2t::save_checkpoint(st, path);
  State back = m2t::load_checkpoint<double>(path);
  CHECK(back.config == cfg);
  CHECK((back.params - st.params).norm() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("sample_completion keeps known tokens and stays in support") {
  m2t::ModelConfig cfg = tiny_config(3);
  State st = m2t::init_model<double>(cfg, 22);
  m2t::SplitMix64 rng(23);
  auto tokens = random_tokens(cfg.tokens(), cfg.channels, rng);
  std::vector<char> known(static_cast<size_t>(cfg.tokens()), 0);
  known[0] = known[3] = 1;
  auto out = m2t::sample_completion(st, tokens, known, -4, 4, rng);
  CHECK(out[0] == tokens[0]);
  CHECK(out[3] == tokens[3]);
  for (const auto& tok : out) {
    for (int v : tok) {
      CHECK(v >= -4);
      CHECK(v <= 4);
    }
  }
}
