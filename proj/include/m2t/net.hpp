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
// Pre-norm transformer encoder with a dense value embedding, a learned mask
// token, learned positional embeddings and a Gaussian-mixture output head.
//
// Every position is computed with per-position kernels (matrix-vector
// products, attention accumulated key-by-key in index order). A position's
// activations therefore do not depend on which other positions share the
// batch, so a one-shot forward under a group-causal attention mask and an
// incremental key/value-cached forward over the same groups produce
// bit-identical outputs. The codec depends on that equivalence.

#ifndef M2T_NET_HPP_
#define M2T_NET_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "m2t/errors.hpp"
#include "m2t/gmm.hpp"
#include "m2t/layout.hpp"
#include "m2t/rng.hpp"

namespace m2t {

struct ModelConfig {
  int layers = 4;
  int width = 64;
  int mlp_hidden = 256;
  int heads = 4;
  int channels = 2;  // token channels c
  int n_mix = 3;
  int w_t = 16;
  double delta = 5.0;  // embedding divisor

  int tokens() const { return w_t * w_t; }
  int head_dim() const { return width / heads; }
  int head_out() const { return 3 * n_mix * channels; }

  void validate() const {
    check_contract(layers >= 1 && width >= 1 && mlp_hidden >= 1 && heads >= 1,
                   "config: non-positive dimension");
    check_contract(width % heads == 0, "config: width not divisible by heads");
    check_contract(channels >= 1 && n_mix >= 1 && w_t >= 1,
                   "config: non-positive channels/n_mix/w_t");
    check_contract(delta > 0.0, "config: delta must be positive");
  }
  bool operator==(const ModelConfig& o) const {
    return layers == o.layers && width == o.width &&
           mlp_hidden == o.mlp_hidden && heads == o.heads &&
           channels == o.channels && n_mix == o.n_mix && w_t == o.w_t &&
           delta == o.delta;
  }
};

constexpr double kLayerNormEps = 1e-5;

// Named views into one flat parameter vector. Offsets are aligned to 8
// elements so Eigen maps see a consistent alignment pattern in every run.
struct TensorSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  size_t offset = 0;
};

class ParamLayout {
 public:
  explicit ParamLayout(const ModelConfig& cfg) {
    auto add = [this](const std::string& name, int rows, int cols) {
      TensorSpec s{name, rows, cols, size_};
      size_ += (static_cast<size_t>(rows) * cols + 7) & ~size_t{7};
      index_[name] = specs_.size();
      specs_.push_back(std::move(s));
    };
    add("embed.w", cfg.width, cfg.channels);
    add("embed.b", cfg.width, 1);
    add("mask", cfg.width, 1);
    add("pos", cfg.width, cfg.tokens());
    for (int l = 0; l < cfg.layers; ++l) {
      std::string p = "l" + std::to_string(l) + ".";
      add(p + "ln1.g", cfg.width, 1);
      add(p + "ln1.b", cfg.width, 1);
      add(p + "wq", cfg.width, cfg.width);
      add(p + "bq", cfg.width, 1);
      add(p + "wk", cfg.width, cfg.width);
      add(p + "bk", cfg.width, 1);
      add(p + "wv", cfg.width, cfg.width);
      add(p + "bv", cfg.width, 1);
      add(p + "wo", cfg.width, cfg.width);
      add(p + "bo", cfg.width, 1);
      add(p + "ln2.g", cfg.width, 1);
      add(p + "ln2.b", cfg.width, 1);
      add(p + "w1", cfg.mlp_hidden, cfg.width);
      add(p + "b1", cfg.mlp_hidden, 1);
      add(p + "w2", cfg.width, cfg.mlp_hidden);
      add(p + "b2", cfg.width, 1);
    }
    add("lnf.g", cfg.width, 1);
    add("lnf.b", cfg.width, 1);
    add("head.w", cfg.head_out(), cfg.width);
    add("head.b", cfg.head_out(), 1);
  }

  size_t size() const { return size_; }
  const std::vector<TensorSpec>& specs() const { return specs_; }
  const TensorSpec& spec(const std::string& name) const {
    auto it = index_.find(name);
    check_contract(it != index_.end(), "unknown tensor: " + name);
    return specs_[it->second];
  }

 private:
  std::vector<TensorSpec> specs_;
  std::unordered_map<std::string, size_t> index_;
  size_t size_ = 0;
};

template <typename Scalar>
struct ModelState {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using MapMat = Eigen::Map<Mat>;
  using MapConstMat = Eigen::Map<const Mat>;

  ModelConfig config;
  ParamLayout layout;
  Vec params;

  explicit ModelState(const ModelConfig& cfg)
      : config(cfg), layout(cfg), params(Vec::Zero(layout.size())) {
    config.validate();
  }

  MapConstMat mat(const std::string& name) const {
    const TensorSpec& s = layout.spec(name);
    return MapConstMat(params.data() + s.offset, s.rows, s.cols);
  }
  MapMat mat(const std::string& name) {
    const TensorSpec& s = layout.spec(name);
    return MapMat(params.data() + s.offset, s.rows, s.cols);
  }
};

// Raw-scale bias that lands sigma = sigma_min + softplus(raw) at 1.
inline double sigma_unit_raw() {
  return std::log(std::exp(1.0 - kSigmaMin) - 1.0);
}

// Fan-in scaled uniform init; positional table and mask token start small;
// the head starts at zero weights with biases putting every mixture at
// N(0, 1) and uniform component weights.
template <typename Scalar>
ModelState<Scalar> init_model(const ModelConfig& cfg, uint64_t seed) {
  ModelState<Scalar> st(cfg);
  SplitMix64 rng(seed);
  auto fill_uniform = [&](const std::string& name, double bound) {
    auto m = st.mat(name);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = static_cast<Scalar>(rng.next_uniform(-bound, bound));
      }
    }
  };
  fill_uniform("embed.w", std::sqrt(1.0 / cfg.channels));
  fill_uniform("mask", 0.02);
  fill_uniform("pos", 0.02);
  double wb = std::sqrt(1.0 / cfg.width);
  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = "l" + std::to_string(l) + ".";
    st.mat(p + "ln1.g").setOnes();
    st.mat(p + "ln2.g").setOnes();
    fill_uniform(p + "wq", wb);
    fill_uniform(p + "wk", wb);
    fill_uniform(p + "wv", wb);
    fill_uniform(p + "wo", wb);
    fill_uniform(p + "w1", wb);
    fill_uniform(p + "w2", std::sqrt(1.0 / cfg.mlp_hidden));
  }
  st.mat("lnf.g").setOnes();
  auto hb = st.mat("head.b");
  const Scalar raw1 = static_cast<Scalar>(sigma_unit_raw());
  for (int ch = 0; ch < cfg.channels; ++ch) {
    for (int k = 0; k < cfg.n_mix; ++k) {
      hb(3 * cfg.n_mix * ch + cfg.n_mix + k, 0) = raw1;
    }
  }
  return st;
}

// One input position: a real token (value vector, possibly noisy during
// training) or a masked slot. pos_index selects the positional embedding of
// the grid cell this slot stands for.
template <typename Scalar>
struct TokenSlot {
  bool present = false;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> value;  // c entries when present
  int pos_index = 0;
  int group = 0;
};

// Integer-valued present slot.
template <typename Scalar>
TokenSlot<Scalar> token_slot(const std::vector<int>& vals, int pos_index,
                             int group = 0) {
  TokenSlot<Scalar> s;
  s.present = true;
  s.value.resize(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i) {
    s.value[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(vals[i]);
  }
  s.pos_index = pos_index;
  s.group = group;
  return s;
}

template <typename Scalar>
TokenSlot<Scalar> masked_slot(int pos_index, int group = 0) {
  TokenSlot<Scalar> s;
  s.present = false;
  s.pos_index = pos_index;
  s.group = group;
  return s;
}

// Per-layer key/value store for incremental decoding. Fixed capacity,
// append-only within a session.
template <typename Scalar>
struct KvCache {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  int len = 0;
  int capacity = 0;
  std::vector<Mat> k, v;  // per layer, width x capacity

  KvCache(const ModelConfig& cfg, int capacity_)
      : capacity(capacity_),
        k(static_cast<size_t>(cfg.layers), Mat(cfg.width, capacity_)),
        v(static_cast<size_t>(cfg.layers), Mat(cfg.width, capacity_)) {}
};

struct ForwardStats {
  uint64_t tokens = 0;  // input positions fed through the stack
  uint64_t calls = 0;
};

namespace detail {

template <typename Scalar>
inline Scalar softplus(Scalar x) {
  return x > Scalar(20) ? x : std::log1p(std::exp(x));
}

// LayerNorm of one column. Mean/variance accumulate in index order.
template <typename Scalar, typename In>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> layer_norm(
    const In& x, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& gamma,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& beta) {
  const Eigen::Index n = x.size();
  Scalar mean = x.sum() / Scalar(n);
  Scalar var = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar d = x[i] - mean;
    var += d * d;
  }
  var /= Scalar(n);
  Scalar istd = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEps));
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[i] = (x[i] - mean) * istd * gamma[i] + beta[i];
  }
  return out;
}

template <typename Scalar>
inline Scalar gelu(Scalar x) {
  return Scalar(0.5) * x * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> embed_slot(
    const ModelState<Scalar>& st, const TokenSlot<Scalar>& slot) {
  using Vec = typename ModelState<Scalar>::Vec;
  check_contract(slot.pos_index >= 0 && slot.pos_index < st.config.tokens(),
                 "embed: positional index out of range");
  Vec e;
  if (slot.present) {
    check_contract(slot.value.size() == st.config.channels,
                   "embed: token channel mismatch");
    Vec scaled = slot.value / static_cast<Scalar>(st.config.delta);
    e = st.mat("embed.w") * scaled + st.mat("embed.b").col(0);
  } else {
    e = st.mat("mask").col(0);
  }
  e += st.mat("pos").col(slot.pos_index);
  return e;
}

// Decodes one head output column into mixture parameters. Layout per
// channel: n_mix means, n_mix raw scales, n_mix weight logits.
template <typename Scalar, typename Col>
GmmToken<Scalar> head_to_gmm(const ModelConfig& cfg, const Col& o) {
  GmmToken<Scalar> t;
  const int m = cfg.n_mix;
  t.mean.resize(cfg.channels, m);
  t.scale.resize(cfg.channels, m);
  t.weight.resize(cfg.channels, m);
  for (int ch = 0; ch < cfg.channels; ++ch) {
    const int base = 3 * m * ch;
    Scalar maxl = o[base + 2 * m];
    for (int k = 1; k < m; ++k) maxl = std::max(maxl, o[base + 2 * m + k]);
    Scalar lsum = Scalar(0);
    for (int k = 0; k < m; ++k) {
      t.mean(ch, k) = o[base + k];
      Scalar sig = static_cast<Scalar>(kSigmaMin) +
                   detail::softplus(o[base + m + k]);
      t.scale(ch, k) = std::min(sig, static_cast<Scalar>(kSigmaMax));
      Scalar e = std::exp(o[base + 2 * m + k] - maxl);
      t.weight(ch, k) = e;
      lsum += e;
    }
    for (int k = 0; k < m; ++k) t.weight(ch, k) /= lsum;
  }
  return t;
}

namespace detail {

// Attention of one query over the cache pool followed by the chunk pool,
// keys visited in index order. Identical arithmetic regardless of how the
// sequence was chunked.
template <typename Scalar, typename Vis>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> attend_query(
    const ModelConfig& cfg,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* k1,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* v1, int n1,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& k2,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& v2, int n2,
    Vis&& visible, std::vector<Scalar>& score_buf) {
  const int d = cfg.head_dim();
  const Scalar inv_sqrt_d = Scalar(1) / std::sqrt(Scalar(d));
  const int m = n1 + n2;
  if (static_cast<int>(score_buf.size()) < m) score_buf.resize(m);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(cfg.width);

  for (int h = 0; h < cfg.heads; ++h) {
    const int hb = h * d;
    Scalar maxs = -std::numeric_limits<Scalar>::infinity();
    for (int j = 0; j < m; ++j) {
      if (!visible(j)) continue;
      const auto kcol = j < n1 ? k1->col(j) : k2.col(j - n1);
      Scalar s = q.segment(hb, d).dot(kcol.segment(hb, d)) * inv_sqrt_d;
      score_buf[static_cast<size_t>(j)] = s;
      if (s > maxs) maxs = s;
    }
    check_contract(maxs > -std::numeric_limits<Scalar>::infinity(),
                   "attention: query with no visible key");
    Scalar sum = Scalar(0);
    for (int j = 0; j < m; ++j) {
      if (!visible(j)) continue;
      Scalar e = std::exp(score_buf[static_cast<size_t>(j)] - maxs);
      score_buf[static_cast<size_t>(j)] = e;
      sum += e;
    }
    const Scalar inv_sum = Scalar(1) / sum;
    out.segment(hb, d).setZero();
    for (int j = 0; j < m; ++j) {
      if (!visible(j)) continue;
      const Scalar w = score_buf[static_cast<size_t>(j)] * inv_sum;
      const auto vcol = j < n1 ? v1->col(j) : v2.col(j - n1);
      out.segment(hb, d) += w * vcol.segment(hb, d);
    }
  }
  return out;
}

// Shared forward over one chunk. `cache` may be null (one-shot run); the
// visibility callback gets (query local index, key global index).
template <typename Scalar, typename Vis>
std::vector<GmmToken<Scalar>> forward_chunk(const ModelState<Scalar>& st,
                                            const std::vector<TokenSlot<Scalar>>& slots,
                                            KvCache<Scalar>* cache, Vis&& visible,
                                            ForwardStats* stats) {
  using Mat = typename ModelState<Scalar>::Mat;
  using Vec = typename ModelState<Scalar>::Vec;
  const ModelConfig& cfg = st.config;
  const int nc = static_cast<int>(slots.size());
  check_contract(nc >= 1, "forward: empty input");
  const int n1 = cache != nullptr ? cache->len : 0;
  if (cache != nullptr) {
    check_contract(cache->len + nc <= cache->capacity,
                   "forward: cache capacity exceeded");
    check_contract(static_cast<int>(cache->k.size()) == cfg.layers &&
                       cache->k[0].rows() == cfg.width,
                   "forward: cache/config mismatch");
  }
  if (stats != nullptr) {
    stats->tokens += static_cast<uint64_t>(nc);
    stats->calls += 1;
  }

  Mat x(cfg.width, nc);
  for (int p = 0; p < nc; ++p) x.col(p) = embed_slot(st, slots[static_cast<size_t>(p)]);

  std::vector<Scalar> score_buf;
  Mat kc(cfg.width, nc), vc(cfg.width, nc), attn(cfg.width, nc);
  Vec q(cfg.width);

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string pre = "l" + std::to_string(l) + ".";
    const auto ln1g = st.mat(pre + "ln1.g").col(0).eval();
    const auto ln1b = st.mat(pre + "ln1.b").col(0).eval();
    const auto wq = st.mat(pre + "wq");
    const auto wk = st.mat(pre + "wk");
    const auto wv = st.mat(pre + "wv");
    const auto wo = st.mat(pre + "wo");
    const auto bq = st.mat(pre + "bq").col(0).eval();
    const auto bk = st.mat(pre + "bk").col(0).eval();
    const auto bv = st.mat(pre + "bv").col(0).eval();
    const auto bo = st.mat(pre + "bo").col(0).eval();

    Mat qs(cfg.width, nc);
    for (int p = 0; p < nc; ++p) {
      Vec a = layer_norm<Scalar>(x.col(p), ln1g, ln1b);
      qs.col(p) = wq * a + bq;
      kc.col(p) = wk * a + bk;
      vc.col(p) = wv * a + bv;
    }
    const Mat* k1 = cache != nullptr ? &cache->k[static_cast<size_t>(l)] : nullptr;
    const Mat* v1 = cache != nullptr ? &cache->v[static_cast<size_t>(l)] : nullptr;
    for (int p = 0; p < nc; ++p) {
      q = qs.col(p);
      attn.col(p) = attend_query<Scalar>(
          cfg, q, k1, v1, n1, kc, vc, nc,
          [&](int j) { return visible(p, j); }, score_buf);
    }
    for (int p = 0; p < nc; ++p) x.col(p) += wo * attn.col(p) + bo;
    if (cache != nullptr) {
      cache->k[static_cast<size_t>(l)].middleCols(n1, nc) = kc;
      cache->v[static_cast<size_t>(l)].middleCols(n1, nc) = vc;
    }

    const auto ln2g = st.mat(pre + "ln2.g").col(0).eval();
    const auto ln2b = st.mat(pre + "ln2.b").col(0).eval();
    const auto w1 = st.mat(pre + "w1");
    const auto b1 = st.mat(pre + "b1").col(0).eval();
    const auto w2 = st.mat(pre + "w2");
    const auto b2 = st.mat(pre + "b2").col(0).eval();
    for (int p = 0; p < nc; ++p) {
      Vec a = layer_norm<Scalar>(x.col(p), ln2g, ln2b);
      Vec h = w1 * a + b1;
      for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = gelu(h[i]);
      x.col(p) += w2 * h + b2;
    }
  }
  if (cache != nullptr) cache->len += nc;

  const auto lnfg = st.mat("lnf.g").col(0).eval();
  const auto lnfb = st.mat("lnf.b").col(0).eval();
  const auto hw = st.mat("head.w");
  const auto hb = st.mat("head.b").col(0).eval();
  std::vector<GmmToken<Scalar>> out;
  out.reserve(static_cast<size_t>(nc));
  for (int p = 0; p < nc; ++p) {
    Vec a = layer_norm<Scalar>(x.col(p), lnfg, lnfb);
    Vec o = hw * a + hb;
    out.push_back(head_to_gmm<Scalar>(cfg, o));
  }
  return out;
}

}  // namespace detail

// One-shot forward. attn_mask: optional n x n binary matrix, entry (p, q)
// nonzero iff position p may attend to position q; null means no masking.
template <typename Scalar>
std::vector<GmmToken<Scalar>> forward_masked(
    const ModelState<Scalar>& st, const std::vector<TokenSlot<Scalar>>& slots,
    const AttnMask* attn_mask, ForwardStats* stats = nullptr) {
  const int n = static_cast<int>(slots.size());
  if (attn_mask != nullptr) {
    check_contract(attn_mask->rows() == n && attn_mask->cols() == n,
                   "forward: mask shape mismatch");
    return detail::forward_chunk<Scalar>(
        st, slots, nullptr,
        [&](int p, int j) { return (*attn_mask)(p, j) != 0; }, stats);
  }
  return detail::forward_chunk<Scalar>(
      st, slots, nullptr, [](int, int) { return true; }, stats);
}

// Incremental forward: appends the chunk to the cache; chunk positions
// attend to every cached position and to each other (one schedule group per
// call gives exactly the group-causal visibility of the block mask).
template <typename Scalar>
std::vector<GmmToken<Scalar>> forward_cached(
    const ModelState<Scalar>& st, KvCache<Scalar>& cache,
    const std::vector<TokenSlot<Scalar>>& chunk, ForwardStats* stats = nullptr) {
  return detail::forward_chunk<Scalar>(
      st, chunk, &cache, [](int, int) { return true; }, stats);
}

// Eval-time MT loss: bits to code the masked positions of an integer tile
// given predicted parameters (exact unit-bin integration, no noise).
template <typename Scalar>
double nll_mt_bits(const std::vector<std::vector<int>>& tokens,
                   const std::vector<int>& masked,
                   const std::vector<GmmToken<Scalar>>& params) {
  double bits = 0.0;
  for (int p : masked) {
    const GmmToken<Scalar>& t = params[static_cast<size_t>(p)];
    for (int ch = 0; ch < t.channels(); ++ch) {
      bits += nll_bits(GmmChannel::from(t, ch),
                       static_cast<double>(tokens[static_cast<size_t>(p)][static_cast<size_t>(ch)]));
    }
  }
  return bits;
}

// Eval-time M2T loss: bits for the whole tile in one teacher-forced pass,
// slot j of the layout predicting tile position target_perm[j].
template <typename Scalar>
double nll_m2t_bits(const std::vector<std::vector<int>>& tokens,
                    const M2TLayout& layout,
                    const std::vector<GmmToken<Scalar>>& params) {
  check_contract(params.size() == static_cast<size_t>(layout.total()),
                 "nll_m2t: params/layout size mismatch");
  double bits = 0.0;
  for (int j = 0; j < layout.total(); ++j) {
    const GmmToken<Scalar>& t = params[static_cast<size_t>(j)];
    const std::vector<int>& tok =
        tokens[static_cast<size_t>(layout.target_perm[static_cast<size_t>(j)])];
    for (int ch = 0; ch < t.channels(); ++ch) {
      bits += nll_bits(GmmChannel::from(t, ch), static_cast<double>(tok[static_cast<size_t>(ch)]));
    }
  }
  return bits;
}

// Draws the not-yet-transmitted tokens of a tile from their conditional
// PMFs over [lo, hi], given the known ones. tokens is n x c (integers);
// known positions keep their values, the rest are replaced by samples.
template <typename Scalar>
std::vector<std::vector<int>> sample_completion(
    const ModelState<Scalar>& st, const std::vector<std::vector<int>>& tokens,
    const std::vector<char>& known, int lo, int hi, SplitMix64& rng) {
  const int n = st.config.tokens();
  check_contract(static_cast<int>(tokens.size()) == n &&
                     static_cast<int>(known.size()) == n,
                 "sample_completion: size mismatch");
  std::vector<TokenSlot<Scalar>> slots;
  slots.reserve(static_cast<size_t>(n));
  for (int p = 0; p < n; ++p) {
    if (known[static_cast<size_t>(p)]) {
      slots.push_back(token_slot<Scalar>(tokens[static_cast<size_t>(p)], p));
    } else {
      slots.push_back(masked_slot<Scalar>(p));
    }
  }
  std::vector<GmmToken<Scalar>> params = forward_masked(st, slots, nullptr);
  std::vector<std::vector<int>> out = tokens;
  for (int p = 0; p < n; ++p) {
    if (known[static_cast<size_t>(p)]) continue;
    const GmmToken<Scalar>& t = params[static_cast<size_t>(p)];
    for (int ch = 0; ch < st.config.channels; ++ch) {
      Eigen::VectorXd probs = bin_pmf_range(GmmChannel::from(t, ch), lo, hi);
      double mass = probs.sum();
      double u = rng.next_unit() * mass;
      double acc = 0.0;
      int pick = hi;
      for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
          pick = lo + i;
          break;
        }
      }
      out[static_cast<size_t>(p)][static_cast<size_t>(ch)] = pick;
    }
  }
  return out;
}

}  // namespace m2t

#endif  // M2T_NET_HPP_
