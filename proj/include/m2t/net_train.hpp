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
// Training path: a traced forward pass, reverse-mode gradients written by
// hand, Adam, and a finite-difference gradient checker. The traced forward
// mirrors the inference kernels; a unit test pins the two paths to each
// other.

#ifndef M2T_NET_TRAIN_HPP_
#define M2T_NET_TRAIN_HPP_

#include <cmath>
#include <functional>
#include <vector>

#include "m2t/net.hpp"

namespace m2t {

// One training example: a fully specified slot sequence plus per-slot
// regression targets (noisy token values during training). For MT only the
// masked slots contribute to the loss; for M2T every slot does.
template <typename Scalar>
struct TrainItem {
  std::vector<TokenSlot<Scalar>> slots;
  Eigen::MatrixXd targets;      // c x n, read only at loss_slots columns
  std::vector<int> loss_slots;  // slot indices contributing to the loss
};

namespace detail {

template <typename Scalar>
struct LayerTrace {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Mat x_in;                 // width x n residual entering the layer
  Mat ln1_hat;              // normalized (pre-gain) activations
  Vec ln1_istd;             // n
  Mat q, k, v;              // width x n
  std::vector<Mat> attn_p;  // per head, n x n softmax probs (query rows)
  Mat attn_mix;             // width x n, concatenated heads before Wo
  Mat ln2_hat;
  Vec ln2_istd;
  Mat mlp_pre;  // hidden x n
  Mat mlp_act;  // hidden x n
};

template <typename Scalar>
struct Trace {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::vector<LayerTrace<Scalar>> layers;
  Mat lnf_hat;
  Vec lnf_istd;
  Mat head_raw;  // head_out x n
};

template <typename Scalar, typename In>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> layer_norm_traced(
    const In& x, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& gamma,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& beta,
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* hat, Scalar* istd_out) {
  const Eigen::Index n = x.size();
  Scalar mean = x.sum() / Scalar(n);
  Scalar var = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    Scalar d = x[i] - mean;
    var += d * d;
  }
  var /= Scalar(n);
  Scalar istd = Scalar(1) / std::sqrt(var + Scalar(kLayerNormEps));
  hat->resize(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    (*hat)[i] = (x[i] - mean) * istd;
    out[i] = (*hat)[i] * gamma[i] + beta[i];
  }
  *istd_out = istd;
  return out;
}

// dL/dx of LayerNorm from dL/dy, the saved normalized input and 1/std.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> layer_norm_backward(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dy,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& hat, Scalar istd,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& gamma) {
  const Eigen::Index n = dy.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dhat(n);
  Scalar mean_dhat = Scalar(0);
  Scalar mean_dhat_hat = Scalar(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    dhat[i] = dy[i] * gamma[i];
    mean_dhat += dhat[i];
    mean_dhat_hat += dhat[i] * hat[i];
  }
  mean_dhat /= Scalar(n);
  mean_dhat_hat /= Scalar(n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dx(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dx[i] = istd * (dhat[i] - mean_dhat - hat[i] * mean_dhat_hat);
  }
  return dx;
}

template <typename Scalar>
Scalar gelu_grad(Scalar x) {
  Scalar cdf = Scalar(0.5) * (Scalar(1) + std::erf(x * Scalar(M_SQRT1_2)));
  Scalar pdf = std::exp(Scalar(-0.5) * x * x) * Scalar(0.3989422804014327);
  return cdf + x * pdf;
}

// Full-sequence forward keeping every intermediate needed by backward.
template <typename Scalar>
Trace<Scalar> traced_forward(const ModelState<Scalar>& st,
                             const std::vector<TokenSlot<Scalar>>& slots,
                             const AttnMask* attn_mask) {
  using Mat = typename Trace<Scalar>::Mat;
  using Vec = typename Trace<Scalar>::Vec;
  const ModelConfig& cfg = st.config;
  const int n = static_cast<int>(slots.size());
  const int d = cfg.head_dim();
  const Scalar inv_sqrt_d = Scalar(1) / std::sqrt(Scalar(d));
  if (attn_mask != nullptr) {
    check_contract(attn_mask->rows() == n && attn_mask->cols() == n,
                   "traced_forward: mask shape mismatch");
  }

  Trace<Scalar> tr;
  tr.layers.resize(static_cast<size_t>(cfg.layers));
  Mat x(cfg.width, n);
  for (int p = 0; p < n; ++p) x.col(p) = embed_slot(st, slots[static_cast<size_t>(p)]);

  for (int l = 0; l < cfg.layers; ++l) {
    LayerTrace<Scalar>& L = tr.layers[static_cast<size_t>(l)];
    const std::string pre = "l" + std::to_string(l) + ".";
    const Vec ln1g = st.mat(pre + "ln1.g").col(0);
    const Vec ln1b = st.mat(pre + "ln1.b").col(0);
    const auto wq = st.mat(pre + "wq");
    const auto wk = st.mat(pre + "wk");
    const auto wv = st.mat(pre + "wv");
    const auto wo = st.mat(pre + "wo");
    const Vec bq = st.mat(pre + "bq").col(0);
    const Vec bk = st.mat(pre + "bk").col(0);
    const Vec bv = st.mat(pre + "bv").col(0);
    const Vec bo = st.mat(pre + "bo").col(0);

    L.x_in = x;
    L.ln1_hat.resize(cfg.width, n);
    L.ln1_istd.resize(n);
    L.q.resize(cfg.width, n);
    L.k.resize(cfg.width, n);
    L.v.resize(cfg.width, n);
    for (int p = 0; p < n; ++p) {
      Vec hat;
      Scalar istd;
      Vec a = layer_norm_traced<Scalar>(x.col(p), ln1g, ln1b, &hat, &istd);
      L.ln1_hat.col(p) = hat;
      L.ln1_istd[p] = istd;
      L.q.col(p) = wq * a + bq;
      L.k.col(p) = wk * a + bk;
      L.v.col(p) = wv * a + bv;
    }

    L.attn_p.assign(static_cast<size_t>(cfg.heads), Mat::Zero(n, n));
    L.attn_mix.resize(cfg.width, n);
    std::vector<Scalar> buf(static_cast<size_t>(n));
    for (int p = 0; p < n; ++p) {
      for (int h = 0; h < cfg.heads; ++h) {
        const int hb = h * d;
        Scalar maxs = -std::numeric_limits<Scalar>::infinity();
        for (int j = 0; j < n; ++j) {
          if (attn_mask != nullptr && (*attn_mask)(p, j) == 0) continue;
          Scalar s = L.q.col(p).segment(hb, d).dot(L.k.col(j).segment(hb, d)) *
                     inv_sqrt_d;
          buf[static_cast<size_t>(j)] = s;
          if (s > maxs) maxs = s;
        }
        check_contract(maxs > -std::numeric_limits<Scalar>::infinity(),
                       "traced_forward: query with no visible key");
        Scalar sum = Scalar(0);
        for (int j = 0; j < n; ++j) {
          if (attn_mask != nullptr && (*attn_mask)(p, j) == 0) continue;
          Scalar e = std::exp(buf[static_cast<size_t>(j)] - maxs);
          buf[static_cast<size_t>(j)] = e;
          sum += e;
        }
        const Scalar inv_sum = Scalar(1) / sum;
        auto out = L.attn_mix.col(p).segment(hb, d);
        out.setZero();
        for (int j = 0; j < n; ++j) {
          if (attn_mask != nullptr && (*attn_mask)(p, j) == 0) continue;
          Scalar w = buf[static_cast<size_t>(j)] * inv_sum;
          L.attn_p[static_cast<size_t>(h)](p, j) = w;
          out += w * L.v.col(j).segment(hb, d);
        }
      }
    }
    for (int p = 0; p < n; ++p) x.col(p) += wo * L.attn_mix.col(p) + bo;

    const Vec ln2g = st.mat(pre + "ln2.g").col(0);
    const Vec ln2b = st.mat(pre + "ln2.b").col(0);
    const auto w1 = st.mat(pre + "w1");
    const Vec b1 = st.mat(pre + "b1").col(0);
    const auto w2 = st.mat(pre + "w2");
    const Vec b2 = st.mat(pre + "b2").col(0);
    L.ln2_hat.resize(cfg.width, n);
    L.ln2_istd.resize(n);
    L.mlp_pre.resize(cfg.mlp_hidden, n);
    L.mlp_act.resize(cfg.mlp_hidden, n);
    for (int p = 0; p < n; ++p) {
      Vec hat;
      Scalar istd;
      Vec a = layer_norm_traced<Scalar>(x.col(p), ln2g, ln2b, &hat, &istd);
      L.ln2_hat.col(p) = hat;
      L.ln2_istd[p] = istd;
      Vec h = w1 * a + b1;
      L.mlp_pre.col(p) = h;
      for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = gelu(h[i]);
      L.mlp_act.col(p) = h;
      x.col(p) += w2 * h + b2;
    }
  }

  const Vec lnfg = st.mat("lnf.g").col(0);
  const Vec lnfb = st.mat("lnf.b").col(0);
  const auto hw = st.mat("head.w");
  const Vec hb = st.mat("head.b").col(0);
  tr.lnf_hat.resize(cfg.width, n);
  tr.lnf_istd.resize(n);
  tr.head_raw.resize(cfg.head_out(), n);
  for (int p = 0; p < n; ++p) {
    Vec hat;
    Scalar istd;
    layer_norm_traced<Scalar>(x.col(p), lnfg, lnfb, &hat, &istd);
    tr.lnf_hat.col(p) = hat;
    tr.lnf_istd[p] = istd;
    tr.head_raw.col(p) =
        hw * (hat.cwiseProduct(lnfg) + lnfb) + hb;
  }
  return tr;
}

// NLL in bits of `target` under one head output column, plus the gradient
// with respect to that column. Raw layout per channel: n_mix means, n_mix
// pre-softplus scales, n_mix weight logits.
template <typename Scalar>
double head_nll_and_grad(const ModelConfig& cfg,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& raw,
                         const Eigen::VectorXd& target,
                         Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* draw) {
  const int m = cfg.n_mix;
  double bits = 0.0;
  draw->setZero(raw.size());
  for (int ch = 0; ch < cfg.channels; ++ch) {
    const int base = 3 * m * ch;
    GmmChannel view;
    view.mean.resize(m);
    view.scale.resize(m);
    view.weight.resize(m);
    Eigen::ArrayXd sig_grad(m);  // d sigma / d raw-scale
    double maxl = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      maxl = std::max(maxl, static_cast<double>(raw[base + 2 * m + k]));
    }
    double lsum = 0.0;
    for (int k = 0; k < m; ++k) {
      view.mean[k] = static_cast<double>(raw[base + k]);
      double r = static_cast<double>(raw[base + m + k]);
      double sp = r > 20.0 ? r : std::log1p(std::exp(r));
      double sig = kSigmaMin + sp;
      if (sig >= kSigmaMax) {
        sig = kSigmaMax;
        sig_grad[k] = 0.0;
      } else {
        sig_grad[k] = 1.0 / (1.0 + std::exp(-r));
      }
      view.scale[k] = sig;
      double e = std::exp(static_cast<double>(raw[base + 2 * m + k]) - maxl);
      view.weight[k] = e;
      lsum += e;
    }
    for (int k = 0; k < m; ++k) view.weight[k] /= lsum;

    BinPmfGrad g = bin_pmf_grad(view, target[ch]);
    double p = g.p;
    if (p < 1e-300) {
      bits += -std::log2(1e-300);
      continue;  // flat floor, no useful gradient
    }
    bits += -std::log2(p);
    const double dldp = -1.0 / (p * M_LN2);
    for (int k = 0; k < m; ++k) {
      (*draw)[base + k] += static_cast<Scalar>(dldp * g.d_mean[k]);
      (*draw)[base + m + k] +=
          static_cast<Scalar>(dldp * g.d_scale[k] * sig_grad[k]);
    }
    for (int j = 0; j < m; ++j) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) {
        double jac = view.weight[k] * ((k == j ? 1.0 : 0.0) - view.weight[j]);
        acc += g.d_weight[k] * jac;
      }
      (*draw)[base + 2 * m + j] += static_cast<Scalar>(dldp * acc);
    }
  }
  return bits;
}

}  // namespace detail

// Total bits over a batch of items, plus (when grad != null) the gradient
// of that total with respect to the flat parameter vector. The attention
// mask applies to every item; null means unmasked (MT training).
template <typename Scalar>
double loss_and_grad(const ModelState<Scalar>& st,
                     const std::vector<TrainItem<Scalar>>& items,
                     const AttnMask* attn_mask,
                     Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* grad) {
  using Mat = typename ModelState<Scalar>::Mat;
  using Vec = typename ModelState<Scalar>::Vec;
  const ModelConfig& cfg = st.config;
  const int d = cfg.head_dim();
  const Scalar inv_sqrt_d = Scalar(1) / std::sqrt(Scalar(d));
  if (grad != nullptr) grad->setZero(static_cast<Eigen::Index>(st.layout.size()));

  auto gmat = [&](const std::string& name) {
    const TensorSpec& s = st.layout.spec(name);
    return typename ModelState<Scalar>::MapMat(grad->data() + s.offset, s.rows,
                                               s.cols);
  };

  double total_bits = 0.0;
  for (const TrainItem<Scalar>& item : items) {
    const int n = static_cast<int>(item.slots.size());
    detail::Trace<Scalar> tr = detail::traced_forward(st, item.slots, attn_mask);

    Mat dhead = Mat::Zero(cfg.head_out(), n);
    Vec draw(cfg.head_out());
    for (int p : item.loss_slots) {
      Vec raw = tr.head_raw.col(p);
      total_bits += detail::head_nll_and_grad(cfg, raw, item.targets.col(p), &draw);
      dhead.col(p) = draw;
    }
    if (grad == nullptr) continue;

    // Head and final LayerNorm backward.
    const auto hw = st.mat("head.w");
    const Vec lnfg = st.mat("lnf.g").col(0);
    const Vec lnfb = st.mat("lnf.b").col(0);
    Mat dx = Mat::Zero(cfg.width, n);
    {
      auto d_hw = gmat("head.w");
      auto d_hb = gmat("head.b");
      auto d_lnfg = gmat("lnf.g");
      auto d_lnfb = gmat("lnf.b");
      for (int p : item.loss_slots) {
        Vec dcol = dhead.col(p);
        Vec lnf_out = tr.lnf_hat.col(p).cwiseProduct(lnfg) + lnfb;
        d_hw += dcol * lnf_out.transpose();
        d_hb.col(0) += dcol;
        Vec da = hw.transpose() * dcol;
        d_lnfg.col(0) += da.cwiseProduct(tr.lnf_hat.col(p));
        d_lnfb.col(0) += da;
        dx.col(p) = detail::layer_norm_backward<Scalar>(da, tr.lnf_hat.col(p),
                                                        tr.lnf_istd[p], lnfg);
      }
    }

    for (int l = cfg.layers - 1; l >= 0; --l) {
      const detail::LayerTrace<Scalar>& L = tr.layers[static_cast<size_t>(l)];
      const std::string pre = "l" + std::to_string(l) + ".";

      // MLP sub-block: x_out = x_mid + W2 gelu(W1 LN2(x_mid) + b1) + b2.
      // dx currently holds dL/dx_out; afterwards it holds dL/dx_mid.
      {
        const auto w1 = st.mat(pre + "w1");
        const auto w2 = st.mat(pre + "w2");
        const Vec ln2g = st.mat(pre + "ln2.g").col(0);
        const Vec ln2b = st.mat(pre + "ln2.b").col(0);
        auto d_w1 = gmat(pre + "w1");
        auto d_b1 = gmat(pre + "b1");
        auto d_w2 = gmat(pre + "w2");
        auto d_b2 = gmat(pre + "b2");
        auto d_ln2g = gmat(pre + "ln2.g");
        auto d_ln2b = gmat(pre + "ln2.b");
        for (int p = 0; p < n; ++p) {
          Vec dcol = dx.col(p);
          d_w2 += dcol * L.mlp_act.col(p).transpose();
          d_b2.col(0) += dcol;
          Vec dact = w2.transpose() * dcol;
          Vec dpre(cfg.mlp_hidden);
          for (int i = 0; i < cfg.mlp_hidden; ++i) {
            dpre[i] = dact[i] * detail::gelu_grad(L.mlp_pre(i, p));
          }
          Vec ln2_out = L.ln2_hat.col(p).cwiseProduct(ln2g) + ln2b;
          d_w1 += dpre * ln2_out.transpose();
          d_b1.col(0) += dpre;
          Vec da = w1.transpose() * dpre;
          d_ln2g.col(0) += da.cwiseProduct(L.ln2_hat.col(p));
          d_ln2b.col(0) += da;
          dx.col(p) += detail::layer_norm_backward<Scalar>(
              da, L.ln2_hat.col(p), L.ln2_istd[p], ln2g);
        }
      }

      // Attention sub-block: x_mid = x_in + Wo mix + bo. dx holds
      // dL/dx_mid; afterwards it holds dL/dx_in.
      {
        const auto wo = st.mat(pre + "wo");
        const auto wq = st.mat(pre + "wq");
        const auto wk = st.mat(pre + "wk");
        const auto wv = st.mat(pre + "wv");
        const Vec ln1g = st.mat(pre + "ln1.g").col(0);
        const Vec ln1b = st.mat(pre + "ln1.b").col(0);
        auto d_wo = gmat(pre + "wo");
        auto d_bo = gmat(pre + "bo");
        auto d_wq = gmat(pre + "wq");
        auto d_bq = gmat(pre + "bq");
        auto d_wk = gmat(pre + "wk");
        auto d_bk = gmat(pre + "bk");
        auto d_wv = gmat(pre + "wv");
        auto d_bv = gmat(pre + "bv");
        auto d_ln1g = gmat(pre + "ln1.g");
        auto d_ln1b = gmat(pre + "ln1.b");

        Mat dmix(cfg.width, n);
        for (int p = 0; p < n; ++p) {
          Vec dcol = dx.col(p);
          d_wo += dcol * L.attn_mix.col(p).transpose();
          d_bo.col(0) += dcol;
          dmix.col(p) = wo.transpose() * dcol;
        }

        Mat dq = Mat::Zero(cfg.width, n);
        Mat dk = Mat::Zero(cfg.width, n);
        Mat dv = Mat::Zero(cfg.width, n);
        std::vector<Scalar> dp_buf(static_cast<size_t>(n));
        for (int h = 0; h < cfg.heads; ++h) {
          const int hb = h * d;
          const Mat& P = L.attn_p[static_cast<size_t>(h)];
          for (int p = 0; p < n; ++p) {
            Scalar dot_pd = Scalar(0);
            for (int j = 0; j < n; ++j) {
              Scalar pj = P(p, j);
              if (pj == Scalar(0)) continue;
              Scalar dpj =
                  dmix.col(p).segment(hb, d).dot(L.v.col(j).segment(hb, d));
              dp_buf[static_cast<size_t>(j)] = dpj;
              dot_pd += pj * dpj;
            }
            for (int j = 0; j < n; ++j) {
              Scalar pj = P(p, j);
              if (pj == Scalar(0)) continue;
              Scalar ds = pj * (dp_buf[static_cast<size_t>(j)] - dot_pd);
              dq.col(p).segment(hb, d) +=
                  ds * inv_sqrt_d * L.k.col(j).segment(hb, d);
              dk.col(j).segment(hb, d) +=
                  ds * inv_sqrt_d * L.q.col(p).segment(hb, d);
              dv.col(j).segment(hb, d) += pj * dmix.col(p).segment(hb, d);
            }
          }
        }

        for (int p = 0; p < n; ++p) {
          Vec ln1_out = L.ln1_hat.col(p).cwiseProduct(ln1g) + ln1b;
          d_wq += dq.col(p) * ln1_out.transpose();
          d_bq.col(0) += dq.col(p);
          d_wk += dk.col(p) * ln1_out.transpose();
          d_bk.col(0) += dk.col(p);
          d_wv += dv.col(p) * ln1_out.transpose();
          d_bv.col(0) += dv.col(p);
          Vec da = wq.transpose() * dq.col(p) + wk.transpose() * dk.col(p) +
                   wv.transpose() * dv.col(p);
          d_ln1g.col(0) += da.cwiseProduct(L.ln1_hat.col(p));
          d_ln1b.col(0) += da;
          dx.col(p) += detail::layer_norm_backward<Scalar>(
              da, L.ln1_hat.col(p), L.ln1_istd[p], ln1g);
        }
      }
    }

    // Embedding backward.
    {
      auto d_embed_w = gmat("embed.w");
      auto d_embed_b = gmat("embed.b");
      auto d_mask = gmat("mask");
      auto d_pos = gmat("pos");
      for (int p = 0; p < n; ++p) {
        const TokenSlot<Scalar>& slot = item.slots[static_cast<size_t>(p)];
        Vec dcol = dx.col(p);
        d_pos.col(slot.pos_index) += dcol;
        if (slot.present) {
          Vec scaled = slot.value / static_cast<Scalar>(cfg.delta);
          d_embed_w += dcol * scaled.transpose();
          d_embed_b.col(0) += dcol;
        } else {
          d_mask.col(0) += dcol;
        }
      }
    }
  }
  return total_bits;
}

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamOptimizer {
 public:
  explicit AdamOptimizer(size_t n, AdamOptions opt = AdamOptions())
      : opt_(opt), m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))),
        v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

  template <typename Scalar>
  void step(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params,
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      double g = static_cast<double>(grad[i]);
      m_[i] = opt_.beta1 * m_[i] + (1.0 - opt_.beta1) * g;
      v_[i] = opt_.beta2 * v_[i] + (1.0 - opt_.beta2) * g * g;
      double update = lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + opt_.eps);
      params[i] -= static_cast<Scalar>(update);
    }
  }

 private:
  AdamOptions opt_;
  Eigen::VectorXd m_, v_;
  int64_t t_ = 0;
};

// Samples ~50 parameter coordinates and compares analytic gradients against
// central finite differences of the loss closure. Returns the max relative
// error. The closure must be deterministic in the parameters.
template <typename Scalar>
double grad_check(ModelState<Scalar>& st,
                  const std::function<double(const ModelState<Scalar>&,
                                             Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*)>& loss,
                  double eps, int n_probes, uint64_t seed) {
  using Vec = typename ModelState<Scalar>::Vec;
  Vec analytic(st.params.size());
  loss(st, &analytic);

  SplitMix64 rng(seed);
  double max_rel = 0.0;
  for (int probe = 0; probe < n_probes; ++probe) {
    Eigen::Index i = static_cast<Eigen::Index>(
        rng.next_below(static_cast<uint64_t>(st.params.size())));
    Scalar saved = st.params[i];
    st.params[i] = saved + static_cast<Scalar>(eps);
    double up = loss(st, nullptr);
    st.params[i] = saved - static_cast<Scalar>(eps);
    double down = loss(st, nullptr);
    st.params[i] = saved;
    double numeric = (up - down) / (2.0 * eps);
    double a = static_cast<double>(analytic[i]);
    double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::abs(a - numeric) / denom);
  }
  return max_rel;
}

}  // namespace m2t

#endif  // M2T_NET_TRAIN_HPP_
