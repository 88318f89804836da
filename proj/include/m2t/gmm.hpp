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

#ifndef M2T_GMM_HPP_
#define M2T_GMM_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <vector>

#include "m2t/errors.hpp"

namespace m2t {

// Mixture bounds. Scales are produced through sigma_min + softplus(raw),
// capped at sigma_max; the floor keeps quantized PMFs away from degenerate
// single-bin spikes.
constexpr double kSigmaMin = 0.01;
constexpr double kSigmaMax = 256.0;

// Weight of the unit-scale Laplace blended into every binned PMF. The blend
// dominates exactly where the Gaussian mass underflows, which keeps extreme
// symbols codable.
constexpr double kTailEps = 1e-3;

// Mixture parameters of a single token: per channel a mean, a scale and a
// simplex weight for each of n_mix components.
template <typename Scalar>
struct GmmToken {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat mean;    // c x n_mix
  Mat scale;   // c x n_mix, each in [kSigmaMin, kSigmaMax]
  Mat weight;  // c x n_mix, rows on the simplex

  int channels() const { return static_cast<int>(mean.rows()); }
  int n_mix() const { return static_cast<int>(mean.cols()); }
};

// Double-precision view of one channel; all likelihood math runs in double
// regardless of the model scalar so encoder and decoder agree bit-exactly.
struct GmmChannel {
  Eigen::ArrayXd mean, scale, weight;

  template <typename Scalar>
  static GmmChannel from(const GmmToken<Scalar>& t, int ch) {
    GmmChannel v;
    v.mean = t.mean.row(ch).template cast<double>().transpose().array();
    v.scale = t.scale.row(ch).template cast<double>().transpose().array();
    v.weight = t.weight.row(ch).template cast<double>().transpose().array();
    return v;
  }

  double laplace_location() const { return (weight * mean).sum(); }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.3989422804014327;
}

// CDF of a unit-scale Laplace centered at mu.
inline double laplace_cdf(double x, double mu) {
  double d = x - mu;
  return d < 0.0 ? 0.5 * std::exp(d) : 1.0 - 0.5 * std::exp(-d);
}
inline double laplace_pdf(double x, double mu) {
  return 0.5 * std::exp(-std::abs(x - mu));
}

// Mixture CDF: sum_k w_k * Phi((x - mu_k) / sigma_k).
inline double gmm_cdf(const GmmChannel& ch, double x) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < ch.mean.size(); ++k) {
    acc += ch.weight[k] * normal_cdf((x - ch.mean[k]) / ch.scale[k]);
  }
  return acc;
}

// Probability mass of the unit bin around y (y need not be an integer: the
// training loss evaluates it at noisy targets).
inline double bin_pmf(const GmmChannel& ch, double y) {
  double g = gmm_cdf(ch, y + 0.5) - gmm_cdf(ch, y - 0.5);
  double m = ch.laplace_location();
  double l = laplace_cdf(y + 0.5, m) - laplace_cdf(y - 0.5, m);
  return (1.0 - kTailEps) * g + kTailEps * l;
}

// Binned PMF over the inclusive symbol range [lo, hi], sharing CDF
// evaluations between adjacent bin edges.
inline Eigen::VectorXd bin_pmf_range(const GmmChannel& ch, int lo, int hi) {
  check_contract(lo <= hi, "bin_pmf_range: empty support");
  const int n = hi - lo + 1;
  const double m = ch.laplace_location();
  Eigen::VectorXd probs(n);
  double prev_g = gmm_cdf(ch, lo - 0.5);
  double prev_l = laplace_cdf(lo - 0.5, m);
  for (int i = 0; i < n; ++i) {
    double edge = lo + i + 0.5;
    double g = gmm_cdf(ch, edge);
    double l = laplace_cdf(edge, m);
    probs[i] = (1.0 - kTailEps) * (g - prev_g) + kTailEps * (l - prev_l);
    prev_g = g;
    prev_l = l;
  }
  return probs;
}

// Entropy in bits of one channel's binned PMF over [lo, hi].
inline double channel_entropy(const GmmChannel& ch, int lo, int hi) {
  Eigen::VectorXd p = bin_pmf_range(ch, lo, hi);
  double h = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
  }
  return h;
}

// Entropy of a whole token: channels are modeled independently, so the
// token entropy is the sum over channels.
template <typename Scalar>
double token_entropy(const GmmToken<Scalar>& t, int lo, int hi) {
  double h = 0.0;
  for (int ch = 0; ch < t.channels(); ++ch) {
    h += channel_entropy(GmmChannel::from(t, ch), lo, hi);
  }
  return h;
}

// NLL in bits of symbol y under one channel, floored away from log(0).
inline double nll_bits(const GmmChannel& ch, double y) {
  double p = bin_pmf(ch, y);
  if (p < 1e-300) p = 1e-300;
  return -std::log2(p);
}

// Partial derivatives of bin_pmf(ch, y) with respect to the channel's
// means, scales and (simplex) weights. The Laplace location is the weighted
// mean, so means and weights pick up a tail term as well.
struct BinPmfGrad {
  double p = 0.0;
  Eigen::ArrayXd d_mean, d_scale, d_weight;
};

inline BinPmfGrad bin_pmf_grad(const GmmChannel& ch, double y) {
  const Eigen::Index k = ch.mean.size();
  BinPmfGrad g;
  g.d_mean = Eigen::ArrayXd::Zero(k);
  g.d_scale = Eigen::ArrayXd::Zero(k);
  g.d_weight = Eigen::ArrayXd::Zero(k);

  const double m = ch.laplace_location();
  const double lap_hi = laplace_cdf(y + 0.5, m);
  const double lap_lo = laplace_cdf(y - 0.5, m);
  const double lap_mass = lap_hi - lap_lo;
  // d(lap_mass)/dm
  const double d_lap_dm = -(laplace_pdf(y + 0.5, m) - laplace_pdf(y - 0.5, m));

  double gmm_mass = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double s = ch.scale[i];
    const double a_hi = (y + 0.5 - ch.mean[i]) / s;
    const double a_lo = (y - 0.5 - ch.mean[i]) / s;
    const double mass_i = normal_cdf(a_hi) - normal_cdf(a_lo);
    const double pdf_hi = normal_pdf(a_hi);
    const double pdf_lo = normal_pdf(a_lo);
    gmm_mass += ch.weight[i] * mass_i;
    g.d_mean[i] = (1.0 - kTailEps) * ch.weight[i] * (pdf_lo - pdf_hi) / s +
                  kTailEps * d_lap_dm * ch.weight[i];
    g.d_scale[i] =
        (1.0 - kTailEps) * ch.weight[i] * (a_lo * pdf_lo - a_hi * pdf_hi) / s;
    g.d_weight[i] =
        (1.0 - kTailEps) * mass_i + kTailEps * d_lap_dm * ch.mean[i];
  }
  g.p = (1.0 - kTailEps) * gmm_mass + kTailEps * lap_mass;
  return g;
}

// Integer frequency table for the range coder: every entry >= 1, exact sum
// 2^precision_bits, obtained by giving each bin one count and apportioning
// the remainder proportionally with largest-remainder rounding (ties broken
// by lower index). Throws ContractError if there are more bins than counts.
std::vector<uint32_t> quantize_pmf(const Eigen::VectorXd& probs,
                                   int precision_bits);

}  // namespace m2t

#endif  // M2T_GMM_HPP_
