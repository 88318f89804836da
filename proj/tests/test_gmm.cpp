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

#include "m2t/gmm.hpp"

#include <cmath>

#include "doctest.h"
#include "m2t/rng.hpp"

namespace {

m2t::GmmChannel make_channel(std::initializer_list<double> means,
                             std::initializer_list<double> scales,
                             std::initializer_list<double> weights) {
  m2t::GmmChannel ch;
  ch.mean = Eigen::Map<const Eigen::ArrayXd>(means.begin(),
                                             static_cast<long>(means.size()));
  ch.scale = Eigen::Map<const Eigen::ArrayXd>(scales.begin(),
                                              static_cast<long>(scales.size()));
  ch.weight = Eigen::Map<const Eigen::ArrayXd>(
      weights.begin(), static_cast<long>(weights.size()));
  return ch;
}

m2t::GmmChannel random_channel(m2t::SplitMix64& rng) {
  m2t::GmmChannel ch;
  ch.mean.resize(3);
  ch.scale.resize(3);
  ch.weight.resize(3);
  double wsum = 0.0;
  for (int k = 0; k < 3; ++k) {
    ch.mean[k] = rng.next_uniform(-4.0, 4.0);
    ch.scale[k] = std::exp(rng.next_uniform(std::log(0.05), std::log(4.0)));
    ch.weight[k] = rng.next_uniform(0.05, 1.0);
    wsum += ch.weight[k];
  }
  ch.weight /= wsum;
  return ch;
}

// Simpson-rule quadrature of the blended density over one unit bin; an
// independent route to the bin mass that never touches the CDF code.
double bin_mass_quadrature(const m2t::GmmChannel& ch, double y) {
  const int steps = 400;
  const double a = y - 0.5;
  const double h = 1.0 / steps;
  const double loc = ch.laplace_location();
  auto density = [&](double x) {
    double g = 0.0;
    for (int k = 0; k < ch.mean.size(); ++k) {
      double z = (x - ch.mean[k]) / ch.scale[k];
      g += ch.weight[k] * m2t::normal_pdf(z) / ch.scale[k];
    }
    return (1.0 - m2t::kTailEps) * g +
           m2t::kTailEps * m2t::laplace_pdf(x, loc);
  };
  double acc = density(a) + density(a + 1.0);
  for (int i = 1; i < steps; ++i) {
    acc += density(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("gmm_cdf saturates, halves, and balances") {
  m2t::GmmChannel single = make_channel({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                                        {1.0, 0.0, 0.0});
  CHECK(m2t::gmm_cdf(single, 1e9) == doctest::Approx(1.0));
  CHECK(m2t::gmm_cdf(single, 0.0) == doctest::Approx(0.5));
  m2t::GmmChannel sym = make_channel({-1.0, 1.0, 0.0}, {1.0, 1.0, 1.0},
                                     {0.5, 0.5, 0.0});
  CHECK(m2t::gmm_cdf(sym, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("gmm_cdf is monotone non-decreasing") {
  m2t::SplitMix64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    m2t::GmmChannel ch = random_channel(rng);
    double a = rng.next_uniform(-12.0, 12.0);
    double b = rng.next_uniform(-12.0, 12.0);
    if (a > b) std::swap(a, b);
    CHECK(m2t::gmm_cdf(ch, b) >= m2t::gmm_cdf(ch, a));
  }
}

TEST_CASE("bin_pmf standard normal at zero") {
  // erf oracle: (1-eps) * (Phi(1/2) - Phi(-1/2)) + eps * (1 - exp(-1/2)).
  m2t::GmmChannel ch = make_channel({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                                    {1.0, 0.0, 0.0});
  double gauss = std::erf(0.5 / std::sqrt(2.0));
  double lap = 1.0 - std::exp(-0.5);
  double expected = (1.0 - m2t::kTailEps) * gauss + m2t::kTailEps * lap;
  CHECK(expected == doctest::Approx(0.3829).epsilon(1e-3));
  CHECK(m2t::bin_pmf(ch, 0.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bin_pmf is symmetric for symmetric parameters") {
  m2t::GmmChannel ch = make_channel({-2.0, 2.0, 0.0}, {0.7, 0.7, 1.3},
                                    {0.3, 0.3, 0.4});
  for (int y = 0; y <= 8; ++y) {
    CHECK(m2t::bin_pmf(ch, y) == doctest::Approx(m2t::bin_pmf(ch, -y)).epsilon(1e-12));
  }
}

TEST_CASE("bin_pmf near-deterministic limit") {
  m2t::GmmChannel ch = make_channel({0.0, 0.0, 0.0},
                                    {m2t::kSigmaMin, m2t::kSigmaMin, m2t::kSigmaMin},
                                    {1.0, 0.0, 0.0});
  double lap0 = 1.0 - std::exp(-0.5);
  double expected = 1.0 - m2t::kTailEps * (1.0 - lap0);
  CHECK(m2t::bin_pmf(ch, 0.0) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("bin_pmf agrees with quadrature oracle") {
  m2t::SplitMix64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    m2t::GmmChannel ch = random_channel(rng);
    for (int y = -3; y <= 3; ++y) {
      double want = bin_mass_quadrature(ch, y);
      CHECK(m2t::bin_pmf(ch, y) == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("bin_pmf sums close to one over a wide support") {
  m2t::SplitMix64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    m2t::GmmChannel ch = random_channel(rng);
    double reach = 0.0;
    for (int k = 0; k < 3; ++k) {
      reach = std::max(reach, std::abs(ch.mean[k]) + 8.0 * ch.scale[k]);
    }
    int lim = static_cast<int>(std::ceil(reach)) + 1;
    CHECK(m2t::bin_pmf_range(ch, -lim, lim).sum() >= 1.0 - 1e-4);
  }
}

TEST_CASE("quantize_pmf uniform and skewed examples") {
  Eigen::VectorXd uniform(4);
  uniform << 0.25, 0.25, 0.25, 0.25;
  std::vector<uint32_t> f = m2t::quantize_pmf(uniform, 8);
  CHECK(f == std::vector<uint32_t>{64, 64, 64, 64});

  Eigen::VectorXd skew(2);
  skew << 0.999, 0.001;
  f = m2t::quantize_pmf(skew, 8);
  CHECK(f == std::vector<uint32_t>{255, 1});
}

TEST_CASE("quantize_pmf totals and floors") {
  m2t::SplitMix64 rng(14);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.next_below(40));
    int precision = 8 + static_cast<int>(rng.next_below(9));
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = rng.next_unit() < 0.2 ? 0.0 : rng.next_unit();
    std::vector<uint32_t> freq = m2t::quantize_pmf(p, precision);
    uint64_t total = 0;
    for (uint32_t x : freq) {
      CHECK(x >= 1);
      total += x;
    }
    CHECK(total == (1ull << precision));
  }
  Eigen::VectorXd too_big = Eigen::VectorXd::Constant(300, 1.0 / 300);
  CHECK_THROWS_AS(m2t::quantize_pmf(too_big, 8), m2t::ContractError);
}

TEST_CASE("coding cost tracks NLL for probable symbols") {
  // Largest-remainder apportionment keeps |freq - p*2^prec| <= ~1 plus a
  // <=(n/2^prec) renormalization share, so the bit gap stays under 0.02
  // once p*2^prec is at least ~2^7. Below that, integer rounding alone can
  // move the cost by ~log2(1 +- 1/(p*2^prec)), so no such bound can hold.
  m2t::SplitMix64 rng(15);
  for (int trial = 0; trial < 50; ++trial) {
    m2t::GmmChannel ch = random_channel(rng);
    int precision = trial % 2 == 0 ? 16 : 12;
    Eigen::VectorXd probs = m2t::bin_pmf_range(ch, -16, 16);
    std::vector<uint32_t> freq = m2t::quantize_pmf(probs, precision);
    for (int i = 0; i < probs.size(); ++i) {
      if (probs[i] < std::pow(2.0, -(precision - 7))) continue;
      double bits_coded = -std::log2(static_cast<double>(freq[static_cast<size_t>(i)]) /
                                     (1 << precision));
      double bits_nll = -std::log2(probs[i]);
      CHECK(std::abs(bits_coded - bits_nll) <= 0.02);
    }
  }
}

TEST_CASE("channel entropy of unit gaussian on support [-8,8]") {
  m2t::GmmChannel ch = make_channel({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0},
                                    {1.0, 0.0, 0.0});
  // Quadrature oracle: entropy of the binned blend, bins integrated by
  // Simpson rule rather than the CDF path.
  double h = 0.0;
  for (int y = -8; y <= 8; ++y) {
    double p = bin_mass_quadrature(ch, y);
    h -= p * std::log2(p);
  }
  CHECK(h == doctest::Approx(2.10).epsilon(0.01));
  CHECK(m2t::channel_entropy(ch, -8, 8) == doctest::Approx(h).epsilon(1e-6));
}

TEST_CASE("token entropy adds over channels and vanishes when deterministic") {
  m2t::GmmToken<double> t;
  t.mean.setZero(3, 3);
  t.scale = Eigen::MatrixXd::Constant(3, 3, 1.0);
  t.weight = Eigen::MatrixXd::Constant(3, 3, 1.0 / 3.0);
  double three = m2t::token_entropy(t, -8, 8);
  double one = m2t::channel_entropy(m2t::GmmChannel::from(t, 0), -8, 8);
  CHECK(three == doctest::Approx(3.0 * one).epsilon(1e-12));

  m2t::GmmToken<double> sharp;
  sharp.mean.setZero(1, 3);
  sharp.scale = Eigen::MatrixXd::Constant(1, 3, m2t::kSigmaMin);
  sharp.weight = Eigen::MatrixXd::Constant(1, 3, 1.0 / 3.0);
  CHECK(m2t::token_entropy(sharp, -8, 8) < 0.05);
}

TEST_CASE("bin_pmf_grad matches finite differences") {
  m2t::SplitMix64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    m2t::GmmChannel ch = random_channel(rng);
    double y = static_cast<double>(static_cast<int>(rng.next_below(9)) - 4);
    m2t::BinPmfGrad g = m2t::bin_pmf_grad(ch, y);
    CHECK(g.p == doctest::Approx(m2t::bin_pmf(ch, y)).epsilon(1e-12));
    const double eps = 1e-6;
    for (int k = 0; k < 3; ++k) {
      m2t::GmmChannel up = ch, dn = ch;
      up.mean[k] += eps;
      dn.mean[k] -= eps;
      double num = (m2t::bin_pmf(up, y) - m2t::bin_pmf(dn, y)) / (2 * eps);
      CHECK(g.d_mean[k] == doctest::Approx(num).epsilon(1e-4));

      up = ch;
      dn = ch;
      up.scale[k] += eps;
      dn.scale[k] -= eps;
      num = (m2t::bin_pmf(up, y) - m2t::bin_pmf(dn, y)) / (2 * eps);
      CHECK(g.d_scale[k] == doctest::Approx(num).epsilon(1e-4));

      up = ch;
      dn = ch;
      up.weight[k] += eps;
      dn.weight[k] -= eps;
      num = (m2t::bin_pmf(up, y) - m2t::bin_pmf(dn, y)) / (2 * eps);
      CHECK(g.d_weight[k] == doctest::Approx(num).epsilon(1e-4));
    }
  }
}
