// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "support/oracles.hpp"
#include "thzris/channel.hpp"
#include "thzris/random.hpp"

using namespace thzris;
namespace refv = oracle::reference;

TEST(LinkBudget, ReferenceScenarioAgainstScriptedValues) {
  const auto b = derive_link_budget(SystemConfig{});
  EXPECT_NEAR(b.eta_d, refv::eta_d, 1e-12 * refv::eta_d);
  EXPECT_NEAR(b.eta_r, refv::eta_r, 1e-12 * refv::eta_r);
  EXPECT_NEAR(20.0 * std::log10(b.eta_d), refv::eta_d2_db, 1e-10);
  EXPECT_NEAR(b.w_d, refv::w_d, 1e-13);
  EXPECT_NEAR(b.w_d, std::sqrt(8.0) * 15.0 / 100.0, 1e-13);
  EXPECT_NEAR(b.a_U, refv::a_U, 1e-15);
  EXPECT_NEAR(b.a_RIS, refv::a_RIS, 1e-15);
  EXPECT_NEAR(b.A_d, refv::A_d, 1e-12 * refv::A_d);
  EXPECT_NEAR(b.A_r, refv::A_r, 1e-12 * refv::A_r);
  EXPECT_NEAR(b.A_RIS, refv::A_RIS, 1e-12 * refv::A_RIS);
  EXPECT_NEAR(b.w_eq_d, refv::w_eq_d, 1e-12);
  EXPECT_NEAR(b.w_eq_r, refv::w_eq_r, 1e-12);
  EXPECT_NEAR(b.q_md, refv::q_md, 1e-12);
  EXPECT_NEAR(b.q_mr, refv::q_mr, 1e-12);
  EXPECT_NEAR(b.sigma_n2, refv::sigma_n2, 1e-24);
  EXPECT_NEAR(b.G_R, refv::G_R, 1e-10);
  EXPECT_DOUBLE_EQ(b.rho_th_d, b.A_d / 2.0);
  EXPECT_DOUBLE_EQ(b.rho_th_r, b.A_RIS * b.A_r / 2.0);
}

TEST(LinkBudget, CollectedFractionMatchesBeamQuadrature) {
  for (double w : {0.05, 0.2, 0.8, 3.0}) {
    for (double a : {0.005, 0.02, 0.1}) {
      const double v = aperture_ratio(a, w);
      EXPECT_NEAR(collected_fraction(v), oracle::collected_fraction_quad(a, w), 1e-10) << "a=" << a << " w=" << w;
      EXPECT_NEAR(equivalent_width(w, v), oracle::equivalent_width_quad(a, w), 1e-9 * w);
    }
  }
}

TEST(LinkBudget, SmallApertureLimit) {
  const double v = 1e-9;
  EXPECT_LT(collected_fraction(v), 1e-17);
  EXPECT_NEAR(equivalent_width_factor(v), 1.0, 1e-15);
  EXPECT_NEAR(equivalent_width_factor(1e-4), 1.0, 1e-7);
  for (double x : {1e-6, 0.01, 0.5, 1.0, 2.0, 5.0}) EXPECT_GE(equivalent_width_factor(x), 1.0);
}

TEST(LinkBudget, ShapeParameterExactPowerOfHalf) {
  EXPECT_EQ(misdetection_probability(0.4 / (2 * 0.1)), 0.0625);
}

TEST(LinkBudget, ReflectedGainRelation) {
  SystemConfig c;
  double prev_eta = std::numeric_limits<double>::infinity();
  for (double w : {0.2, 0.5, 0.8, 1.3, 2.0}) {
    c.w_r = w;
    const auto b = derive_link_budget(c);
    EXPECT_DOUBLE_EQ(b.G_R * w * w, 8.0 * c.d_RU * c.d_RU);
    EXPECT_LT(b.eta_r, prev_eta);
    prev_eta = b.eta_r;
  }
}

TEST(LinkBudget, PureFunction) {
  SystemConfig c;
  c.q_d = 0.2;
  EXPECT_EQ(derive_link_budget(c), derive_link_budget(c));
}

TEST(Misalignment, CdfAndPdf) {
  EXPECT_EQ(misalignment_cdf(0.3, 0.3, 1.7), 1.0);
  EXPECT_EQ(misalignment_cdf(0.5, 1.0, 2.0), 0.0625);
  for (double g : {1.0, 2.0, 2.1218, 3.5}) {
    const double A = 0.01;
    const double mass = oracle::simpson([&](double x) { return misalignment_pdf(x, A, g); }, 0.0, A, 20000);
    EXPECT_NEAR(mass, 1.0, 1e-9) << "gamma=" << g;
  }
  EXPECT_THROW(misalignment_cdf(-0.1, 1.0, 1.0), DomainError);
  EXPECT_THROW(misalignment_cdf(1.1, 1.0, 1.0), DomainError);
  EXPECT_THROW(misalignment_pdf(0.5, 1.0, 0.0), DomainError);
}

TEST(Misalignment, MisdetectionEqualsHalfPeakCdfBitExact) {
  std::vector<SystemConfig> cfgs(3);
  cfgs[1].sigma_md = 0.03;
  cfgs[1].w_r = 1.4;
  cfgs[2].sigma_mr = 0.33;
  for (const auto& c : cfgs) {
    const auto b = derive_link_budget(c);
    EXPECT_EQ(b.q_md, misalignment_cdf(b.A_d / 2, b.A_d, b.gamma_ma_d));
    EXPECT_EQ(b.q_mr, misalignment_cdf(b.A_ris_path() / 2, b.A_ris_path(), b.gamma_ma_r));
  }
}

TEST(Fading, Coefficient) {
  EXPECT_EQ(fading_coefficient(0.0, 0.3, 0.5), 0.3);
  const double w = 0.42436;
  EXPECT_NEAR(fading_coefficient(w * std::sqrt(std::log(std::numbers::sqrt2)), 0.3, w), 0.15, 1e-15);
  EXPECT_EQ(fading_coefficient(1e3, 0.3, 0.5), 0.0);
}

TEST(Fading, ChannelGains) {
  const auto b = derive_link_budget(SystemConfig{});
  auto g = channel_gains(b, {false, false}, b.A_d, b.A_ris_path());
  EXPECT_EQ(g.direct, 0.0);
  EXPECT_EQ(g.ris, 0.0);
  g = channel_gains(b, {true, true}, b.A_d, b.A_ris_path());
  EXPECT_DOUBLE_EQ(g.direct, b.eta_d * b.eta_d * b.A_d);
  EXPECT_DOUBLE_EQ(g.ris, b.eta_r * b.eta_r * b.A_RIS * b.A_r);
  g = channel_gains(b, {false, true}, 1e-4, 2e-6);
  EXPECT_EQ(g.direct, 0.0);
  EXPECT_DOUBLE_EQ(g.ris, refv::eta_r * refv::eta_r * 2e-6);
}

TEST(Sampling, DegenerateBlockage) {
  SystemConfig c;
  Rng rng(3);
  c.q_d = 0.0;
  c.q_r = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_blockage(c, rng);
    ASSERT_TRUE(s.direct);
    ASSERT_FALSE(s.ris);
  }
  c.q_d = 1.0;
  for (int i = 0; i < 1000; ++i) ASSERT_FALSE(sample_blockage(c, rng).direct);
}

TEST(Sampling, BlockageMarginalsAndIndependence) {
  SystemConfig c;
  Rng rng(11);
  const int n = 1000000;
  long blocked_d = 0, blocked_r = 0, both = 0;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_blockage(c, rng);
    blocked_d += !s.direct;
    blocked_r += !s.ris;
    both += !s.direct && !s.ris;
  }
  EXPECT_NEAR(blocked_d / double(n), 0.3, oracle::binomial_3sigma(0.3, n));
  EXPECT_NEAR(blocked_r / double(n), 0.1, oracle::binomial_3sigma(0.1, n));
  EXPECT_NEAR(both / double(n), 0.03, oracle::binomial_3sigma(0.03, n));
}

TEST(Sampling, SeedDeterminism) {
  SystemConfig c;
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    const auto ea = sample_pointing_error(c, a);
    const auto eb = sample_pointing_error(c, b);
    ASSERT_EQ(ea.eps_d, eb.eps_d);
    ASSERT_EQ(ea.eps_r, eb.eps_r);
    ASSERT_EQ(sample_blockage(c, a), sample_blockage(c, b));
  }
}

TEST(Sampling, FadingPassesKsAgainstClosedForm) {
  SystemConfig c;
  const auto b = derive_link_budget(c);
  Rng rng(2024);
  const std::size_t n = 100000;
  std::vector<double> rho_d(n), rho_r(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = fading_from_pointing(b, sample_pointing_error(c, rng));
    rho_d[i] = f.rho_d;
    rho_r[i] = f.rho_r;
  }
  const double crit = oracle::ks_critical(n, 0.01);
  EXPECT_LT(oracle::ks_statistic(rho_d, [&](double x) { return misalignment_cdf(x, b.A_d, b.gamma_ma_d); }), crit);
  EXPECT_LT(oracle::ks_statistic(rho_r,
                                 [&](double x) { return misalignment_cdf(x, b.A_ris_path(), b.gamma_ma_r); }),
            crit);
}

TEST(Random, DeriveSeedSeparatesStreams) {
  EXPECT_NE(derive_seed(1, {0}), derive_seed(1, {1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(9, {3, 4}), derive_seed(9, {3, 4}));
  Rng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(r);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
