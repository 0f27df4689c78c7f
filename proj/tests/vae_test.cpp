// Copyright 2026 The compgen Authors.
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

#include "compgen/vae.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/model.hpp"
#include "compgen/random.hpp"
#include "grad_check.hpp"
#include "tc_fixture.hpp"

namespace compgen {
namespace {

torch::Tensor random_images(int b, int res, std::uint64_t seed, torch::ScalarType dtype = torch::kFloat32) {
  torch::manual_seed(seed);
  return torch::rand({b, 1, res, res}, torch::TensorOptions().dtype(dtype));
}

TEST(VaeNetTest, ShapesAndFiniteness) {
  torch::manual_seed(1);
  VaeNet net(1, 64, 1, 10);
  const auto x = random_images(64, 64, 2);
  auto [pre, q] = net->encode(x);
  EXPECT_EQ(pre.size(0), 64);
  EXPECT_EQ(pre.size(1), 64 * 16);
  EXPECT_EQ(q.mu.sizes(), (std::vector<std::int64_t>{64, 10}));
  EXPECT_TRUE(torch::isfinite(q.mu).all().item<bool>());
  EXPECT_TRUE(torch::isfinite(q.logvar).all().item<bool>());
  auto [post, logits] = net->decode(q.mu);
  EXPECT_EQ(post.size(1), 64 * 16);
  EXPECT_EQ(logits.sizes(), x.sizes());
  EXPECT_TRUE(torch::isfinite(logits).all().item<bool>());

  const auto zero = torch::zeros({1, 1, 64, 64});
  const auto one = torch::ones({1, 1, 64, 64});
  EXPECT_FALSE(torch::equal(net->encode(zero).second.mu, net->encode(one).second.mu));

  const auto same = q.mu.narrow(0, 0, 1).repeat({3, 1});
  const auto rows = net->decode(same).second;
  EXPECT_TRUE(torch::equal(rows[0], rows[2]));
}

TEST(VaeNetTest, DefaultWidthsAtMultiplierTwo) {
  VaeNet net(1, 64, 2, 10);
  EXPECT_EQ(net->enc_conv->c1->options.out_channels(), 64);
  EXPECT_EQ(net->enc_conv->c4->options.out_channels(), 128);
  auto* first = net->enc_mlp->layers[0]->as<torch::nn::Linear>();
  EXPECT_EQ(first->options.out_features(), 512);
  auto* second = net->enc_mlp->layers[1]->as<torch::nn::Linear>();
  EXPECT_EQ(second->options.out_features(), 1024);
}

TEST(VaeModelTest, RejectsUnnormalizedInput) {
  ModelConfig c;
  c.resolution = 32;
  c.width_multiplier = 1;
  auto model = make_model(c, 0);
  EXPECT_THROW(model->loss(torch::full({2, 1, 32, 32}, 2.0), 0), Error);
  EXPECT_THROW(model->loss(torch::zeros({2, 1, 64, 64}), 0), Error);
}

TEST(ReparameterizeTest, Cases) {
  GaussianPosterior q{torch::tensor({{0.5, -1.0}}), torch::zeros({1, 2})};
  EXPECT_TRUE(torch::equal(reparameterize(q, torch::zeros({1, 2})), q.mu));
  EXPECT_TRUE(torch::allclose(reparameterize(q, torch::ones({1, 2})), q.mu + 1));

  Rng rng(3);
  auto noise = torch::empty({100000, 1}, torch::kFloat64);
  for (std::int64_t i = 0; i < noise.size(0); ++i) noise[i][0] = rng.normal();
  GaussianPosterior unit{torch::zeros({100000, 1}, torch::kFloat64), torch::zeros({100000, 1}, torch::kFloat64)};
  EXPECT_NEAR(reparameterize(unit, noise).std().item<double>(), 1.0, 0.01);
}

TEST(KlTest, AnalyticAndMonteCarlo) {
  GaussianPosterior zero{torch::zeros({1, 3}), torch::zeros({1, 3})};
  EXPECT_TRUE(torch::equal(kl_standard_normal(zero), torch::zeros({3})));
  GaussianPosterior shifted{torch::ones({1, 1}), torch::zeros({1, 1})};
  EXPECT_DOUBLE_EQ(kl_standard_normal(shifted).item<double>(), 0.5);

  const double mu = 0.3, logvar = -0.2, sd = std::exp(0.5 * logvar);
  Rng rng(4);
  double mc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = mu + sd * rng.normal();
    const double log_q = -0.5 * (std::log(2 * M_PI) + logvar + (z - mu) * (z - mu) / (sd * sd));
    const double log_p = -0.5 * (std::log(2 * M_PI) + z * z);
    mc += (log_q - log_p) / n;
  }
  GaussianPosterior q{torch::full({1, 1}, mu, torch::kFloat64), torch::full({1, 1}, logvar, torch::kFloat64)};
  EXPECT_NEAR(kl_standard_normal(q).item<double>(), mc, 0.01);
}

TEST(KlTest, NonNegativeOnRandomInputs) {
  torch::manual_seed(5);
  GaussianPosterior q{torch::randn({500, 8}) * 3, torch::randn({500, 8}) * 3};
  const auto per_row = 0.5 * (q.mu.square() + q.logvar.exp() - q.logvar - 1.0);
  EXPECT_GE(per_row.min().item<double>(), 0.0);
  EXPECT_GE(kl_standard_normal(q).min().item<double>(), 0.0);
}

TEST(BernoulliTest, AnalyticValuesAndGradient) {
  auto logits = torch::zeros({1, 1, 2, 2}, torch::requires_grad());
  const auto x = torch::ones({1, 1, 2, 2});
  const auto nll = bernoulli_nll(logits, x);
  EXPECT_NEAR(nll.item<double>(), 4 * std::log(2.0), 1e-6);
  nll.backward();
  EXPECT_TRUE(torch::allclose(logits.grad(), torch::full({1, 1, 2, 2}, -0.5)));

  const double l = 0.7, p = 1 / (1 + std::exp(-l));
  const auto at_p = bernoulli_nll(torch::full({1, 1, 1, 1}, l, torch::kFloat64),
                                  torch::full({1, 1, 1, 1}, p, torch::kFloat64));
  EXPECT_NEAR(at_p.item<double>(), -(p * std::log(p) + (1 - p) * std::log(1 - p)), 1e-12);

  // Stable for large logits.
  const auto big = bernoulli_nll(torch::full({1, 1, 1, 1}, 200.0), torch::zeros({1, 1, 1, 1}));
  EXPECT_NEAR(big.item<double>(), 200.0, 1e-3);
}

class VaeLossTest : public ::testing::Test {
 protected:
  void SetUp() override {
    torch::manual_seed(6);
    net = VaeNet(1, 32, 1, 4);
    net->to(torch::kFloat64);
    x = random_images(8, 32, 7, torch::kFloat64);
    Rng rng(8);
    noise = torch::empty({8, 4}, torch::kFloat64);
    for (std::int64_t i = 0; i < 8; ++i)
      for (std::int64_t j = 0; j < 4; ++j) noise[i][j] = rng.normal();
  }
  VaeNet net{nullptr};
  torch::Tensor x, noise;
};

TEST_F(VaeLossTest, BetaScalingIdentities) {
  VaeConfig c;
  c.beta = 0.0;
  auto t0 = beta_vae_loss(net, x, noise, c);
  EXPECT_EQ(t0.total.item<double>(), t0.reconstruction_nll.item<double>());
  c.beta = 1.0;
  auto t1 = beta_vae_loss(net, x, noise, c);
  EXPECT_NEAR(t1.total.item<double>(), (t1.reconstruction_nll + t1.kl).item<double>(), 1e-12);
  c.beta = 2.0;
  auto t2 = beta_vae_loss(net, x, noise, c);
  EXPECT_NEAR((t2.total - t2.reconstruction_nll).item<double>(), 2 * t1.kl.item<double>(), 1e-9);
  EXPECT_EQ(t1.total_correlation.item<double>(), 0.0);
}

TEST_F(VaeLossTest, TcLossAddsWeightedTerms) {
  VaeConfig c;
  c.variant = VaeVariant::kBetaTcvae;
  c.beta = 6.0;
  c.dataset_size = 1000;
  auto t = tc_decomposition_loss(net, x, noise, c);
  const double expect = (t.reconstruction_nll + t.mutual_info + 6.0 * t.total_correlation + t.dimwise_kl).item<double>();
  EXPECT_NEAR(t.total.item<double>(), expect, 1e-9);
  EXPECT_THROW(beta_vae_loss(net, x, noise, c), Error);
}

TEST(TcEstimatorTest, SingleSampleBatchIsUndefined) {
  GaussianPosterior q{torch::zeros({1, 2}), torch::zeros({1, 2})};
  try {
    tc_decomposition(torch::zeros({1, 2}), q, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEstimatorUndefined);
  }
}

TEST(TcEstimatorTest, IndependentUnitPosteriorsHaveNoTc) {
  const int m = 256;
  Rng rng(9);
  auto z = torch::empty({m, 2}, torch::kFloat64);
  for (int i = 0; i < m; ++i) z[i][0] = rng.normal(), z[i][1] = rng.normal();
  GaussianPosterior q{torch::zeros({m, 2}, torch::kFloat64), torch::zeros({m, 2}, torch::kFloat64)};
  const auto t = tc_decomposition(z, q, 100000);
  EXPECT_NEAR(t.total_correlation.item<double>(), 0.0, 0.05);
}

using compgen::testing::correlated_aggregate;

TEST(TcEstimatorTest, MatchesGaussianTotalCorrelation) {
  for (double rho : {0.0, 0.5, 0.9}) {
    const auto agg = correlated_aggregate(rho, 10000, 10);
    const auto t = tc_decomposition(agg.z, agg.q, 10000);
    const double truth = -0.5 * std::log(1 - rho * rho);
    EXPECT_NEAR(t.total_correlation.item<double>(), truth, 0.1) << "rho " << rho;
    const double kl = kl_standard_normal(agg.q).sum().item<double>();
    const double sum = (t.mutual_info + t.total_correlation + t.dimwise_kl).item<double>();
    EXPECT_NEAR(sum, kl, 0.1) << "rho " << rho;
  }
}

TEST(TcEstimatorTest, ChunkingDoesNotChangeTheEstimate) {
  const auto agg = correlated_aggregate(0.5, 300, 11);
  const auto a = tc_decomposition(agg.z, agg.q, 5000, 7);
  const auto b = tc_decomposition(agg.z, agg.q, 5000, 1000);
  EXPECT_NEAR(a.total_correlation.item<double>(), b.total_correlation.item<double>(), 1e-12);
  EXPECT_NEAR(a.mutual_info.item<double>(), b.mutual_info.item<double>(), 1e-12);
}

using compgen::testing::gradient_check;

TEST_F(VaeLossTest, BetaVaeGradientMatchesFiniteDifferences) {
  VaeConfig c;
  c.beta = 4.0;
  const double err = gradient_check(*net, [&] { return beta_vae_loss(net, x, noise, c).total; }, 10, 12);
  EXPECT_LE(err, 1e-3);
}

TEST_F(VaeLossTest, BetaTcvaeGradientMatchesFiniteDifferences) {
  VaeConfig c;
  c.variant = VaeVariant::kBetaTcvae;
  c.beta = 6.0;
  c.dataset_size = 500;
  const double err = gradient_check(*net, [&] { return tc_decomposition_loss(net, x, noise, c).total; }, 10, 13);
  EXPECT_LE(err, 1e-3);
}

}  // namespace
}  // namespace compgen
