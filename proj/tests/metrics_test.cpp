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

#include "compgen/metrics.hpp"

#include <cmath>
#include <functional>
#include <map>

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/random.hpp"
#include "fixtures.hpp"

namespace compgen {
namespace {

using namespace compgen::testing;

TEST(KernelTest, DiscreteMiMatchesJointHistogram) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = 20 + rng.uniform_index(180);
    std::vector<int> u, v;
    for (std::size_t i = 0; i < n; ++i) {
      u.push_back(static_cast<int>(rng.uniform_index(5)));
      v.push_back(rng.uniform() < 0.5 ? u.back() : static_cast<int>(rng.uniform_index(4)) - 2);
    }
    EXPECT_NEAR(discrete_mi(u, v), mi_oracle(u, v), 1e-6);
  }
}

TEST(KernelTest, IdenticalUniformFourValuesHaveLnFourNats) {
  std::vector<int> u;
  for (int i = 0; i < 400; ++i) u.push_back(i % 4);
  EXPECT_NEAR(discrete_mi(u, u), std::log(4.0), 1e-12);
  EXPECT_NEAR(discrete_entropy(u), std::log(4.0), 1e-12);
}

TEST(KernelTest, LevenshteinExamplesAndOracle) {
  EXPECT_EQ(levenshtein("abc", "abd"), 1);
  EXPECT_EQ(levenshtein("", "abc"), 3);
  EXPECT_EQ(levenshtein("kitten", "sitting"), 3);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    std::string a, b;
    for (auto n = rng.uniform_index(9); n > 0; --n) a += static_cast<char>('a' + rng.uniform_index(3));
    for (auto n = rng.uniform_index(9); n > 0; --n) b += static_cast<char>('a' + rng.uniform_index(3));
    EXPECT_EQ(levenshtein(a, b), levenshtein_oracle(a, b)) << a << " / " << b;
    EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
  }
}

TEST(KernelTest, SpearmanMatchesQuadraticOracleWithTies) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = 10 + rng.uniform_index(190);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n; ++i) {
      x.push_back(static_cast<double>(rng.uniform_index(7)));
      y.push_back(x.back() + static_cast<double>(rng.uniform_index(5)));
    }
    const auto r = spearman(x, y);
    ASSERT_TRUE(r.defined);
    EXPECT_NEAR(r.value, spearman_oracle(x, y), 1e-9);
  }
  const std::vector<double> inc{1, 2, 3, 5, 8};
  EXPECT_DOUBLE_EQ(spearman(inc, std::vector<double>{0, 0.1, 0.2, 7, 9}).value, 1.0);
  EXPECT_FALSE(spearman(inc, std::vector<double>(5, 2.0)).defined);
  EXPECT_THROW(spearman(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(KernelTest, EmptyInputsAreErrors) {
  EXPECT_THROW(discrete_mi(std::vector<int>{}, std::vector<int>{}), Error);
  EXPECT_THROW(equal_mass_bins(std::vector<double>{}, 4), Error);
}

TEST(KernelTest, EqualMassBinsBalanceAndKeepTiesTogether) {
  Rng rng(4);
  std::vector<double> x;
  for (int i = 0; i < 1000; ++i) x.push_back(rng.normal());
  const auto bins = equal_mass_bins(x, 20);
  std::vector<int> counts(20, 0);
  for (int b : bins) counts[static_cast<std::size_t>(b)]++;
  for (int c : counts) EXPECT_EQ(c, 50);
  const auto tied = equal_mass_bins(std::vector<double>{1, 1, 1, 2, 3, 3}, 3);
  EXPECT_EQ(tied, (std::vector<int>{0, 0, 0, 1, 2, 2}));
}

TEST(KernelTest, EosTruncation) {
  EXPECT_EQ(truncate_at_eos(std::vector<int>{3, 4, 0, 5}), (std::vector<int>{3, 4}));
  EXPECT_TRUE(truncate_at_eos(std::vector<int>{0, 1}).empty());
  EXPECT_EQ(truncate_at_eos(std::vector<int>{1, 2}), (std::vector<int>{1, 2}));
}

TEST(MigTest, PerfectNoiseAndDuplicateFixtures) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  EXPECT_GE(mig(noisy_copy(labels, 1e-3, 1), labels).score, 0.9);

  const auto rl = random_labels(spec, 10000, 2);
  EXPECT_LE(mig(noise_latents(10000, 10, 3), rl).score, 0.05);

  Eigen::MatrixXd dup = noisy_copy(labels, 1e-3, 1);
  dup.col(1) = dup.col(0);
  const auto r = mig(dup, labels);
  EXPECT_NEAR(r.mi(0, 0) - r.mi(1, 0), 0.0, 1e-12);
}

TEST(MigTest, PermutationAndScaleInvariance) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const auto z = noisy_copy(labels, 0.7, 5);
  const double base = mig(z, labels).score;
  EXPECT_NEAR(mig(permuted_columns(z), labels).score, base, 1e-9);
  Eigen::MatrixXd scaled = z;
  scaled.col(2) *= 10;
  EXPECT_NEAR(mig(scaled, labels).score, base, 1e-12);
}

TEST(MigTest, TooFewSamplesPerBin) {
  const auto spec = small_spec();
  EXPECT_THROW(mig(noise_latents(100, 3, 1), random_labels(spec, 100, 1)), Error);
}

TEST(MigTest, ZeroEntropyFactorIsExcluded) {
  const auto spec = small_spec();
  auto labels = random_labels(spec, 1000, 4);
  labels.col(1).setZero();
  const auto r = mig(noise_latents(1000, 3, 4), labels);
  EXPECT_EQ(r.excluded_factors, std::vector<int>{1});
}

TEST(SapTest, Fixtures) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  Eigen::MatrixXd aligned(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    for (int k = 0; k < spec.num_factors(); ++k) aligned(i, k) = spec.normalized_value(k, labels(i, k));
  EXPECT_GE(sap(aligned, labels, spec).score, 0.9);

  const Eigen::MatrixXd same = aligned.col(2).replicate(1, 4);
  EXPECT_EQ(sap(same, labels, spec).score, 0.0);

  EXPECT_LE(sap(noise_latents(10000, 10, 6), random_labels(spec, 10000, 7), spec).score, 0.05);
}

TEST(SapTest, PermutationAndAffineInvariance) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const auto z = noisy_copy(labels, 0.8, 8);
  const auto base = sap(z, labels, spec);
  EXPECT_NEAR(sap(permuted_columns(z), labels, spec).score, base.score, 1e-9);
  Eigen::MatrixXd scaled = z;
  scaled.col(3) = scaled.col(3) * 10.0;
  const auto s = sap(scaled, labels, spec);
  EXPECT_NEAR(s.score, base.score, 1e-9);
  EXPECT_NEAR(s.scores(3, 3), base.scores(3, 3), 1e-12);
}

TEST(DciTest, IdentityIsDisentangledAndComplete) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const auto r = dci(labels.cast<double>(), labels, 1);
  EXPECT_GE(r.disentanglement, 0.9);
  EXPECT_GE(r.completeness, 0.9);
  EXPECT_GE(r.informativeness, 0.99);
}

TEST(DciTest, ReplicatedSumsAreEntangled) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const Eigen::VectorXd sum = labels.cast<double>().rowwise().sum();
  const Eigen::MatrixXd z = sum.replicate(1, 5);
  const auto r = dci(z, labels, 1);
  EXPECT_NEAR(r.disentanglement, 0.0, 1e-9);
}

TEST(DciTest, NoiseIsAtChance) {
  const auto spec = small_spec();
  const auto labels = random_labels(spec, 2000, 9);
  const auto r = dci(noise_latents(2000, 5, 10), labels, 3);
  double chance = 0;
  for (int k = 0; k < spec.num_factors(); ++k) chance += 1.0 / spec.factor(k).cardinality();
  chance /= spec.num_factors();
  EXPECT_NEAR(r.informativeness, chance, 0.05);
}

TEST(DciTest, PermutationInvariance) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const auto z = noisy_copy(labels, 0.5, 11);
  const auto a = dci(z, labels, 2);
  const auto b = dci(permuted_columns(z), labels, 2);
  EXPECT_NEAR(a.disentanglement, b.disentanglement, 1e-9);
  EXPECT_NEAR(a.completeness, b.completeness, 1e-9);
  EXPECT_NEAR(a.informativeness, b.informativeness, 1e-9);
}

TEST(IrsTest, CopiesBeatSumsAndNoiseIsDefined) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const Eigen::MatrixXd copies = labels.cast<double>();
  const double exact = irs(copies, labels).score;
  EXPECT_GE(exact, 0.95);

  Eigen::MatrixXd sums(copies.rows(), copies.cols());
  for (Eigen::Index j = 0; j < copies.cols(); ++j) sums.col(j) = copies.col(j) + copies.col((j + 1) % copies.cols());
  EXPECT_LT(irs(sums, labels).score, exact);

  const auto noise = irs(noise_latents(labels.rows(), 5, 12), labels);
  EXPECT_TRUE(std::isfinite(noise.score));
  EXPECT_LT(noise.score, 0.5);

  Eigen::MatrixXd with_constant = copies;
  with_constant.col(0).setConstant(2.0);
  EXPECT_EQ(irs(with_constant, labels).weights(0), 0.0);
}

TEST(IrsTest, PermutationInvariance) {
  const auto spec = small_spec();
  const auto labels = grid_labels(spec);
  const auto z = noisy_copy(labels, 0.5, 13);
  EXPECT_NEAR(irs(z, labels).score, irs(permuted_columns(z), labels).score, 1e-9);
}

// ---- topsim ----------------------------------------------------------------

TEST(TopsimTest, CompositionalLanguageOnCube) {
  const auto spec = cube_spec();
  const auto labels = grid_labels(spec);
  const auto messages = index_messages(labels);
  const auto onehot_attrs = topsim_attributes(spec, labels, AttributeEncoding::kOneHot);
  const auto onehot = topsim(onehot_attrs, messages);
  EXPECT_TRUE(onehot.exhaustive);
  EXPECT_EQ(onehot.pairs, 351);
  EXPECT_GE(onehot.value, 0.8);
  EXPECT_NEAR(onehot.value, topsim_oracle(onehot_attrs, messages), 1e-9);
  EXPECT_NEAR(onehot.value, 0.9422, 1e-4);
  // The normalized-index encoding is much weaker here; the all-zero tuple
  // is excluded from the oracle comparison by the zero-vector rule, so only
  // the pinned value is checked.
  const auto norm = topsim(topsim_attributes(spec, labels, AttributeEncoding::kNormalizedIndex), messages);
  EXPECT_NEAR(norm.value, 0.4018, 1e-4);
}

TEST(TopsimTest, ShuffledMessagesAreUncorrelated) {
  const auto spec = small_spec();
  Rng rng(14);
  std::vector<std::int64_t> all(static_cast<std::size_t>(spec.grid_size()));
  std::iota(all.begin(), all.end(), 0);
  const auto ids = rng.sample_without_replacement(all, 500);
  Eigen::MatrixXi labels(500, spec.num_factors());
  for (int i = 0; i < 500; ++i) {
    const auto t = spec.to_tuple(ids[static_cast<std::size_t>(i)]);
    for (int k = 0; k < spec.num_factors(); ++k) labels(i, k) = t[static_cast<std::size_t>(k)];
  }
  auto messages = index_messages(labels);
  rng.shuffle(messages);
  const auto r = topsim(topsim_attributes(spec, labels, AttributeEncoding::kOneHot), messages,
                        kDefaultPairBudget, 3);
  EXPECT_FALSE(r.exhaustive);
  EXPECT_EQ(r.pairs, kDefaultPairBudget);
  EXPECT_LE(std::abs(r.value), 0.1);
  const auto again = topsim(topsim_attributes(spec, labels, AttributeEncoding::kOneHot), messages,
                            kDefaultPairBudget, 3);
  EXPECT_EQ(again.value, r.value);
}

TEST(TopsimTest, ConstantMessagesAreUndefined) {
  const auto spec = cube_spec();
  const auto labels = grid_labels(spec);
  const std::vector<std::vector<int>> constant(27, std::vector<int>{5, 5, 0, 7});
  const auto r = topsim(topsim_attributes(spec, labels, AttributeEncoding::kNormalizedIndex), constant);
  EXPECT_FALSE(r.defined);
  MetricReport report;
  report.topsim = r;
  EXPECT_TRUE(report.to_json()["topsim"].is_null());
  EXPECT_FALSE(report.to_json()["topsim_defined"].get<bool>());
}

TEST(TopsimTest, SymmetricUnderSampleOrder) {
  const auto spec = cube_spec();
  const auto labels = grid_labels(spec);
  Rng rng(15);
  std::vector<std::vector<int>> messages;
  for (int i = 0; i < 27; ++i) {
    std::vector<int> m;
    for (int t = 0; t < 4; ++t) m.push_back(static_cast<int>(rng.uniform_index(3)));
    messages.push_back(m);
  }
  const auto attrs = topsim_attributes(spec, labels, AttributeEncoding::kNormalizedIndex);
  const Eigen::MatrixXd reversed = attrs.colwise().reverse();
  const std::vector<std::vector<int>> rev_messages(messages.rbegin(), messages.rend());
  EXPECT_NEAR(topsim(attrs, messages).value, topsim(reversed, rev_messages).value, 1e-12);
}

TEST(TopsimTest, CosineZeroVectorRule) {
  const Eigen::RowVector2d zero(0, 0), one(1, 0), diag(1, 1);
  EXPECT_EQ(cosine_distance(zero, zero), 0.0);
  EXPECT_EQ(cosine_distance(zero, one), 1.0);
  EXPECT_NEAR(cosine_distance(one, diag), 1 - std::sqrt(0.5), 1e-15);
  EXPECT_EQ(cosine_distance(one, diag), cosine_distance(diag, one));
}

TEST(MetricReportTest, JsonRoundTrip) {
  MetricReport r;
  r.mig = 0.25;
  r.dci_completeness = 0.5;
  r.topsim = TopsimResult{0.3, true, 100, true};
  r.warnings = {"factor shape excluded"};
  EXPECT_EQ(MetricReport::from_json(r.to_json()).to_json(), r.to_json());
}

}  // namespace
}  // namespace compgen
