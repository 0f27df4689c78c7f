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

#include "compgen/readout.hpp"

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/random.hpp"
#include "compgen/split.hpp"
#include "fixtures.hpp"

namespace compgen {
namespace {

using compgen::testing::oracle_set;

TEST(R2Test, HandComputedCases) {
  const std::vector<double> y{0, 1, 2, 3};
  EXPECT_DOUBLE_EQ(r2_score(y, std::vector<double>{0, 1, 2, 2}).value, 0.8);
  EXPECT_DOUBLE_EQ(r2_score(y, y).value, 1.0);
  EXPECT_DOUBLE_EQ(r2_score(y, std::vector<double>(4, 1.5)).value, 0.0);
  const auto worse = r2_score(y, std::vector<double>{3, 2, 1, 0});
  EXPECT_LT(worse.value, 0.0);
  EXPECT_EQ(worse.clipped(), 0.0);
  const auto constant = r2_score(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
  EXPECT_TRUE(constant.undefined);
  EXPECT_EQ(constant.clipped(), 0.0);
}

TEST(OracleTest, SquaredIsElementwiseSquare) {
  const auto spec = desk_spec();
  const auto a = oracle_set(spec, {0, 17, 3839}, OracleKind::kAttributes);
  const auto b = oracle_set(spec, {0, 17, 3839}, OracleKind::kAttributesSquared);
  EXPECT_TRUE(b.features.isApprox(a.features.array().square().matrix()));
  EXPECT_EQ(a.features.minCoeff(), 0.0);
  EXPECT_EQ(a.features.maxCoeff(), 1.0);
}

class OracleReadoutTest : public ::testing::Test {
 protected:
  void SetUp() override {
    spec = desk_spec();
    split = make_compositional_split(spec, 0.3, 1);
    labeled = sample_labeled_subset(split, 500, 2).ids;
  }
  FactorSpec spec;
  SplitAssignment split;
  std::vector<std::int64_t> labeled;
};

TEST_F(OracleReadoutTest, AttributesAreLinearlyDecodable) {
  const auto report = evaluate(oracle_set(spec, labeled, OracleKind::kAttributes),
                               oracle_set(spec, split.test_ids, OracleKind::kAttributes), spec,
                               ReadoutKind::kLinear);
  EXPECT_GE(report.accuracy_macro, 0.995);
  EXPECT_GE(report.r2_macro, 0.999);
  ASSERT_EQ(report.factors.size(), 5u);
  EXPECT_FALSE(report.factors[0].has_r2);  // shape is categorical
  EXPECT_EQ(report.metadata["r2_excludes_categorical"][0], "shape");
}

TEST_F(OracleReadoutTest, GbtDecodesAttributes) {
  const auto report = evaluate(oracle_set(spec, labeled, OracleKind::kAttributes),
                               oracle_set(spec, split.test_ids, OracleKind::kAttributes), spec,
                               ReadoutKind::kGbt);
  EXPECT_GE(report.accuracy_macro, 0.99);
  EXPECT_GE(report.r2_macro, 0.99);
}

TEST_F(OracleReadoutTest, NoiseFeaturesClipToZero) {
  auto train = oracle_set(spec, labeled, OracleKind::kAttributes);
  auto test = oracle_set(spec, split.test_ids, OracleKind::kAttributes);
  Rng rng(5);
  for (auto* s : {&train, &test}) {
    for (Eigen::Index i = 0; i < s->features.rows(); ++i)
      for (Eigen::Index j = 0; j < s->features.cols(); ++j) s->features(i, j) = rng.normal();
  }
  const auto report = evaluate(train, test, spec, ReadoutKind::kLinear);
  for (const auto& f : report.factors) {
    if (!f.has_r2) continue;
    EXPECT_GE(f.r2, 0.0);
    EXPECT_EQ(f.r2, std::max(0.0, f.r2_raw));
    EXPECT_LT(f.r2, 0.02);
  }
}

TEST_F(OracleReadoutTest, MoreLabelsDoNotHurt) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto acc = [&](std::size_t n) {
      const auto ids = sample_labeled_subset(split, n, seed).ids;
      return evaluate(oracle_set(spec, ids, OracleKind::kAttributes),
                      oracle_set(spec, split.test_ids, OracleKind::kAttributes), spec,
                      ReadoutKind::kLinear)
          .accuracy_macro;
    };
    wins += acc(1000) >= acc(100);
  }
  EXPECT_GE(wins, 2);
}

TEST_F(OracleReadoutTest, MisalignedIdsAreRejected) {
  auto train = oracle_set(spec, labeled, OracleKind::kAttributes);
  train.ids.pop_back();
  EXPECT_THROW(evaluate(train, oracle_set(spec, split.test_ids, OracleKind::kAttributes), spec,
                        ReadoutKind::kLinear),
               Error);
}

TEST_F(OracleReadoutTest, SingleClassFactorFallsBackToConstant) {
  // Labeled rows restricted to one shape.
  std::vector<std::int64_t> ids;
  for (auto id : split.train_ids)
    if (spec.to_tuple(id)[0] == 1) ids.push_back(id);
  const auto report = evaluate(oracle_set(spec, ids, OracleKind::kAttributes),
                               oracle_set(spec, split.test_ids, OracleKind::kAttributes), spec,
                               ReadoutKind::kLinear);
  EXPECT_TRUE(report.factors[0].constant_classifier);
  EXPECT_NEAR(report.factors[0].accuracy, 1.0 / 3, 0.05);
}

TEST(ReadoutReportTest, JsonRoundTrip) {
  ReadoutReport r;
  r.factors.push_back({"shape", false, 0.5, false, 0, 0, false, true});
  r.factors.push_back({"scale", true, 0.75, true, 0.0, -0.25, false, false});
  r.accuracy_macro = 0.625;
  r.r2_macro = 0.0;
  r.metadata["mode"] = "z_post";
  const auto back = ReadoutReport::from_json(r.to_json());
  EXPECT_EQ(back.to_json(), r.to_json());
}

}  // namespace
}  // namespace compgen
