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

#include "compgen/gbt.hpp"

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/linear_models.hpp"
#include "compgen/random.hpp"

namespace compgen {
namespace {

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  int hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

TEST(GbtTest, XorNeedsTrees) {
  Rng rng(1);
  Eigen::MatrixXd x(200, 2);
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    x(i, 0) = rng.uniform() * 2 - 1;
    x(i, 1) = rng.uniform() * 2 - 1;
    y.push_back((x(i, 0) > 0) != (x(i, 1) > 0) ? 1 : 0);
  }
  GbtClassifier gbt;
  gbt.fit(x, y);
  EXPECT_GE(accuracy(gbt.predict(x), y), 0.95);
  EXPECT_LE(accuracy(fit_logistic(x, y).predict(x), y), 0.6);
}

TEST(GbtTest, StumpMatchesBruteForceSplit) {
  Rng rng(2);
  Eigen::MatrixXd x(30, 3);
  Eigen::VectorXd y(30);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform();
    y(i) = (x(i, 1) > 0.4 ? 1.0 : 0.0) + 0.1 * rng.normal();
  }
  GbtRegressor stump;
  stump.fit(x, y, GbtOptions{1, 1, 1.0});
  const Eigen::VectorXd pred = stump.predict(x);
  double stump_sse = (pred - y).squaredNorm();

  double best = (y.array() - y.mean()).square().sum();
  for (int j = 0; j < 3; ++j) {
    for (int t = 0; t < 30; ++t) {
      const double thr = x(t, j);
      double sl = 0, sr = 0;
      int nl = 0, nr = 0;
      for (int i = 0; i < 30; ++i) (x(i, j) <= thr ? (sl += y(i), ++nl) : (sr += y(i), ++nr));
      if (nl == 0 || nr == 0) continue;
      double sse = 0;
      for (int i = 0; i < 30; ++i) {
        const double m = x(i, j) <= thr ? sl / nl : sr / nr;
        sse += (y(i) - m) * (y(i) - m);
      }
      best = std::min(best, sse);
    }
  }
  EXPECT_NEAR(stump_sse, best, 1e-10);
}

TEST(GbtTest, RegressorFitsStepAndImportancesNormalize) {
  Rng rng(3);
  Eigen::MatrixXd x(100, 4);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform();
    y(i) = x(i, 2) > 0.5 ? 1.0 : 0.0;
  }
  GbtRegressor gbt;
  gbt.fit(x, y);
  EXPECT_LT((gbt.predict(x) - y).cwiseAbs().maxCoeff(), 0.01);
  const auto imp = gbt.feature_importances();
  EXPECT_NEAR(imp.sum(), 1.0, 1e-12);
  EXPECT_GT(imp(2), 0.9);
}

TEST(GbtTest, DuplicateFeaturesShareImportanceEvenly) {
  Rng rng(4);
  Eigen::MatrixXd x(60, 3);
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = x(i, 0);
    x(i, 2) = x(i, 0);
    y.push_back(static_cast<int>(x(i, 0) * 3));
  }
  GbtClassifier gbt;
  gbt.fit(x, y);
  const auto imp = gbt.feature_importances();
  EXPECT_NEAR(imp(0), 1.0 / 3, 1e-12);
  EXPECT_NEAR(imp(1), 1.0 / 3, 1e-12);
  EXPECT_NEAR(imp(2), 1.0 / 3, 1e-12);
  EXPECT_EQ(gbt.predict(x), y);
}

TEST(GbtTest, RequiresTenRowsAndTwoClasses) {
  GbtClassifier gbt;
  EXPECT_THROW(gbt.fit(Eigen::MatrixXd::Zero(5, 1), {0, 1, 0, 1, 0}), Error);
  EXPECT_THROW(gbt.fit(Eigen::MatrixXd::Zero(12, 1), std::vector<int>(12, 2)), Error);
}

}  // namespace
}  // namespace compgen
