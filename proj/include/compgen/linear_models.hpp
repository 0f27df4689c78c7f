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

#pragma once

#include <vector>

#include <Eigen/Dense>

namespace compgen {

/// Ridge regression with an unpenalized intercept.
struct RidgeModel {
  Eigen::VectorXd coef;
  double intercept = 0.0;
  double alpha = 0.0;
  bool intercept_only = false;
  /// Leave-one-out mean squared error per candidate alpha (inf when undefined).
  std::vector<double> loo_errors;

  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

inline const std::vector<double> kDefaultRidgeAlphas{0.0, 0.01, 0.1, 1.0, 10.0};

/// Closed-form ridge fit at a fixed alpha (alpha 0 gives the minimum-norm
/// least-squares solution).
RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha);

/// Chooses alpha by exact leave-one-out error computed from the hat-matrix
/// diagonal; ties go to the smaller alpha. Constant features or a constant
/// target give an intercept-only model.
RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::vector<double>& alphas = kDefaultRidgeAlphas);

struct LogisticOptions {
  std::vector<double> cs;  // empty: 10 log-spaced values in [1e-4, 1e4]
  int folds = 5;
  int max_iter = 100;
  // Stop when max |gradient| of the sample-averaged objective
  // mean_i -log p(y_i | x_i) + ||W||^2 / (2 C n) falls below this.
  double grad_tol = 1e-4;
};

/// Multinomial L2-regularized logistic regression minimizing
///   C * sum_i -log p(y_i | x_i) + 0.5 * ||W||^2   (bias unpenalized).
class LogisticClassifier {
 public:
  LogisticClassifier() = default;
  LogisticClassifier(std::vector<int> classes, Eigen::MatrixXd weights, Eigen::VectorXd bias,
                     double c)
      : classes_(std::move(classes)), weights_(std::move(weights)), bias_(std::move(bias)), c_(c) {}

  const std::vector<int>& classes() const { return classes_; }
  const Eigen::MatrixXd& weights() const { return weights_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  double c() const { return c_; }

  Eigen::MatrixXd decision_function(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

 private:
  std::vector<int> classes_;
  Eigen::MatrixXd weights_;  // [d, K]
  Eigen::VectorXd bias_;     // [K]
  double c_ = 1.0;
};

std::vector<double> default_logistic_cs();

/// Fit at one regularization strength; `warm` (if non-null and shaped
/// [(d+1), K]) seeds the optimizer.
LogisticClassifier fit_logistic_fixed(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                      double c, const LogisticOptions& options = {},
                                      const Eigen::MatrixXd* warm = nullptr);

/// Selects C by stratified k-fold accuracy (ties to the smaller C), then refits
/// on all rows. Throws kDegenerate when fewer than two classes are present.
LogisticClassifier fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                const LogisticOptions& options = {});

}  // namespace compgen
