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

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace compgen {

struct GbtOptions {
  int n_estimators = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
};

/// Least-squares regression tree over presorted features. Split gains are
/// the reduction in squared error. Gains equal up to a relative 1e-12 are
/// ties: the gain is shared evenly among the tied features in the
/// importances, and the split itself is chosen by a hash of the induced
/// partition and then of the column values, so the fitted tree does not
/// depend on feature order.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  /// Gain per feature, summed over splits (not normalized).
  const Eigen::VectorXd& gains() const { return gains_; }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
  Eigen::VectorXd gains_;
};

/// Presorted view of a training matrix, shared by all trees of an ensemble.
class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, int max_depth);

  /// Fits a tree to `target`. Leaves hold the mean target unless
  /// `leaf_value` overrides it (called with the member row list).
  template <typename LeafFn>
  RegressionTree fit(const Eigen::VectorXd& target, LeafFn leaf_value) const;

  RegressionTree fit(const Eigen::VectorXd& target) const;

 private:
  RegressionTree grow(const Eigen::VectorXd& target, std::vector<std::vector<int>>& leaves) const;

  const Eigen::MatrixXd& x_;
  int max_depth_;
  std::vector<std::vector<int>> order_;  // per feature, rows sorted by value
  std::vector<std::uint64_t> row_key_;
  std::vector<std::uint64_t> column_hash_;
};

template <typename LeafFn>
RegressionTree TreeBuilder::fit(const Eigen::VectorXd& target, LeafFn leaf_value) const {
  std::vector<std::vector<int>> leaves;
  RegressionTree tree = grow(target, leaves);
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    if (tree.nodes_[i].feature < 0) tree.nodes_[i].value = leaf_value(leaves[i]);
  }
  return tree;
}

class GbtRegressor {
 public:
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtOptions& options = {});
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  /// Per-tree normalized importances averaged over trees, summing to 1
  /// (all zeros when no tree split).
  Eigen::VectorXd feature_importances() const;

 private:
  double init_ = 0.0;
  double learning_rate_ = 0.1;
  Eigen::Index n_features_ = 0;
  std::vector<RegressionTree> trees_;
};

/// Gradient boosting with binomial deviance (two classes) or multinomial
/// deviance (one tree per class and stage) and Newton-step leaf values.
class GbtClassifier {
 public:
  void fit(const Eigen::MatrixXd& x, const std::vector<int>& labels, const GbtOptions& options = {});
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd decision_function(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd feature_importances() const;
  const std::vector<int>& classes() const { return classes_; }

 private:
  std::vector<int> classes_;
  Eigen::VectorXd init_;
  double learning_rate_ = 0.1;
  Eigen::Index n_features_ = 0;
  int trees_per_stage_ = 1;
  std::vector<RegressionTree> trees_;  // stage-major
};

}  // namespace compgen
