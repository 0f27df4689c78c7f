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

#include <algorithm>
#include <tuple>
#include <cmath>
#include <cstring>
#include <numeric>

#include "compgen/error.hpp"
#include "compgen/random.hpp"

namespace compgen {

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(node)];
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(node)].value;
}

TreeBuilder::TreeBuilder(const Eigen::MatrixXd& x, int max_depth) : x_(x), max_depth_(max_depth) {
  require(max_depth >= 1, ErrorCode::kInvalidArgument, "tree depth must be >= 1");
  order_.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& ord = order_[static_cast<std::size_t>(f)];
    ord.resize(static_cast<std::size_t>(x.rows()));
    std::iota(ord.begin(), ord.end(), 0);
    std::stable_sort(ord.begin(), ord.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
  }
  row_key_.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    row_key_[static_cast<std::size_t>(i)] = mix_seed(0x9e3779b97f4a7c15ULL, static_cast<std::uint64_t>(i));
  }
  column_hash_.resize(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::uint64_t h = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double v = x(i, f);
      if (v == 0.0) v = 0.0;  // fold -0
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      h = mix_seed(h ^ bits, static_cast<std::uint64_t>(i));
    }
    column_hash_[static_cast<std::size_t>(f)] = h;
  }
}

RegressionTree TreeBuilder::fit(const Eigen::VectorXd& target) const {
  return fit(target, [&](const std::vector<int>& rows) {
    double s = 0.0;
    for (int r : rows) s += target(r);
    return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
  });
}

RegressionTree TreeBuilder::grow(const Eigen::VectorXd& target,
                                 std::vector<std::vector<int>>& leaves) const {
  const auto n = static_cast<int>(x_.rows());
  const auto d = static_cast<int>(x_.cols());
  RegressionTree tree;
  tree.gains_ = Eigen::VectorXd::Zero(d);
  tree.nodes_.push_back({});

  std::vector<int> node_of(static_cast<std::size_t>(n), 0);
  std::vector<int> frontier{0};
  std::vector<double> node_sum{target.sum()};
  std::vector<double> node_sumsq{target.squaredNorm()};
  std::vector<int> node_count{n};

  for (int depth = 0; depth < max_depth_ && !frontier.empty(); ++depth) {
    const std::size_t slots = tree.nodes_.size();
    std::vector<char> active(slots, 0);
    for (int node : frontier) active[static_cast<std::size_t>(node)] = node_count[node] >= 2;

    // Best split per (node, feature).
    const std::size_t cells = slots * static_cast<std::size_t>(d);
    std::vector<double> feat_gain(cells, 0.0), feat_threshold(cells, 0.0);
    std::vector<std::uint64_t> feat_partition(cells, 0);
    std::vector<double> left_sum(slots), prev_value(slots);
    std::vector<int> left_count(slots);
    std::vector<std::uint64_t> left_hash(slots);
    for (int f = 0; f < d; ++f) {
      std::fill(left_sum.begin(), left_sum.end(), 0.0);
      std::fill(left_count.begin(), left_count.end(), 0);
      std::fill(left_hash.begin(), left_hash.end(), 0);
      for (int row : order_[static_cast<std::size_t>(f)]) {
        const auto node = static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)]);
        if (node >= slots || !active[node]) continue;
        const double v = x_(row, f);
        const int nl = left_count[node];
        if (nl > 0 && v > prev_value[node]) {
          const double sl = left_sum[node];
          const double sr = node_sum[node] - sl;
          const int nr = node_count[node] - nl;
          const double gain = sl * sl / nl + sr * sr / nr -
                              node_sum[node] * node_sum[node] / node_count[node];
          const std::size_t cell = node * static_cast<std::size_t>(d) + static_cast<std::size_t>(f);
          if (gain > feat_gain[cell]) {
            feat_gain[cell] = gain;
            feat_threshold[cell] = 0.5 * (prev_value[node] + v);
            if (!(feat_threshold[cell] < v)) feat_threshold[cell] = prev_value[node];
            feat_partition[cell] = left_hash[node];
          }
        }
        left_sum[node] += target(row);
        left_hash[node] += row_key_[static_cast<std::size_t>(row)];
        left_count[node] = nl + 1;
        prev_value[node] = v;
      }
    }

    std::vector<double> best_gain(slots, 0.0);
    std::vector<int> best_feature(slots, -1);
    std::vector<double> best_threshold(slots, 0.0);
    std::vector<std::vector<int>> tied(slots);
    for (int node : frontier) {
      const auto s = static_cast<std::size_t>(node);
      if (!active[s]) continue;
      const double* gains = &feat_gain[s * static_cast<std::size_t>(d)];
      const double top = *std::max_element(gains, gains + d);
      if (top <= 0.0) continue;
      for (int f = 0; f < d; ++f) {
        if (gains[f] >= top * (1.0 - 1e-12)) tied[s].push_back(f);
      }
      auto key = [&](int f) {
        const std::size_t cell = s * static_cast<std::size_t>(d) + static_cast<std::size_t>(f);
        return std::make_tuple(feat_partition[cell], column_hash_[static_cast<std::size_t>(f)], f);
      };
      int pick = tied[s].front();
      for (int f : tied[s]) {
        if (key(f) < key(pick)) pick = f;
      }
      best_gain[s] = top;
      best_feature[s] = pick;
      best_threshold[s] = feat_threshold[s * static_cast<std::size_t>(d) + static_cast<std::size_t>(pick)];
    }

    std::vector<int> next;
    std::vector<int> remap(slots, -1);
    for (int node : frontier) {
      const auto s = static_cast<std::size_t>(node);
      // A (numerically) pure node is a leaf; gains at rounding level are
      // not splits.
      const double sse = node_sumsq[s] - node_sum[s] * node_sum[s] / node_count[s];
      if (best_feature[s] < 0 || sse <= 1e-12 * node_sumsq[s] || best_gain[s] <= 1e-9 * sse) {
        continue;
      }
      const int left = static_cast<int>(tree.nodes_.size());
      tree.nodes_.push_back({});
      tree.nodes_.push_back({});
      auto& parent = tree.nodes_[s];
      parent.feature = best_feature[s];
      parent.threshold = best_threshold[s];
      parent.left = left;
      parent.right = left + 1;
      for (int f : tied[s]) tree.gains_(f) += best_gain[s] / static_cast<double>(tied[s].size());
      next.push_back(left);
      next.push_back(left + 1);
      remap[s] = left;
    }
    node_sum.resize(tree.nodes_.size(), 0.0);
    node_sumsq.resize(tree.nodes_.size(), 0.0);
    node_count.resize(tree.nodes_.size(), 0);
    for (int row = 0; row < n; ++row) {
      auto& nd = node_of[static_cast<std::size_t>(row)];
      const auto s = static_cast<std::size_t>(nd);
      if (s >= slots || remap[s] < 0) continue;
      const auto& parent = tree.nodes_[s];
      nd = x_(row, parent.feature) <= parent.threshold ? parent.left : parent.right;
      node_sum[static_cast<std::size_t>(nd)] += target(row);
      node_sumsq[static_cast<std::size_t>(nd)] += target(row) * target(row);
      node_count[static_cast<std::size_t>(nd)] += 1;
    }
    frontier = std::move(next);
  }

  leaves.assign(tree.nodes_.size(), {});
  for (int row = 0; row < n; ++row) {
    leaves[static_cast<std::size_t>(node_of[static_cast<std::size_t>(row)])].push_back(row);
  }
  return tree;
}

namespace {

Eigen::VectorXd averaged_importances(const std::vector<RegressionTree>& trees, Eigen::Index d) {
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  int used = 0;
  for (const auto& t : trees) {
    const double s = t.gains().sum();
    if (t.nodes().size() <= 1 || s <= 0.0) continue;
    total += t.gains() / s;
    ++used;
  }
  if (used == 0) return total;
  total /= used;
  const double s = total.sum();
  return s > 0.0 ? Eigen::VectorXd(total / s) : total;
}

void check_fit_input(const Eigen::MatrixXd& x, Eigen::Index n) {
  require(x.rows() == n, ErrorCode::kInvalidArgument, "gbt: row count mismatch");
  require(n >= 10, ErrorCode::kInvalidArgument, "gbt: need at least 10 labeled rows");
  require(x.cols() >= 1, ErrorCode::kInvalidArgument, "gbt: need at least one feature");
}

}  // namespace

void GbtRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const GbtOptions& options) {
  check_fit_input(x, y.size());
  init_ = y.mean();
  learning_rate_ = options.learning_rate;
  n_features_ = x.cols();
  trees_.clear();
  const TreeBuilder builder(x, options.max_depth);
  Eigen::VectorXd pred = Eigen::VectorXd::Constant(y.size(), init_);
  for (int m = 0; m < options.n_estimators; ++m) {
    const Eigen::VectorXd resid = y - pred;
    trees_.push_back(builder.fit(resid));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      pred(i) += learning_rate_ * trees_.back().predict_row(x.row(i));
    }
  }
}

Eigen::VectorXd GbtRegressor::predict(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), init_);
  for (const auto& t : trees_) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) += learning_rate_ * t.predict_row(x.row(i));
  }
  return out;
}

Eigen::VectorXd GbtRegressor::feature_importances() const {
  return averaged_importances(trees_, n_features_);
}

void GbtClassifier::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                        const GbtOptions& options) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  check_fit_input(x, n);
  classes_ = labels;
  std::sort(classes_.begin(), classes_.end());
  classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
  require(classes_.size() >= 2, ErrorCode::kDegenerate,
          "gbt: labels hold a single class, classifier is degenerate");
  const auto k = static_cast<Eigen::Index>(classes_.size());
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = std::lower_bound(classes_.begin(), classes_.end(), labels[static_cast<std::size_t>(i)]);
    y(i, it - classes_.begin()) = 1.0;
  }
  learning_rate_ = options.learning_rate;
  n_features_ = x.cols();
  trees_.clear();
  const TreeBuilder builder(x, options.max_depth);
  const Eigen::VectorXd prior = y.colwise().mean().transpose();

  if (k == 2) {
    trees_per_stage_ = 1;
    init_ = Eigen::VectorXd::Constant(1, std::log(prior(1) / prior(0)));
    Eigen::VectorXd f = Eigen::VectorXd::Constant(n, init_(0));
    const Eigen::VectorXd target = y.col(1);
    for (int m = 0; m < options.n_estimators; ++m) {
      const Eigen::VectorXd p = (1.0 + (-f).array().exp()).inverse().matrix();
      const Eigen::VectorXd resid = target - p;
      trees_.push_back(builder.fit(resid, [&](const std::vector<int>& rows) {
        double num = 0.0, den = 0.0;
        for (int r : rows) {
          num += resid(r);
          den += p(r) * (1.0 - p(r));
        }
        return std::abs(den) < 1e-150 ? 0.0 : num / den;
      }));
      for (Eigen::Index i = 0; i < n; ++i) f(i) += learning_rate_ * trees_.back().predict_row(x.row(i));
    }
    return;
  }

  trees_per_stage_ = static_cast<int>(k);
  init_ = prior.array().log().matrix();
  Eigen::MatrixXd f = init_.transpose().replicate(n, 1);
  const double factor = static_cast<double>(k - 1) / static_cast<double>(k);
  for (int m = 0; m < options.n_estimators; ++m) {
    Eigen::MatrixXd p = f;
    p.colwise() -= p.rowwise().maxCoeff();
    p = p.array().exp().matrix();
    p.array().colwise() /= p.rowwise().sum().array();
    for (Eigen::Index c = 0; c < k; ++c) {
      const Eigen::VectorXd resid = y.col(c) - p.col(c);
      trees_.push_back(builder.fit(resid, [&](const std::vector<int>& rows) {
        double num = 0.0, den = 0.0;
        for (int r : rows) {
          num += resid(r);
          den += std::abs(resid(r)) * (1.0 - std::abs(resid(r)));
        }
        return std::abs(den) < 1e-150 ? 0.0 : factor * num / den;
      }));
      for (Eigen::Index i = 0; i < n; ++i) {
        f(i, c) += learning_rate_ * trees_.back().predict_row(x.row(i));
      }
    }
  }
}

Eigen::MatrixXd GbtClassifier::decision_function(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd f = init_.transpose().replicate(x.rows(), 1);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto c = static_cast<Eigen::Index>(t % static_cast<std::size_t>(trees_per_stage_));
    for (Eigen::Index i = 0; i < x.rows(); ++i) f(i, c) += learning_rate_ * trees_[t].predict_row(x.row(i));
  }
  return f;
}

std::vector<int> GbtClassifier::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd f = decision_function(x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (trees_per_stage_ == 1) {
      out[static_cast<std::size_t>(i)] = classes_[f(i, 0) > 0.0 ? 1 : 0];
    } else {
      Eigen::Index best = 0;
      f.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = classes_[static_cast<std::size_t>(best)];
    }
  }
  return out;
}

Eigen::VectorXd GbtClassifier::feature_importances() const {
  return averaged_importances(trees_, n_features_);
}

}  // namespace compgen
