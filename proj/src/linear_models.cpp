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

#include "compgen/linear_models.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "compgen/error.hpp"

namespace compgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_constant(const Eigen::MatrixXd& centered) {
  return centered.size() == 0 || centered.cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& x) const {
  if (intercept_only) return Eigen::VectorXd::Constant(x.rows(), intercept);
  return (x * coef).array() + intercept;
}

namespace {

struct CenteredSvd {
  Eigen::RowVectorXd x_mean;
  double y_mean = 0.0;
  Eigen::VectorXd yc;
  Eigen::MatrixXd u;
  Eigen::VectorXd s;
  Eigen::MatrixXd v;
  bool degenerate = false;
};

CenteredSvd centered_svd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  require(x.rows() == y.size(), ErrorCode::kInvalidArgument, "ridge: row count mismatch");
  require(x.rows() >= 2, ErrorCode::kInvalidArgument, "ridge: need at least two rows");
  CenteredSvd out;
  out.x_mean = x.colwise().mean();
  out.y_mean = y.mean();
  out.yc = y.array() - out.y_mean;
  const Eigen::MatrixXd xc = x.rowwise() - out.x_mean;
  if (is_constant(xc) || out.yc.cwiseAbs().maxCoeff() <= 1e-15) {
    out.degenerate = true;
    return out;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double tol = std::max(xc.rows(), xc.cols()) * std::numeric_limits<double>::epsilon() *
                     svd.singularValues()(0);
  Eigen::Index rank = 0;
  while (rank < svd.singularValues().size() && svd.singularValues()(rank) > tol) ++rank;
  out.u = svd.matrixU().leftCols(rank);
  out.s = svd.singularValues().head(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

RidgeModel solve_at(const CenteredSvd& cs, Eigen::Index n_features, double alpha) {
  RidgeModel model;
  model.alpha = alpha;
  if (cs.degenerate) {
    model.intercept_only = true;
    model.coef = Eigen::VectorXd::Zero(n_features);
    model.intercept = cs.y_mean;
    return model;
  }
  const Eigen::ArrayXd s = cs.s.array();
  const Eigen::VectorXd d = (s / (s.square() + alpha)).matrix();
  model.coef = cs.v * d.asDiagonal() * (cs.u.transpose() * cs.yc);
  model.intercept = cs.y_mean - (cs.x_mean * model.coef)(0);
  return model;
}

}  // namespace

RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha) {
  require(alpha >= 0.0, ErrorCode::kInvalidArgument, "ridge alpha must be >= 0");
  return solve_at(centered_svd(x, y), x.cols(), alpha);
}

RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const std::vector<double>& alphas) {
  require(!alphas.empty(), ErrorCode::kInvalidArgument, "ridge: empty alpha grid");
  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  const auto cs = centered_svd(x, y);
  if (cs.degenerate) return solve_at(cs, x.cols(), sorted.front());

  const auto n = static_cast<double>(x.rows());
  const Eigen::VectorXd uty = cs.u.transpose() * cs.yc;
  const Eigen::MatrixXd u2 = cs.u.array().square().matrix();
  std::vector<double> errors;
  for (double alpha : sorted) {
    const Eigen::ArrayXd s2 = cs.s.array().square();
    const Eigen::VectorXd shrink = (s2 / (s2 + alpha)).matrix();
    const Eigen::VectorXd fitted = cs.u * shrink.cwiseProduct(uty);
    // Hat diagonal of ridge on centered data plus the intercept's 1/n.
    const Eigen::VectorXd hat = (u2 * shrink).array() + 1.0 / n;
    double sse = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double resid = cs.yc(i) - fitted(i);
      const double denom = 1.0 - hat(i);
      if (denom <= 1e-12) {
        if (std::abs(resid) > 1e-12) {
          sse = kInf;
          break;
        }
        continue;
      }
      const double loo = resid / denom;
      sse += loo * loo;
    }
    errors.push_back(sse / n);
  }
  const double best = *std::min_element(errors.begin(), errors.end());
  std::size_t pick = 0;
  while (pick < errors.size() && !(errors[pick] <= best * (1.0 + 1e-9) + 1e-15)) ++pick;
  require(std::isfinite(errors[pick]), ErrorCode::kDegenerate,
          "ridge: leave-one-out error undefined for every alpha");
  auto model = solve_at(cs, x.cols(), sorted[pick]);
  model.loo_errors = std::move(errors);
  return model;
}

// ---------------------------------------------------------------------------
// Logistic regression

std::vector<double> default_logistic_cs() {
  std::vector<double> cs;
  for (int i = 0; i < 10; ++i) cs.push_back(std::pow(10.0, -4.0 + 8.0 * i / 9.0));
  return cs;
}

Eigen::MatrixXd LogisticClassifier::decision_function(const Eigen::MatrixXd& x) const {
  return (x * weights_).rowwise() + bias_.transpose();
}

std::vector<int> LogisticClassifier::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd scores = decision_function(x);
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = classes_[static_cast<std::size_t>(best)];
  }
  return out;
}

namespace {

// theta is [(d+1), K]: rows 0..d-1 are weights, row d is the bias.
class SoftmaxObjective {
 public:
  SoftmaxObjective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& onehot, double c)
      : x_(x), onehot_(onehot), c_(c) {}

  double operator()(const Eigen::MatrixXd& theta, Eigen::MatrixXd& grad) const {
    const auto d = x_.cols();
    Eigen::MatrixXd z = (x_ * theta.topRows(d)).rowwise() + theta.row(d);
    const Eigen::VectorXd zmax = z.rowwise().maxCoeff();
    z.colwise() -= zmax;
    const Eigen::VectorXd lse = z.array().exp().rowwise().sum().log().matrix();
    // loss = sum_i (lse_i - z_{i, y_i})
    const double nll = lse.sum() - (z.array() * onehot_.array()).sum();
    Eigen::MatrixXd p = (z.colwise() - lse).array().exp().matrix();
    p -= onehot_;
    grad.resize(theta.rows(), theta.cols());
    grad.topRows(d) = c_ * (x_.transpose() * p) + theta.topRows(d);
    grad.row(d) = c_ * p.colwise().sum();
    return c_ * nll + 0.5 * theta.topRows(d).squaredNorm();
  }

 private:
  const Eigen::MatrixXd& x_;
  const Eigen::MatrixXd& onehot_;
  double c_;
};

// Limited-memory BFGS with a backtracking Armijo line search.
Eigen::MatrixXd minimize_lbfgs(const SoftmaxObjective& f, Eigen::MatrixXd theta, int max_iter,
                               double grad_tol) {
  constexpr std::size_t kMemory = 10;
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;
  Eigen::MatrixXd grad;
  double value = f(theta, grad);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Eigen::Map<const Eigen::VectorXd> g(grad.data(), grad.size());
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol) break;

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alphas(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      const auto& [s, y] = history[i];
      alphas[i] = s.dot(q) / y.dot(s);
      q -= alphas[i] * y;
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      q *= s.dot(y) / y.squaredNorm();
    } else {
      q /= std::max(1.0, g.norm());
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const auto& [s, y] = history[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alphas[i] - beta) * s;
    }
    Eigen::VectorXd direction = -q;
    double slope = g.dot(direction);
    if (slope >= 0.0) {
      history.clear();
      direction = -g / std::max(1.0, g.norm());
      slope = g.dot(direction);
    }

    double step = 1.0;
    Eigen::MatrixXd candidate(theta.rows(), theta.cols());
    Eigen::MatrixXd cand_grad;
    double cand_value = value;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Eigen::Map<Eigen::VectorXd>(candidate.data(), candidate.size()) =
          Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size()) + step * direction;
      cand_value = f(candidate, cand_grad);
      if (std::isfinite(cand_value) && cand_value <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(candidate.data(), candidate.size()) -
                        Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(cand_grad.data(), cand_grad.size()) - g;
    const double previous = value;
    theta = std::move(candidate);
    grad = std::move(cand_grad);
    value = cand_value;
    if (y.dot(s) > 1e-12 * y.squaredNorm()) {
      history.emplace_back(std::move(s), std::move(y));
      if (history.size() > kMemory) history.pop_front();
    }
    if (previous - value <= 1e-12 * std::max({1.0, std::abs(value), std::abs(previous)})) break;
  }
  return theta;
}

std::vector<int> distinct_sorted(const std::vector<int>& labels) {
  std::vector<int> classes(labels);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  return classes;
}

Eigen::MatrixXd onehot_of(const std::vector<int>& labels, const std::vector<int>& classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                            static_cast<Eigen::Index>(classes.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), labels[i]);
    y(static_cast<Eigen::Index>(i), it - classes.begin()) = 1.0;
  }
  return y;
}

LogisticClassifier fit_with_classes(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                    const std::vector<int>& classes, double c,
                                    const LogisticOptions& options, const Eigen::MatrixXd* warm) {
  const auto d = x.cols();
  const auto k = static_cast<Eigen::Index>(classes.size());
  const Eigen::MatrixXd onehot = onehot_of(labels, classes);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(d + 1, k);
  if (warm != nullptr && warm->rows() == d + 1 && warm->cols() == k) theta = *warm;
  SoftmaxObjective objective(x, onehot, c);
  // The objective is C * n times the sample-averaged one the tolerance refers to.
  const double scale = c * static_cast<double>(x.rows());
  theta = minimize_lbfgs(objective, std::move(theta), options.max_iter, options.grad_tol * scale);
  return LogisticClassifier(classes, theta.topRows(d), theta.row(d).transpose(), c);
}

Eigen::MatrixXd theta_of(const LogisticClassifier& m) {
  Eigen::MatrixXd theta(m.weights().rows() + 1, m.weights().cols());
  theta.topRows(m.weights().rows()) = m.weights();
  theta.row(m.weights().rows()) = m.bias().transpose();
  return theta;
}

}  // namespace

LogisticClassifier fit_logistic_fixed(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                      double c, const LogisticOptions& options,
                                      const Eigen::MatrixXd* warm) {
  require(x.rows() == static_cast<Eigen::Index>(labels.size()), ErrorCode::kInvalidArgument,
          "logistic: row count mismatch");
  const auto classes = distinct_sorted(labels);
  require(classes.size() >= 2, ErrorCode::kDegenerate,
          "logistic: labels hold a single class, classifier is degenerate");
  return fit_with_classes(x, labels, classes, c, options, warm);
}

LogisticClassifier fit_logistic(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                const LogisticOptions& options) {
  require(x.rows() == static_cast<Eigen::Index>(labels.size()), ErrorCode::kInvalidArgument,
          "logistic: row count mismatch");
  const auto classes = distinct_sorted(labels);
  require(classes.size() >= 2, ErrorCode::kDegenerate,
          "logistic: labels hold a single class, classifier is degenerate");
  auto cs = options.cs.empty() ? default_logistic_cs() : options.cs;
  std::sort(cs.begin(), cs.end());

  // Stratified folds: members of each class are dealt round-robin in row
  // order, continuing the rotation across classes.
  const int folds = std::max(2, std::min<int>(options.folds, static_cast<int>(labels.size())));
  std::vector<int> fold_of(labels.size());
  {
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);
    int next = 0;
    for (const auto& [label, rows] : members) {
      for (auto r : rows) {
        fold_of[r] = next;
        next = (next + 1) % folds;
      }
    }
  }

  std::vector<int> correct(cs.size(), 0);
  for (int f = 0; f < folds; ++f) {
    std::vector<Eigen::Index> train_rows, eval_rows;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (fold_of[i] == f ? eval_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
    }
    const Eigen::MatrixXd xt = x(train_rows, Eigen::all);
    const Eigen::MatrixXd xe = x(eval_rows, Eigen::all);
    std::vector<int> yt, ye;
    for (auto r : train_rows) yt.push_back(labels[static_cast<std::size_t>(r)]);
    for (auto r : eval_rows) ye.push_back(labels[static_cast<std::size_t>(r)]);
    const auto fold_classes = distinct_sorted(yt);
    if (fold_classes.size() < 2) {
      // A single-class training fold predicts that class everywhere.
      for (std::size_t ci = 0; ci < cs.size(); ++ci) {
        correct[ci] += static_cast<int>(std::count(ye.begin(), ye.end(), fold_classes.front()));
      }
      continue;
    }
    Eigen::MatrixXd warm;
    for (std::size_t ci = 0; ci < cs.size(); ++ci) {
      const auto model =
          fit_with_classes(xt, yt, fold_classes, cs[ci], options, warm.size() ? &warm : nullptr);
      warm = theta_of(model);
      const auto pred = model.predict(xe);
      for (std::size_t i = 0; i < pred.size(); ++i) correct[ci] += pred[i] == ye[i];
    }
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(correct.begin(), correct.end()) - correct.begin());

  // Refit along the path up to the chosen C so the warm start matches the
  // fold fits.
  Eigen::MatrixXd warm;
  LogisticClassifier model;
  for (std::size_t ci = 0; ci <= best; ++ci) {
    model = fit_with_classes(x, labels, classes, cs[ci], options, warm.size() ? &warm : nullptr);
    warm = theta_of(model);
  }
  return model;
}

}  // namespace compgen
