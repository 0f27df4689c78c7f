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

// Fixtures and brute-force oracles shared by the metric/readout unit tests and
// the acceptance binary.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "compgen/factor_spec.hpp"
#include "compgen/metrics.hpp"
#include "compgen/random.hpp"
#include "compgen/readout.hpp"

namespace compgen::testing {

// ---- brute-force oracles ---------------------------------------------------

inline double mi_oracle(const std::vector<int>& u, const std::vector<int>& v) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> pu, pv;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    joint[{u[i], v[i]}] += 1 / n;
    pu[u[i]] += 1 / n;
    pv[v[i]] += 1 / n;
  }
  double mi = 0;
  for (const auto& [key, p] : joint) mi += p * std::log(p / (pu[key.first] * pv[key.second]));
  return mi;
}

inline int levenshtein_oracle(const std::string& a, const std::string& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size()) return static_cast<int>(b.size() - j);
    if (j == b.size()) return static_cast<int>(a.size() - i);
    if (auto it = memo.find({i, j}); it != memo.end()) return it->second;
    const int r = std::min({rec(i + 1, j) + 1, rec(i, j + 1) + 1, rec(i + 1, j + 1) + (a[i] != b[j])});
    return memo[{i, j}] = r;
  };
  return rec(0, 0);
}

inline double spearman_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) less += w < v[i], equal += w == v[i];
      r[i] = less + (equal + 1) / 2;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += rx[i] / n, my += ry[i] / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double topsim_oracle(const Eigen::MatrixXd& attrs, const std::vector<std::vector<int>>& messages) {
  std::vector<double> da, dm;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    for (std::size_t j = i + 1; j < messages.size(); ++j) {
      const Eigen::VectorXd a = attrs.row(static_cast<Eigen::Index>(i));
      const Eigen::VectorXd b = attrs.row(static_cast<Eigen::Index>(j));
      const double cos = a.dot(b) / (a.norm() * b.norm());
      da.push_back(std::round((1 - cos) * 1e12) / 1e12);
      std::string sa, sb;
      for (int t : messages[i]) sa += static_cast<char>('a' + t);
      for (int t : messages[j]) sb += static_cast<char>('a' + t);
      dm.push_back(levenshtein_oracle(sa, sb));
    }
  }
  return spearman_oracle(da, dm);
}

// ---- fixtures --------------------------------------------------------------

inline FactorSpec small_spec() { return dsprites_like_spec(4, 5, 8); }  // 3x4x5x8x8

// Three ordinal factors with three values each.
inline FactorSpec cube_spec() {
  std::vector<Factor> fs;
  for (int k = 0; k < 3; ++k) fs.push_back({"f" + std::to_string(k), FactorKind::kOrdinal, {0, 1, 2}, {}});
  return FactorSpec(fs);
}

inline Eigen::MatrixXi grid_labels(const FactorSpec& spec) {
  Eigen::MatrixXi labels(spec.grid_size(), spec.num_factors());
  for (std::int64_t id = 0; id < spec.grid_size(); ++id) {
    const auto t = spec.to_tuple(id);
    for (int k = 0; k < spec.num_factors(); ++k) labels(id, k) = t[static_cast<std::size_t>(k)];
  }
  return labels;
}

inline Eigen::MatrixXd noisy_copy(const Eigen::MatrixXi& labels, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd z = labels.cast<double>();
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    for (Eigen::Index j = 0; j < z.cols(); ++j) z(i, j) += noise * rng.normal();
  return z;
}

inline Eigen::MatrixXd noise_latents(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.normal();
  return z;
}

inline Eigen::MatrixXi random_labels(const FactorSpec& spec, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXi labels(n, spec.num_factors());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 0; k < spec.num_factors(); ++k)
      labels(i, k) = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.factor(k).cardinality())));
  return labels;
}

inline Eigen::MatrixXd permuted_columns(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd out(z.rows(), z.cols());
  for (Eigen::Index j = 0; j < z.cols(); ++j) out.col(j) = z.col(z.cols() - 1 - j);
  return out;
}

// Normalized factor values, one column per factor.
inline Eigen::MatrixXd aligned_latents(const FactorSpec& spec, const Eigen::MatrixXi& labels) {
  Eigen::MatrixXd z(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.rows(); ++i)
    for (int k = 0; k < spec.num_factors(); ++k) z(i, k) = spec.normalized_value(k, labels(i, k));
  return z;
}

// Each column is the sum of two neighbouring factor indices.
inline Eigen::MatrixXd pairwise_sums(const Eigen::MatrixXi& labels) {
  const Eigen::MatrixXd copies = labels.cast<double>();
  Eigen::MatrixXd sums(copies.rows(), copies.cols());
  for (Eigen::Index j = 0; j < copies.cols(); ++j) sums.col(j) = copies.col(j) + copies.col((j + 1) % copies.cols());
  return sums;
}

// Message t_k = value index of factor k + 1 (0 is EOS).
inline std::vector<std::vector<int>> index_messages(const Eigen::MatrixXi& labels) {
  std::vector<std::vector<int>> out;
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    std::vector<int> m;
    for (Eigen::Index k = 0; k < labels.cols(); ++k) m.push_back(labels(i, k) + 1);
    out.push_back(m);
  }
  return out;
}

inline FeatureSet oracle_set(const FactorSpec& spec, const std::vector<std::int64_t>& ids, OracleKind kind) {
  FeatureSet set;
  set.ids = ids;
  set.labels.resize(static_cast<Eigen::Index>(ids.size()), spec.num_factors());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto t = spec.to_tuple(ids[i]);
    for (int k = 0; k < spec.num_factors(); ++k)
      set.labels(static_cast<Eigen::Index>(i), k) = t[static_cast<std::size_t>(k)];
  }
  set.features = oracle_representation(spec, set.labels, kind);
  return set;
}

}  // namespace compgen::testing
