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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <unordered_set>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/random.hpp"

namespace compgen {

namespace {

void require_nonempty(std::size_t n, const char* what) {
  require(n > 0, ErrorCode::kInvalidArgument, std::string(what) + ": empty input");
}

// Maps arbitrary ints onto 0..m-1 (in sorted order).
std::vector<int> compact(std::span<const int> u, int& m) {
  std::vector<int> values(u.begin(), u.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  m = static_cast<int>(values.size());
  std::vector<int> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = static_cast<int>(std::lower_bound(values.begin(), values.end(), u[i]) - values.begin());
  }
  return out;
}

double entropy_of_counts(const std::vector<double>& counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

std::vector<int> column_of(const Eigen::MatrixXi& m, Eigen::Index k) {
  return {m.col(k).data(), m.col(k).data() + m.rows()};
}

void check_latents(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors) {
  require(latents.rows() == factors.rows(), ErrorCode::kInvalidArgument,
          "metrics: latent and factor row counts differ");
  require(latents.rows() > 0 && latents.cols() > 0 && factors.cols() > 0,
          ErrorCode::kInvalidArgument, "metrics: empty input");
}

// Linear-interpolated percentile of a sample (sorted in place).
double percentile_of(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double discrete_entropy(std::span<const int> u) {
  require_nonempty(u.size(), "entropy");
  int m = 0;
  const auto c = compact(u, m);
  std::vector<double> counts(static_cast<std::size_t>(m), 0.0);
  for (int v : c) counts[static_cast<std::size_t>(v)] += 1.0;
  return entropy_of_counts(counts, static_cast<double>(u.size()));
}

double discrete_mi(std::span<const int> u, std::span<const int> v) {
  require_nonempty(u.size(), "mutual information");
  require(u.size() == v.size(), ErrorCode::kInvalidArgument, "mutual information: length mismatch");
  int mu = 0, mv = 0;
  const auto cu = compact(u, mu);
  const auto cv = compact(v, mv);
  std::vector<double> joint(static_cast<std::size_t>(mu) * mv, 0.0);
  std::vector<double> pu(static_cast<std::size_t>(mu), 0.0), pv(static_cast<std::size_t>(mv), 0.0);
  for (std::size_t i = 0; i < u.size(); ++i) {
    joint[static_cast<std::size_t>(cu[i]) * mv + cv[i]] += 1.0;
    pu[static_cast<std::size_t>(cu[i])] += 1.0;
    pv[static_cast<std::size_t>(cv[i])] += 1.0;
  }
  const auto n = static_cast<double>(u.size());
  double mi = 0.0;
  for (int a = 0; a < mu; ++a) {
    for (int b = 0; b < mv; ++b) {
      const double c = joint[static_cast<std::size_t>(a) * mv + b];
      if (c > 0.0) mi += c / n * std::log(c * n / (pu[static_cast<std::size_t>(a)] * pv[static_cast<std::size_t>(b)]));
    }
  }
  return std::max(0.0, mi);
}

std::vector<int> equal_mass_bins(std::span<const double> x, int bins) {
  require_nonempty(x.size(), "binning");
  require(bins >= 1, ErrorCode::kInvalidArgument, "binning: bins must be >= 1");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<int> out(x.size());
  const auto n = static_cast<double>(x.size());
  std::size_t below = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0 && x[order[i]] > x[order[i - 1]]) below = i;
    out[order[i]] = std::min(bins - 1, static_cast<int>(std::floor(bins * static_cast<double>(below) / n)));
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return {0.0, false};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), true};
}

}  // namespace

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  require_nonempty(x.size(), "spearman");
  require(x.size() == y.size(), ErrorCode::kInvalidArgument, "spearman: length mismatch");
  return pearson(average_ranks(x), average_ranks(y));
}

namespace {

template <typename Seq>
int levenshtein_impl(const Seq& a, const Seq& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

int levenshtein(std::span<const int> a, std::span<const int> b) { return levenshtein_impl(a, b); }
int levenshtein(std::string_view a, std::string_view b) { return levenshtein_impl(a, b); }

std::vector<int> truncate_at_eos(std::span<const int> message, int eos) {
  const auto end = std::find(message.begin(), message.end(), eos);
  return {message.begin(), end};
}

// ---------------------------------------------------------------------------

MigResult mig(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors, int bins) {
  check_latents(latents, factors);
  require(latents.rows() >= 10 * static_cast<Eigen::Index>(bins), ErrorCode::kInvalidArgument,
          "mig: need at least 10 samples per bin (N=" + std::to_string(latents.rows()) +
              ", bins=" + std::to_string(bins) + ")");
  const auto d = latents.cols();
  const auto k = factors.cols();
  std::vector<std::vector<int>> binned(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col = latents.col(j);
    binned[static_cast<std::size_t>(j)] = equal_mass_bins({col.data(), static_cast<std::size_t>(col.size())}, bins);
  }
  MigResult out;
  out.mi.resize(d, k);
  out.factor_entropy.resize(k);
  double total = 0.0;
  int used = 0;
  for (Eigen::Index f = 0; f < k; ++f) {
    const auto labels = column_of(factors, f);
    out.factor_entropy(f) = discrete_entropy(labels);
    for (Eigen::Index j = 0; j < d; ++j) out.mi(j, f) = discrete_mi(binned[static_cast<std::size_t>(j)], labels);
    if (out.factor_entropy(f) <= 1e-12) {
      out.excluded_factors.push_back(static_cast<int>(f));
      continue;
    }
    std::vector<double> col(out.mi.col(f).data(), out.mi.col(f).data() + d);
    std::sort(col.begin(), col.end(), std::greater<>());
    const double gap = col[0] - (d > 1 ? col[1] : 0.0);
    total += gap / out.factor_entropy(f);
    ++used;
  }
  require(used > 0, ErrorCode::kDegenerate, "mig: every factor has zero entropy");
  out.score = total / used;
  return out;
}

namespace {

double squared_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd ca = a.array() - a.mean();
  const Eigen::ArrayXd cb = b.array() - b.mean();
  const double saa = ca.square().sum(), sbb = cb.square().sum();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  const double sab = (ca * cb).sum();
  return std::min(1.0, sab * sab / (saa * sbb));
}

double nearest_mean_balanced_accuracy(const Eigen::VectorXd& z, const std::vector<int>& y) {
  std::map<int, std::pair<double, int>> stats;
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto& s = stats[y[i]];
    s.first += z(static_cast<Eigen::Index>(i));
    s.second += 1;
  }
  std::vector<int> classes;
  std::vector<double> means;
  for (const auto& [c, s] : stats) {
    classes.push_back(c);
    means.push_back(s.first / s.second);
  }
  std::map<int, int> hits;
  for (std::size_t i = 0; i < y.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < means.size(); ++c) {
      if (std::abs(z(static_cast<Eigen::Index>(i)) - means[c]) <
          std::abs(z(static_cast<Eigen::Index>(i)) - means[best])) {
        best = c;
      }
    }
    if (classes[best] == y[i]) hits[y[i]] += 1;
  }
  double acc = 0.0;
  for (const auto& [c, s] : stats) acc += static_cast<double>(hits[c]) / s.second;
  return acc / static_cast<double>(stats.size());
}

}  // namespace

SapResult sap(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors, const FactorSpec& spec) {
  check_latents(latents, factors);
  require(factors.cols() == spec.num_factors(), ErrorCode::kInvalidArgument,
          "sap: factor columns do not match the factor spec");
  const auto d = latents.cols();
  const auto k = factors.cols();
  SapResult out;
  out.scores.resize(d, k);
  double total = 0.0;
  int used = 0;
  for (Eigen::Index f = 0; f < k; ++f) {
    const auto labels = column_of(factors, f);
    const bool constant =
        std::all_of(labels.begin(), labels.end(), [&](int v) { return v == labels.front(); });
    const bool ordinal = spec.factor(static_cast<int>(f)).kind == FactorKind::kOrdinal;
    Eigen::VectorXd target(factors.rows());
    for (Eigen::Index i = 0; i < factors.rows(); ++i) {
      target(i) = spec.normalized_value(static_cast<int>(f), factors(i, f));
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      const Eigen::VectorXd z = latents.col(j);
      out.scores(j, f) = ordinal ? squared_correlation(z, target)
                                 : nearest_mean_balanced_accuracy(z, labels);
    }
    if (constant) continue;
    std::vector<double> col(out.scores.col(f).data(), out.scores.col(f).data() + d);
    std::sort(col.begin(), col.end(), std::greater<>());
    total += col[0] - (d > 1 ? col[1] : 0.0);
    ++used;
  }
  require(used > 0, ErrorCode::kDegenerate, "sap: every factor is constant");
  out.score = total / used;
  return out;
}

DciResult dci(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors, std::uint64_t seed,
              const GbtOptions& options) {
  check_latents(latents, factors);
  const auto n = latents.rows();
  const auto d = latents.cols();
  const auto k = factors.cols();
  require(n >= 20, ErrorCode::kInvalidArgument, "dci: need at least 20 samples");

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(seed, 0xdc1));
  rng.shuffle(perm);
  const auto half = static_cast<std::size_t>(n / 2);
  std::vector<Eigen::Index> train_rows(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<Eigen::Index> test_rows(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  const Eigen::MatrixXd x_train = latents(train_rows, Eigen::all);
  const Eigen::MatrixXd x_test = latents(test_rows, Eigen::all);

  DciResult out;
  out.importance = Eigen::MatrixXd::Zero(d, k);
  double info = 0.0;
  for (Eigen::Index f = 0; f < k; ++f) {
    std::vector<int> y_train, y_test;
    for (auto r : train_rows) y_train.push_back(factors(r, f));
    for (auto r : test_rows) y_test.push_back(factors(r, f));
    std::vector<int> pred;
    if (std::all_of(y_train.begin(), y_train.end(), [&](int v) { return v == y_train.front(); })) {
      pred.assign(y_test.size(), y_train.front());
    } else {
      GbtClassifier model;
      model.fit(x_train, y_train, options);
      out.importance.col(f) = model.feature_importances().cwiseAbs();
      pred = model.predict(x_test);
    }
    int correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y_test[i];
    info += static_cast<double>(correct) / static_cast<double>(pred.size());
  }
  out.informativeness = info / static_cast<double>(k);

  const double total = out.importance.sum();
  if (total <= 0.0) return out;
  auto one_minus_entropy = [](const Eigen::VectorXd& p, Eigen::Index base) {
    if (base <= 1) return 1.0;
    const double s = p.sum();
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double q = p(i) / s;
      if (q > 0.0) h -= q * std::log(q);
    }
    return 1.0 - h / std::log(static_cast<double>(base));
  };
  for (Eigen::Index j = 0; j < d; ++j) {
    const double w = out.importance.row(j).sum();
    if (w <= 0.0) continue;
    out.disentanglement += (w / total) * one_minus_entropy(out.importance.row(j).transpose(), k);
  }
  for (Eigen::Index f = 0; f < k; ++f) {
    const double w = out.importance.col(f).sum();
    if (w <= 0.0) continue;
    out.completeness += (w / total) * one_minus_entropy(out.importance.col(f), d);
  }
  return out;
}

IrsResult irs(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors, double percentile) {
  check_latents(latents, factors);
  require(percentile >= 0.0 && percentile <= 100.0, ErrorCode::kInvalidArgument,
          "irs: percentile outside [0, 100]");
  const auto n = latents.rows();
  const auto d = latents.cols();
  const auto k = factors.cols();

  // Row groups per factor value.
  std::vector<std::map<int, std::vector<Eigen::Index>>> groups(static_cast<std::size_t>(k));
  for (Eigen::Index f = 0; f < k; ++f) {
    for (Eigen::Index i = 0; i < n; ++i) groups[static_cast<std::size_t>(f)][factors(i, f)].push_back(i);
  }

  IrsResult out;
  out.per_dim = Eigen::VectorXd::Zero(d);
  out.weights = Eigen::VectorXd::Zero(d);
  out.dependent_factor.assign(static_cast<std::size_t>(d), -1);
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd z = latents.col(j);
    const double mean = z.mean();
    const double var = (z.array() - mean).square().mean();
    const double max_dev = (z.array() - mean).abs().maxCoeff();
    if (var <= 0.0 || max_dev <= 0.0) continue;

    int best_f = 0;
    double best_spread = -1.0;
    for (Eigen::Index f = 0; f < k; ++f) {
      std::vector<double> cond;
      for (const auto& [v, rows] : groups[static_cast<std::size_t>(f)]) {
        double s = 0.0;
        for (auto r : rows) s += z(r);
        cond.push_back(s / static_cast<double>(rows.size()));
      }
      const double m = std::accumulate(cond.begin(), cond.end(), 0.0) / static_cast<double>(cond.size());
      double spread = 0.0;
      for (double c : cond) spread += (c - m) * (c - m);
      spread /= static_cast<double>(cond.size());
      if (spread > best_spread) {
        best_spread = spread;
        best_f = static_cast<int>(f);
      }
    }

    double disagreement = 0.0;
    const auto& g = groups[static_cast<std::size_t>(best_f)];
    for (const auto& [v, rows] : g) {
      double s = 0.0;
      for (auto r : rows) s += z(r);
      const double cm = s / static_cast<double>(rows.size());
      std::vector<double> dev;
      dev.reserve(rows.size());
      for (auto r : rows) dev.push_back(std::abs(z(r) - cm));
      disagreement += percentile_of(dev, percentile);
    }
    disagreement /= static_cast<double>(g.size());
    out.per_dim(j) = 1.0 - disagreement / max_dev;
    out.weights(j) = var;
    out.dependent_factor[static_cast<std::size_t>(j)] = best_f;
  }
  const double wsum = out.weights.sum();
  out.score = wsum > 0.0 ? out.per_dim.dot(out.weights) / wsum : 0.0;
  return out;
}

// ---------------------------------------------------------------------------

std::string to_string(AttributeEncoding e) {
  return e == AttributeEncoding::kNormalizedIndex ? "normalized_index" : "one_hot";
}

AttributeEncoding parse_attribute_encoding(std::string_view name) {
  if (name == "normalized_index") return AttributeEncoding::kNormalizedIndex;
  if (name == "one_hot") return AttributeEncoding::kOneHot;
  fail(ErrorCode::kConfig, "unknown attribute encoding '" + std::string(name) + "'");
}

Eigen::MatrixXd topsim_attributes(const FactorSpec& spec, const Eigen::MatrixXi& labels,
                                  AttributeEncoding encoding) {
  require(labels.cols() == spec.num_factors(), ErrorCode::kInvalidArgument,
          "topsim: label columns do not match the factor spec");
  if (encoding == AttributeEncoding::kNormalizedIndex) {
    Eigen::MatrixXd out(labels.rows(), labels.cols());
    for (Eigen::Index i = 0; i < labels.rows(); ++i) {
      for (int f = 0; f < spec.num_factors(); ++f) out(i, f) = spec.normalized_value(f, labels(i, f));
    }
    return out;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(labels.rows(), spec.cardinality_sum());
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    int offset = 0;
    for (int f = 0; f < spec.num_factors(); ++f) {
      out(i, offset + labels(i, f)) = 1.0;
      offset += spec.factor(f).cardinality();
    }
  }
  return out;
}

double cosine_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 0.0;
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

TopsimResult topsim(const Eigen::MatrixXd& attributes, const std::vector<std::vector<int>>& messages,
                    std::int64_t pair_budget, std::uint64_t seed, int eos) {
  const auto n = static_cast<std::int64_t>(messages.size());
  require(attributes.rows() == n, ErrorCode::kInvalidArgument,
          "topsim: attribute and message counts differ");
  require(n >= 10, ErrorCode::kInvalidArgument, "topsim: need at least 10 samples");
  require(pair_budget >= 1, ErrorCode::kInvalidArgument, "topsim: pair budget must be positive");

  std::vector<std::vector<int>> truncated;
  truncated.reserve(messages.size());
  for (const auto& m : messages) truncated.push_back(truncate_at_eos(m, eos));

  const std::int64_t total_pairs = n * (n - 1) / 2;
  std::vector<std::int64_t> pair_index;
  TopsimResult out;
  if (total_pairs <= pair_budget) {
    out.exhaustive = true;
    pair_index.resize(static_cast<std::size_t>(total_pairs));
    std::iota(pair_index.begin(), pair_index.end(), 0);
  } else {
    // Floyd's algorithm: a uniform subset of the pair indices.
    Rng rng(mix_seed(seed, 0x7095));
    std::unordered_set<std::int64_t> chosen;
    chosen.reserve(static_cast<std::size_t>(pair_budget) * 2);
    for (std::int64_t j = total_pairs - pair_budget; j < total_pairs; ++j) {
      const auto t = static_cast<std::int64_t>(rng.uniform_index(static_cast<std::uint64_t>(j + 1)));
      if (!chosen.insert(t).second) chosen.insert(j);
    }
    pair_index.assign(chosen.begin(), chosen.end());
    std::sort(pair_index.begin(), pair_index.end());
  }

  // Pair index p enumerates (i, j), i < j, row by row.
  std::vector<double> da, dm;
  da.reserve(pair_index.size());
  dm.reserve(pair_index.size());
  std::int64_t i = 0, row_start = 0;
  for (auto p : pair_index) {
    while (p >= row_start + (n - 1 - i)) {
      row_start += n - 1 - i;
      ++i;
    }
    const std::int64_t j = i + 1 + (p - row_start);
    // Rounded so that mathematically equal distances rank as ties.
    da.push_back(std::round(cosine_distance(attributes.row(i), attributes.row(j)) * 1e12) / 1e12);
    dm.push_back(levenshtein(truncated[static_cast<std::size_t>(i)], truncated[static_cast<std::size_t>(j)]));
  }
  out.pairs = static_cast<std::int64_t>(pair_index.size());
  const auto rho = spearman(da, dm);
  out.value = rho.value;
  out.defined = rho.defined;
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("mig", mig);
  put("sap", sap);
  put("irs", irs);
  put("dci_disentanglement", dci_disentanglement);
  put("dci_completeness", dci_completeness);
  put("dci_informativeness", dci_informativeness);
  if (topsim) {
    j["topsim"] = topsim->defined ? nlohmann::json(topsim->value) : nlohmann::json(nullptr);
    j["topsim_defined"] = topsim->defined;
    j["topsim_pairs"] = topsim->pairs;
    j["topsim_exhaustive"] = topsim->exhaustive;
  }
  j["n_samples"] = n_samples;
  j["mig_bins"] = mig_bins;
  j["seed"] = seed;
  j["warnings"] = warnings;
  return j;
}

MetricReport MetricReport::from_json(const nlohmann::json& j) {
  MetricReport r;
  auto get = [&](const char* key, std::optional<double>& v) {
    if (j.contains(key) && j.at(key).is_number()) v = j.at(key).get<double>();
  };
  get("mig", r.mig);
  get("sap", r.sap);
  get("irs", r.irs);
  get("dci_disentanglement", r.dci_disentanglement);
  get("dci_completeness", r.dci_completeness);
  get("dci_informativeness", r.dci_informativeness);
  if (j.contains("topsim_defined")) {
    TopsimResult t;
    t.defined = j.at("topsim_defined").get<bool>();
    if (t.defined) t.value = j.at("topsim").get<double>();
    t.pairs = j.at("topsim_pairs").get<std::int64_t>();
    t.exhaustive = j.at("topsim_exhaustive").get<bool>();
    r.topsim = t;
  }
  r.n_samples = j.value("n_samples", std::int64_t{0});
  r.mig_bins = j.value("mig_bins", 20);
  r.seed = j.value("seed", std::uint64_t{0});
  r.warnings = j.value("warnings", std::vector<std::string>{});
  return r;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& column_names) {
  require(static_cast<Eigen::Index>(column_names.size()) == m.cols(), ErrorCode::kInvalidArgument,
          "matrix csv: column name count mismatch");
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  out << "dim";
  for (const auto& c : column_names) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << r;
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_double(m(r, c));
    out << '\n';
  }
}

}  // namespace compgen
