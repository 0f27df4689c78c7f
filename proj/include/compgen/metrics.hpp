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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "compgen/factor_spec.hpp"
#include "compgen/gbt.hpp"

namespace compgen {

// ---- kernels -------------------------------------------------------------

/// Plug-in entropy (nats) of a discrete sample.
double discrete_entropy(std::span<const int> u);
/// Plug-in mutual information (nats) from the joint histogram.
double discrete_mi(std::span<const int> u, std::span<const int> v);

/// Equal-mass discretization: bin = min(bins-1, floor(bins * #{x < v} / N)),
/// so tied values share a bin.
std::vector<int> equal_mass_bins(std::span<const double> x, int bins);

struct SpearmanResult {
  double value = 0.0;
  bool defined = false;  // false when either input is constant
};
/// Pearson correlation of average ranks.
SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

int levenshtein(std::span<const int> a, std::span<const int> b);
int levenshtein(std::string_view a, std::string_view b);

/// Tokens strictly before the first EOS.
std::vector<int> truncate_at_eos(std::span<const int> message, int eos = 0);

// ---- disentanglement metrics ---------------------------------------------

struct MigResult {
  double score = 0.0;
  Eigen::MatrixXd mi;                 // [d, n_gen], nats
  Eigen::VectorXd factor_entropy;     // [n_gen], nats
  std::vector<int> excluded_factors;  // zero entropy
};
MigResult mig(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors, int bins = 20);

struct SapResult {
  double score = 0.0;
  Eigen::MatrixXd scores;  // [d, n_gen]
};
/// S[j,k]: squared correlation with the normalized value (ordinal factors);
/// balanced accuracy of the nearest-class-mean rule on z_j (categorical).
SapResult sap(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors,
              const FactorSpec& spec);

struct DciResult {
  double disentanglement = 0.0;
  double completeness = 0.0;
  double informativeness = 0.0;
  Eigen::MatrixXd importance;  // [d, n_gen]
};
/// Importances come from a per-factor gradient-boosted classifier fitted on a
/// seeded random half; informativeness is its accuracy on the other half.
DciResult dci(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors,
              std::uint64_t seed, const GbtOptions& options = {});

struct IrsResult {
  double score = 0.0;
  Eigen::VectorXd per_dim;  // [d]
  Eigen::VectorXd weights;  // latent variances (0 for constant dims)
  std::vector<int> dependent_factor;  // k(j)
};
IrsResult irs(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors,
              double percentile = 99.0);

// ---- topographic similarity ----------------------------------------------

enum class AttributeEncoding { kNormalizedIndex, kOneHot };
std::string to_string(AttributeEncoding e);
AttributeEncoding parse_attribute_encoding(std::string_view name);

/// Per-factor normalized values, or one-hot blocks per factor.
Eigen::MatrixXd topsim_attributes(const FactorSpec& spec, const Eigen::MatrixXi& labels,
                                  AttributeEncoding encoding);

/// 1 - cos(a, b); two zero vectors are at distance 0, one zero vector at 1.
double cosine_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                       const Eigen::Ref<const Eigen::RowVectorXd>& b);

struct TopsimResult {
  double value = 0.0;
  bool defined = false;
  std::int64_t pairs = 0;
  bool exhaustive = false;
};

inline constexpr std::int64_t kDefaultPairBudget = 100000;

/// Spearman correlation between cosine distances of attribute rows and
/// Levenshtein distances of the EOS-truncated messages, over all pairs when
/// C(N,2) <= pair_budget, otherwise over pair_budget pairs sampled uniformly
/// without replacement.
TopsimResult topsim(const Eigen::MatrixXd& attributes, const std::vector<std::vector<int>>& messages,
                    std::int64_t pair_budget = kDefaultPairBudget, std::uint64_t seed = 0,
                    int eos = 0);

// ---- report --------------------------------------------------------------

struct MetricReport {
  std::optional<double> mig, sap, irs;
  std::optional<double> dci_disentanglement, dci_completeness, dci_informativeness;
  std::optional<TopsimResult> topsim;
  std::int64_t n_samples = 0;
  int mig_bins = 20;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static MetricReport from_json(const nlohmann::json& j);
};

/// Writes a matrix as CSV with a header row and a leading row label column.
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& column_names);

}  // namespace compgen
