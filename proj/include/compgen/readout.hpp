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
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "compgen/dataset_store.hpp"
#include "compgen/factor_spec.hpp"
#include "compgen/gbt.hpp"
#include "compgen/linear_models.hpp"

namespace compgen {

enum class ReadoutKind { kLinear, kGbt };
std::string to_string(ReadoutKind kind);
ReadoutKind parse_readout_kind(std::string_view name);

/// Raw coefficient of determination. `undefined` is set when y_true is
/// constant; `value` is then 0.
struct R2Score {
  double value = 0.0;
  bool undefined = false;
  double clipped() const { return value > 0.0 ? value : 0.0; }
};

R2Score r2_score(std::span<const double> y_true, std::span<const double> y_pred);

/// Features with the factor labels of the same rows.
struct FeatureSet {
  std::vector<std::int64_t> ids;
  Eigen::MatrixXd features;  // [N, d]
  Eigen::MatrixXi labels;    // [N, n_gen] value indices
};

/// Factor labels of `ids`, in order, looked up in the store.
Eigen::MatrixXi labels_for(const DatasetStore& store, std::span<const std::int64_t> ids);

/// Throws kInvalidArgument unless ids, features and labels agree in length
/// and labels are valid indices of `spec`.
void check_aligned(const FeatureSet& set, const FactorSpec& spec);

enum class OracleKind { kAttributes, kAttributesSquared };
std::string to_string(OracleKind kind);

/// Ground-truth factor values normalized to [0, 1] (optionally squared).
Eigen::MatrixXd oracle_representation(const FactorSpec& spec, const Eigen::MatrixXi& labels,
                                      OracleKind kind);

struct FactorScore {
  std::string factor;
  bool ordinal = false;
  double accuracy = 0.0;
  bool has_r2 = false;       // regression only runs on ordinal factors
  double r2 = 0.0;           // clipped at 0
  double r2_raw = 0.0;
  bool r2_undefined = false;
  bool constant_classifier = false;  // single class among the labeled rows
};

struct ReadoutReport {
  std::vector<FactorScore> factors;
  double accuracy_macro = 0.0;
  double r2_macro = 0.0;  // over ordinal factors only
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
  static ReadoutReport from_json(const nlohmann::json& j);
};

struct ReadoutOptions {
  LogisticOptions logistic;
  GbtOptions gbt;
  std::vector<double> ridge_alphas = kDefaultRidgeAlphas;
};

/// Per-factor probes fitted on one labeled feature set; reusable across
/// evaluation subsets.
class TrainedReadout {
 public:
  const FactorSpec& spec() const { return spec_; }
  ReadoutKind kind() const { return kind_; }
  std::int64_t n_features() const { return n_features_; }
  std::size_t n_train() const { return n_train_; }

  std::vector<int> predict_class(int factor, const Eigen::MatrixXd& x) const;
  /// Only valid for ordinal factors.
  Eigen::VectorXd predict_value(int factor, const Eigen::MatrixXd& x) const;

 private:
  friend TrainedReadout fit_readout(const FactorSpec&, const FeatureSet&, ReadoutKind,
                                    const ReadoutOptions&);
  struct PerFactor {
    std::optional<int> constant_class;
    LogisticClassifier logistic;
    GbtClassifier gbt_classifier;
    RidgeModel ridge;
    GbtRegressor gbt_regressor;
  };
  FactorSpec spec_;
  ReadoutKind kind_ = ReadoutKind::kLinear;
  std::int64_t n_features_ = 0;
  std::size_t n_train_ = 0;
  std::vector<PerFactor> per_factor_;

 public:
  bool constant_classifier(int factor) const {
    return per_factor_.at(static_cast<std::size_t>(factor)).constant_class.has_value();
  }
};

TrainedReadout fit_readout(const FactorSpec& spec, const FeatureSet& train, ReadoutKind kind,
                           const ReadoutOptions& options = {});

/// Accuracy on value indices for every factor; R² (clipped) of normalized
/// values for ordinal factors; macro averages over applicable factors.
ReadoutReport score_readout(const TrainedReadout& readout, const FeatureSet& eval);

ReadoutReport evaluate(const FeatureSet& train, const FeatureSet& test, const FactorSpec& spec,
                       ReadoutKind kind, const ReadoutOptions& options = {});

}  // namespace compgen
