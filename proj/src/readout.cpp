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

#include <algorithm>
#include <cmath>

#include "compgen/error.hpp"

namespace compgen {

std::string to_string(ReadoutKind kind) { return kind == ReadoutKind::kLinear ? "linear" : "gbt"; }

ReadoutKind parse_readout_kind(std::string_view name) {
  if (name == "linear") return ReadoutKind::kLinear;
  if (name == "gbt") return ReadoutKind::kGbt;
  fail(ErrorCode::kConfig, "unknown readout kind '" + std::string(name) + "'");
}

std::string to_string(OracleKind kind) {
  return kind == OracleKind::kAttributes ? "attributes" : "attributes_squared";
}

R2Score r2_score(std::span<const double> y_true, std::span<const double> y_pred) {
  require(y_true.size() == y_pred.size(), ErrorCode::kInvalidArgument, "r2: length mismatch");
  require(y_true.size() >= 2, ErrorCode::kInvalidArgument, "r2: need at least two targets");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_tot = 0.0, ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot <= 0.0) return {0.0, true};
  return {1.0 - ss_res / ss_tot, false};
}

Eigen::MatrixXi labels_for(const DatasetStore& store, std::span<const std::int64_t> ids) {
  const int k = store.spec().num_factors();
  Eigen::MatrixXi out(static_cast<Eigen::Index>(ids.size()), k);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = store.labels(store.row_of(ids[i]));
    for (int j = 0; j < k; ++j) out(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
  }
  return out;
}

void check_aligned(const FeatureSet& set, const FactorSpec& spec) {
  const auto n = static_cast<Eigen::Index>(set.ids.size());
  require(set.features.rows() == n && set.labels.rows() == n, ErrorCode::kInvalidArgument,
          "readout: ids, features and labels are misaligned (" + std::to_string(n) + " ids, " +
              std::to_string(set.features.rows()) + " feature rows, " +
              std::to_string(set.labels.rows()) + " label rows)");
  require(set.labels.cols() == spec.num_factors(), ErrorCode::kInvalidArgument,
          "readout: label columns do not match the factor count");
  for (int k = 0; k < spec.num_factors(); ++k) {
    const int card = spec.factor(k).cardinality();
    require(set.labels.col(k).minCoeff() >= 0 && set.labels.col(k).maxCoeff() < card,
            ErrorCode::kInvalidArgument, "readout: label out of range for " + spec.factor(k).name);
  }
}

Eigen::MatrixXd oracle_representation(const FactorSpec& spec, const Eigen::MatrixXi& labels,
                                      OracleKind kind) {
  require(labels.cols() == spec.num_factors(), ErrorCode::kInvalidArgument,
          "oracle: label columns do not match the factor count");
  Eigen::MatrixXd out(labels.rows(), labels.cols());
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    for (int k = 0; k < spec.num_factors(); ++k) {
      const double v = spec.normalized_value(k, labels(i, k));
      out(i, k) = kind == OracleKind::kAttributes ? v : v * v;
    }
  }
  return out;
}

namespace {

std::vector<int> column(const Eigen::MatrixXi& labels, int k) {
  return {labels.col(k).data(), labels.col(k).data() + labels.rows()};
}

Eigen::VectorXd normalized_column(const FactorSpec& spec, const Eigen::MatrixXi& labels, int k) {
  Eigen::VectorXd out(labels.rows());
  for (Eigen::Index i = 0; i < labels.rows(); ++i) out(i) = spec.normalized_value(k, labels(i, k));
  return out;
}

}  // namespace

std::vector<int> TrainedReadout::predict_class(int factor, const Eigen::MatrixXd& x) const {
  require(x.cols() == n_features_, ErrorCode::kInvalidArgument, "readout: feature width mismatch");
  const auto& pf = per_factor_.at(static_cast<std::size_t>(factor));
  if (pf.constant_class) return std::vector<int>(static_cast<std::size_t>(x.rows()), *pf.constant_class);
  return kind_ == ReadoutKind::kLinear ? pf.logistic.predict(x) : pf.gbt_classifier.predict(x);
}

Eigen::VectorXd TrainedReadout::predict_value(int factor, const Eigen::MatrixXd& x) const {
  require(x.cols() == n_features_, ErrorCode::kInvalidArgument, "readout: feature width mismatch");
  require(spec_.factor(factor).kind == FactorKind::kOrdinal, ErrorCode::kInvalidArgument,
          "readout: regression is only fitted for ordinal factors");
  const auto& pf = per_factor_.at(static_cast<std::size_t>(factor));
  return kind_ == ReadoutKind::kLinear ? pf.ridge.predict(x) : pf.gbt_regressor.predict(x);
}

TrainedReadout fit_readout(const FactorSpec& spec, const FeatureSet& train, ReadoutKind kind,
                           const ReadoutOptions& options) {
  check_aligned(train, spec);
  require(train.ids.size() >= 2, ErrorCode::kInvalidArgument, "readout: need at least two labeled rows");
  if (kind == ReadoutKind::kGbt) {
    require(train.ids.size() >= 10, ErrorCode::kInvalidArgument,
            "readout: gradient-boosted probes need at least 10 labeled rows");
  }
  TrainedReadout out;
  out.spec_ = spec;
  out.kind_ = kind;
  out.n_features_ = train.features.cols();
  out.n_train_ = train.ids.size();
  for (int k = 0; k < spec.num_factors(); ++k) {
    TrainedReadout::PerFactor pf;
    const auto y = column(train.labels, k);
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
      pf.constant_class = y.front();
    } else if (kind == ReadoutKind::kLinear) {
      pf.logistic = fit_logistic(train.features, y, options.logistic);
    } else {
      pf.gbt_classifier.fit(train.features, y, options.gbt);
    }
    if (spec.factor(k).kind == FactorKind::kOrdinal) {
      const Eigen::VectorXd target = normalized_column(spec, train.labels, k);
      if (kind == ReadoutKind::kLinear) {
        pf.ridge = fit_ridge_cv(train.features, target, options.ridge_alphas);
      } else {
        pf.gbt_regressor.fit(train.features, target, options.gbt);
      }
    }
    out.per_factor_.push_back(std::move(pf));
  }
  return out;
}

ReadoutReport score_readout(const TrainedReadout& readout, const FeatureSet& eval) {
  const auto& spec = readout.spec();
  check_aligned(eval, spec);
  require(eval.ids.size() >= 2, ErrorCode::kInvalidArgument, "readout: need at least two evaluation rows");
  ReadoutReport report;
  int n_r2 = 0;
  for (int k = 0; k < spec.num_factors(); ++k) {
    FactorScore score;
    score.factor = spec.factor(k).name;
    score.ordinal = spec.factor(k).kind == FactorKind::kOrdinal;
    score.constant_classifier = readout.constant_classifier(k);
    const auto pred = readout.predict_class(k, eval.features);
    int correct = 0;
    for (Eigen::Index i = 0; i < eval.labels.rows(); ++i) {
      correct += pred[static_cast<std::size_t>(i)] == eval.labels(i, k);
    }
    score.accuracy = static_cast<double>(correct) / static_cast<double>(eval.labels.rows());
    if (score.ordinal) {
      const Eigen::VectorXd truth = normalized_column(spec, eval.labels, k);
      const Eigen::VectorXd fitted = readout.predict_value(k, eval.features);
      const auto r2 = r2_score({truth.data(), static_cast<std::size_t>(truth.size())},
                               {fitted.data(), static_cast<std::size_t>(fitted.size())});
      score.has_r2 = true;
      score.r2_raw = r2.value;
      score.r2 = r2.clipped();
      score.r2_undefined = r2.undefined;
      report.r2_macro += score.r2;
      ++n_r2;
    }
    report.accuracy_macro += score.accuracy;
    report.factors.push_back(std::move(score));
  }
  report.accuracy_macro /= spec.num_factors();
  if (n_r2 > 0) report.r2_macro /= n_r2;

  std::vector<std::string> excluded;
  for (const auto& f : report.factors) {
    if (!f.ordinal) excluded.push_back(f.factor);
  }
  report.metadata["readout"] = to_string(readout.kind());
  report.metadata["n_label"] = readout.n_train();
  report.metadata["n_eval"] = eval.ids.size();
  report.metadata["r2_excludes_categorical"] = excluded;
  return report;
}

ReadoutReport evaluate(const FeatureSet& train, const FeatureSet& test, const FactorSpec& spec,
                       ReadoutKind kind, const ReadoutOptions& options) {
  return score_readout(fit_readout(spec, train, kind, options), test);
}

nlohmann::json ReadoutReport::to_json() const {
  nlohmann::json j;
  j["accuracy_macro"] = accuracy_macro;
  j["r2_macro"] = r2_macro;
  j["metadata"] = metadata;
  auto& fs = j["factors"] = nlohmann::json::array();
  for (const auto& f : factors) {
    nlohmann::json e{{"factor", f.factor},
                     {"ordinal", f.ordinal},
                     {"accuracy", f.accuracy},
                     {"constant_classifier", f.constant_classifier}};
    if (f.has_r2) {
      e["r2"] = f.r2;
      e["r2_raw"] = f.r2_raw;
      e["r2_undefined"] = f.r2_undefined;
    }
    fs.push_back(std::move(e));
  }
  return j;
}

ReadoutReport ReadoutReport::from_json(const nlohmann::json& j) {
  ReadoutReport r;
  r.accuracy_macro = j.at("accuracy_macro").get<double>();
  r.r2_macro = j.at("r2_macro").get<double>();
  r.metadata = j.value("metadata", nlohmann::json::object());
  for (const auto& e : j.at("factors")) {
    FactorScore f;
    f.factor = e.at("factor").get<std::string>();
    f.ordinal = e.at("ordinal").get<bool>();
    f.accuracy = e.at("accuracy").get<double>();
    f.constant_classifier = e.value("constant_classifier", false);
    if (e.contains("r2")) {
      f.has_r2 = true;
      f.r2 = e.at("r2").get<double>();
      f.r2_raw = e.at("r2_raw").get<double>();
      f.r2_undefined = e.at("r2_undefined").get<bool>();
    }
    r.factors.push_back(std::move(f));
  }
  return r;
}

}  // namespace compgen
