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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "compgen/factor_spec.hpp"
#include "compgen/metrics.hpp"
#include "compgen/model.hpp"
#include "compgen/readout.hpp"
#include "compgen/trainer.hpp"

namespace compgen {

/// Emergent-language ablations: `el` (variable length, Gumbel noise),
/// `el_fix` (every message uses all n_msg steps) and `el_fix_det` (fixed
/// length and no channel noise).
enum class ElVariant { kEl, kElFix, kElFixDet };
std::string to_string(ElVariant v);
ElVariant parse_el_variant(std::string_view name);
void apply_variant(ElVariant v, ElConfig& config);

struct ExperimentSpec {
  std::string name = "experiment";
  std::string output_dir;  // relative paths resolve against COMPGEN_OUTPUT_ROOT

  std::string dataset = "desk";  // desk | dsprites_like
  int resolution = 64;
  double split_ratio = 0.3;
  std::uint64_t split_seed = 0;

  int width_multiplier = 2;
  int latent_dim = 10;
  std::vector<double> beta_vae_betas;
  std::vector<double> beta_tcvae_betas;
  std::vector<int> el_n_msg;
  std::vector<int> el_n_vocab;
  std::vector<ElVariant> el_variants;
  double el_temperature = 1.0;
  std::int64_t el_steps = 0;  // 0: train.steps

  TrainConfig train;

  std::vector<int> n_labels{100, 500};
  std::vector<ReadoutKind> readouts{ReadoutKind::kLinear};
  std::vector<RepMode> modes{RepMode::kPre, RepMode::kLatent, RepMode::kPost};

  std::vector<std::string> metrics{"mig", "sap", "dci", "irs", "topsim"};
  std::vector<RepMode> metric_modes{RepMode::kLatent};
  std::string metric_split = "train";  // train | test
  int mig_bins = 20;
  std::int64_t topsim_pair_budget = kDefaultPairBudget;
  AttributeEncoding topsim_encoding = AttributeEncoding::kNormalizedIndex;

  std::vector<std::uint64_t> seeds{0, 1, 2};
  bool save_bundles = false;

  FactorSpec factor_spec() const;
  nlohmann::json to_json() const;
  static ExperimentSpec from_json(const nlohmann::json& j);
  /// FNV-1a of the canonical JSON, without output_dir.
  std::string hash() const;
};

nlohmann::json yaml_file_to_json(const std::filesystem::path& path);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

/// One model configuration of the sweep.
struct GridPoint {
  std::string key;  // filesystem-safe, unique within a spec
  nlohmann::json coords;
  ModelConfig model;
  std::int64_t steps = 0;  // training steps for this point
};

/// Throws kNothingToRun when no model family has grid values.
std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

/// spec.output_dir resolved against $COMPGEN_OUTPUT_ROOT (or the working
/// directory when unset).
std::filesystem::path resolve_output_dir(const std::string& dir);

}  // namespace compgen
