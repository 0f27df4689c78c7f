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

#include "compgen/experiment.hpp"

#include <cstdlib>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"

namespace compgen {

std::string to_string(ElVariant v) {
  switch (v) {
    case ElVariant::kEl: return "el";
    case ElVariant::kElFix: return "el_fix";
    case ElVariant::kElFixDet: return "el_fix_det";
  }
  return "?";
}

ElVariant parse_el_variant(std::string_view name) {
  if (name == "el") return ElVariant::kEl;
  if (name == "el_fix") return ElVariant::kElFix;
  if (name == "el_fix_det") return ElVariant::kElFixDet;
  fail(ErrorCode::kConfig, "unknown EL variant '" + std::string(name) + "'");
}

void apply_variant(ElVariant v, ElConfig& config) {
  config.variable_length = v == ElVariant::kEl;
  config.stochastic = v != ElVariant::kElFixDet;
}

namespace {

nlohmann::json yaml_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      auto out = nlohmann::json::array();
      for (const auto& item : node) out.push_back(yaml_to_json(item));
      return out;
    }
    case YAML::NodeType::Map: {
      auto out = nlohmann::json::object();
      for (const auto& kv : node) out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return out;
    }
    case YAML::NodeType::Scalar: {
      const auto& text = node.Scalar();
      if (node.Tag() == "!") return text;  // quoted
      if (text == "true" || text == "false") return text == "true";
      if (text == "null" || text == "~") return nullptr;
      std::int64_t i = 0;
      if (YAML::convert<std::int64_t>::decode(node, i) && text.find_first_of(".eE") == std::string::npos) return i;
      double d = 0.0;
      if (YAML::convert<double>::decode(node, d)) return d;
      return text;
    }
  }
  return nullptr;
}

template <typename T>
std::vector<T> list_or_empty(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  const auto& v = j.at(key);
  if (!v.is_array()) return {v.get<T>()};
  return v.get<std::vector<T>>();
}

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!j.contains(key) || j.at(key).is_null()) return empty;
  require(j.at(key).is_object(), ErrorCode::kConfig, std::string("'") + key + "' must be a mapping");
  return j.at(key);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    require(ok, ErrorCode::kConfig, "unknown key '" + k + "' in " + where);
  }
}

}  // namespace

FactorSpec ExperimentSpec::factor_spec() const {
  if (dataset == "desk") return desk_spec();
  if (dataset == "dsprites_like") return dsprites_like_spec();
  fail(ErrorCode::kConfig, "unknown dataset '" + dataset + "'");
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json models = {{"width_multiplier", width_multiplier}, {"latent_dim", latent_dim}};
  if (!beta_vae_betas.empty()) models["beta_vae"] = {{"betas", beta_vae_betas}};
  if (!beta_tcvae_betas.empty()) models["beta_tcvae"] = {{"betas", beta_tcvae_betas}};
  if (!el_n_msg.empty() || !el_n_vocab.empty()) {
    std::vector<std::string> variants;
    for (auto v : el_variants) variants.push_back(to_string(v));
    models["el"] = {{"n_msg", el_n_msg},
                    {"n_vocab", el_n_vocab},
                    {"variants", variants},
                    {"temperature", el_temperature}};
    if (el_steps > 0) models["el"]["steps"] = el_steps;
  }
  std::vector<std::string> readout_names, mode_names, metric_mode_names;
  for (auto k : readouts) readout_names.push_back(to_string(k));
  for (auto m : modes) mode_names.push_back(to_string(m));
  for (auto m : metric_modes) metric_mode_names.push_back(to_string(m));
  auto train_json = train.to_json();
  train_json.erase("seed");  // repeat seeds drive training
  return {{"name", name},
          {"output_dir", output_dir},
          {"dataset", {{"name", dataset}, {"resolution", resolution}}},
          {"split", {{"ratio", split_ratio}, {"seed", split_seed}}},
          {"models", models},
          {"train", train_json},
          {"readout", {{"n_labels", n_labels}, {"kinds", readout_names}, {"modes", mode_names}}},
          {"metrics",
           {{"enabled", metrics},
            {"modes", metric_mode_names},
            {"split", metric_split},
            {"mig_bins", mig_bins},
            {"topsim_pair_budget", topsim_pair_budget},
            {"topsim_encoding", to_string(topsim_encoding)}}},
          {"seeds", seeds},
          {"save_bundles", save_bundles}};
}

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
  try {
    require(j.is_object(), ErrorCode::kConfig, "experiment spec must be a mapping");
    check_keys(j, {"name", "output_dir", "dataset", "split", "models", "train", "readout", "metrics", "seeds",
                   "save_bundles"},
               "experiment spec");
    ExperimentSpec s;
    s.name = j.value("name", s.name);
    s.output_dir = j.value("output_dir", s.output_dir);
    s.save_bundles = j.value("save_bundles", false);

    const auto& data = section(j, "dataset");
    check_keys(data, {"name", "resolution"}, "dataset");
    s.dataset = data.value("name", s.dataset);
    s.resolution = data.value("resolution", s.resolution);
    (void)s.factor_spec();

    const auto& split = section(j, "split");
    check_keys(split, {"ratio", "seed"}, "split");
    s.split_ratio = split.value("ratio", s.split_ratio);
    s.split_seed = split.value("seed", s.split_seed);
    require(s.split_ratio > 0.0 && s.split_ratio < 1.0, ErrorCode::kConfig, "split ratio must be in (0, 1)");

    const auto& models = section(j, "models");
    check_keys(models, {"width_multiplier", "latent_dim", "beta_vae", "beta_tcvae", "el"}, "models");
    s.width_multiplier = models.value("width_multiplier", s.width_multiplier);
    s.latent_dim = models.value("latent_dim", s.latent_dim);
    s.beta_vae_betas = list_or_empty<double>(section(models, "beta_vae"), "betas");
    s.beta_tcvae_betas = list_or_empty<double>(section(models, "beta_tcvae"), "betas");
    const auto& el = section(models, "el");
    check_keys(el, {"n_msg", "n_vocab", "variants", "temperature", "steps"}, "models.el");
    s.el_n_msg = list_or_empty<int>(el, "n_msg");
    s.el_n_vocab = list_or_empty<int>(el, "n_vocab");
    s.el_temperature = el.value("temperature", 1.0);
    if (el.contains("steps")) {
      s.el_steps = el.at("steps").get<std::int64_t>();
      require(s.el_steps >= 1, ErrorCode::kConfig, "models.el.steps must be >= 1");
    }
    for (const auto& v : list_or_empty<std::string>(el, "variants")) s.el_variants.push_back(parse_el_variant(v));
    if (s.el_variants.empty()) s.el_variants.push_back(ElVariant::kEl);
    require(s.el_n_msg.empty() == s.el_n_vocab.empty(), ErrorCode::kConfig,
            "models.el needs both n_msg and n_vocab");
    for (double b : s.beta_vae_betas) require(b >= 0.0, ErrorCode::kConfig, "beta must be >= 0");
    for (double b : s.beta_tcvae_betas) require(b >= 0.0, ErrorCode::kConfig, "beta must be >= 0");
    for (int n : s.el_n_msg) require(n >= 1, ErrorCode::kConfig, "n_msg must be >= 1");
    for (int v : s.el_n_vocab) require(v >= 2, ErrorCode::kConfig, "n_vocab must be >= 2");

    s.train = TrainConfig::from_json(section(j, "train"));

    const auto& readout = section(j, "readout");
    check_keys(readout, {"n_labels", "kinds", "modes"}, "readout");
    if (readout.contains("n_labels")) s.n_labels = list_or_empty<int>(readout, "n_labels");
    if (readout.contains("kinds")) {
      s.readouts.clear();
      for (const auto& k : list_or_empty<std::string>(readout, "kinds")) s.readouts.push_back(parse_readout_kind(k));
    }
    if (readout.contains("modes")) {
      s.modes.clear();
      for (const auto& m : list_or_empty<std::string>(readout, "modes")) s.modes.push_back(parse_rep_mode(m));
    }
    for (int n : s.n_labels) require(n >= 2, ErrorCode::kConfig, "n_labels entries must be >= 2");

    const auto& metrics = section(j, "metrics");
    check_keys(metrics, {"enabled", "modes", "split", "mig_bins", "topsim_pair_budget", "topsim_encoding"},
               "metrics");
    if (metrics.contains("enabled")) s.metrics = list_or_empty<std::string>(metrics, "enabled");
    for (const auto& m : s.metrics) {
      require(m == "mig" || m == "sap" || m == "dci" || m == "irs" || m == "topsim", ErrorCode::kConfig,
              "unknown metric '" + m + "'");
    }
    if (metrics.contains("modes")) {
      s.metric_modes.clear();
      for (const auto& m : list_or_empty<std::string>(metrics, "modes")) s.metric_modes.push_back(parse_rep_mode(m));
    }
    s.metric_split = metrics.value("split", s.metric_split);
    require(s.metric_split == "train" || s.metric_split == "test", ErrorCode::kConfig,
            "metrics.split must be train or test");
    s.mig_bins = metrics.value("mig_bins", s.mig_bins);
    s.topsim_pair_budget = metrics.value("topsim_pair_budget", s.topsim_pair_budget);
    s.topsim_encoding = parse_attribute_encoding(metrics.value("topsim_encoding", std::string("normalized_index")));

    if (j.contains("seeds")) s.seeds = list_or_empty<std::uint64_t>(j, "seeds");
    require(!s.seeds.empty(), ErrorCode::kConfig, "seeds must not be empty");
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed experiment spec: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    fail(ErrorCode::kConfig, e.what());
  }
}

std::string ExperimentSpec::hash() const {
  auto j = to_json();
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

nlohmann::json yaml_file_to_json(const std::filesystem::path& path) {
  try {
    return yaml_to_json(YAML::LoadFile(path.string()));
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::kConfig, "cannot parse " + path.string() + ": " + e.what());
  }
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::kConfig, "config not found: " + path.string());
  const auto ext = path.extension().string();
  return ExperimentSpec::from_json(ext == ".json" ? read_json(path) : yaml_file_to_json(path));
}

namespace {

std::string beta_label(double b) {
  std::ostringstream out;
  out << b;
  return out.str();
}

}  // namespace

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> out;
  ModelConfig base;
  base.channels = 1;
  base.resolution = spec.resolution;
  base.width_multiplier = spec.width_multiplier;
  base.vae.latent_dim = spec.latent_dim;

  for (double b : spec.beta_vae_betas) {
    GridPoint p{"beta_vae-b" + beta_label(b), {{"family", "beta_vae"}, {"beta", b}}, base};
    p.model.family = ModelFamily::kBetaVae;
    p.model.vae.beta = b;
    out.push_back(std::move(p));
  }
  for (double b : spec.beta_tcvae_betas) {
    GridPoint p{"beta_tcvae-b" + beta_label(b), {{"family", "beta_tcvae"}, {"beta", b}}, base};
    p.model.family = ModelFamily::kBetaTcvae;
    p.model.vae.variant = VaeVariant::kBetaTcvae;
    p.model.vae.beta = b;
    out.push_back(std::move(p));
  }
  for (auto variant : spec.el_variants) {
    for (int n_msg : spec.el_n_msg) {
      for (int n_v : spec.el_n_vocab) {
        GridPoint p{to_string(variant) + "-m" + std::to_string(n_msg) + "-v" + std::to_string(n_v), {}, base};
        p.model.family = ModelFamily::kEl;
        p.model.el.max_len = n_msg;
        p.model.el.vocab_size = n_v;
        p.model.el.temperature = spec.el_temperature;
        if (spec.el_steps > 0) p.steps = spec.el_steps;
        apply_variant(variant, p.model.el);
        p.coords = {{"family", "el"},
                    {"variant", to_string(variant)},
                    {"n_msg", n_msg},
                    {"n_vocab", n_v},
                    {"bits", p.model.el.bandwidth_bits()}};
        out.push_back(std::move(p));
      }
    }
  }
  if (out.empty()) fail(ErrorCode::kNothingToRun, "nothing to run: the model grid is empty");
  return out;
}

std::filesystem::path resolve_output_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? std::filesystem::path("compgen_out") : std::filesystem::path(dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("COMPGEN_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return std::filesystem::current_path() / p;
}

}  // namespace compgen
