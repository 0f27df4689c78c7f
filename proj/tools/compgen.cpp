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

// compgen: command-line front end for data generation, training, probing,
// metrics and sweeps.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>

#include "compgen/error.hpp"
#include "compgen/experiment.hpp"
#include "compgen/io_util.hpp"
#include "compgen/plots.hpp"
#include "compgen/results.hpp"
#include "compgen/runner.hpp"

namespace fs = std::filesystem;
using namespace compgen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitQuarantined = 3;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

FactorSpec dataset_spec(const std::string& name) {
  ExperimentSpec s;
  s.dataset = name;
  return s.factor_spec();
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

struct Args {
  // shared
  std::string store, split, out, output, config, dataset = "desk";
  int resolution = 64;
  std::uint64_t seed = 0;
  // split
  double ratio = 0.3;
  // train
  std::string family = "beta_vae", variant = "el";
  double beta = 1.0;
  int latent_dim = 10, n_msg = 10, n_vocab = 256, width = 2;
  TrainConfig train;
  // extract / probe / metrics
  std::string checkpoint, subset = "train", mode = "all", train_bundle, test_bundle, bundle, messages;
  std::string readout = "linear", metrics = "mig,sap,dci,irs,topsim", encoding = "normalized_index", matrices;
  int n_label = 500, bins = 20;
  bool dump_messages = false;
  // run
  std::string shard, worker;
  bool no_resume = false;
  // aggregate / plot
  std::string group_by = "family,beta,variant,n_msg,n_vocab,split_ratio,mode,readout,n_label,subset", from_csv;
  std::vector<std::string> outputs;  // aggregate / plot inputs
  bool all_hashes = false;
  bool group_by_given = false;
  PlotRequest plot;
  std::string plot_n_label;
  // verify
  int n_splits = 1000;
};

// Records of one or more experiment directories, each restricted to its
// current spec unless `all_hashes`.
std::vector<Observation> observations_for(const std::vector<std::string>& outputs, bool all_hashes) {
  std::vector<nlohmann::json> all;
  for (const auto& dir : outputs) {
    const auto output = resolve_output_dir(dir);
    auto records = load_records(output / "records");
    if (!all_hashes && fs::exists(output / "spec.json")) {
      const auto hash = ExperimentSpec::from_json(read_json(output / "spec.json")).hash();
      std::erase_if(records, [&](const nlohmann::json& r) { return r.value("spec_hash", "") != hash; });
    }
    std::move(records.begin(), records.end(), std::back_inserter(all));
  }
  return flatten_records(all);
}

int cmd_gen_data(const Args& a) {
  const auto out = a.out.empty() ? resolve_output_dir("data/store") : resolve_output_dir(a.out);
  const auto store = build_store(dataset_spec(a.dataset), a.resolution);
  save_store(store, out);
  std::cout << "wrote " << store.size() << " images to " << out.string() << '\n';
  return kExitOk;
}

int cmd_split(const Args& a) {
  const auto spec = a.store.empty() ? dataset_spec(a.dataset) : load_store(resolve_output_dir(a.store)).spec();
  const auto split = make_compositional_split(spec, a.ratio, a.seed);
  const auto problems = check_split_invariants(split);
  for (const auto& p : problems) std::cerr << "violation: " << p << '\n';
  const auto out = resolve_output_dir(a.out.empty() ? "data/split.json" : a.out);
  write_json(out, split.to_json());
  std::cout << "train " << split.train_ids.size() << " test " << split.test_ids.size() << " repairs "
            << split.repairs << " -> " << out.string() << '\n';
  return problems.empty() ? kExitOk : kExitFailure;
}

ModelConfig model_from_args(const Args& a, int resolution) {
  ModelConfig c;
  c.family = parse_model_family(a.family);
  c.resolution = resolution;
  c.width_multiplier = a.width;
  c.vae.beta = a.beta;
  c.vae.latent_dim = a.latent_dim;
  if (c.family == ModelFamily::kBetaTcvae) c.vae.variant = VaeVariant::kBetaTcvae;
  c.el.max_len = a.n_msg;
  c.el.vocab_size = a.n_vocab;
  apply_variant(parse_el_variant(a.variant), c.el);
  return c;
}

int cmd_train(const Args& a) {
  const auto store = load_store(resolve_output_dir(a.store));
  const auto split = SplitAssignment::from_json(read_json(resolve_output_dir(a.split)));
  auto tc = a.train;
  tc.seed = a.seed;
  StoreImageSource source(store);
  const auto out = resolve_output_dir(a.out.empty() ? "train" : a.out);
  const auto r = train(model_from_args(a, store.height()), split.train_ids, source, tc, out);
  std::cout << "trained " << r.steps << " steps; checkpoint " << r.checkpoint.string() << " digest "
            << checkpoint_digest(r.checkpoint) << '\n';
  if (!r.log.empty()) std::cout << "final loss " << r.log.back().at("total") << '\n';
  return kExitOk;
}

std::vector<std::int64_t> subset_ids(const SplitAssignment& split, const std::string& subset) {
  if (subset == "train") return split.train_ids;
  if (subset == "test") return split.test_ids;
  if (subset == "all") {
    auto ids = split.train_ids;
    ids.insert(ids.end(), split.test_ids.begin(), split.test_ids.end());
    std::sort(ids.begin(), ids.end());
    return ids;
  }
  fail(ErrorCode::kConfig, "subset must be train, test or all");
}

int cmd_extract(const Args& a) {
  const auto store = load_store(resolve_output_dir(a.store));
  const auto split = SplitAssignment::from_json(read_json(resolve_output_dir(a.split)));
  auto ckpt = load_checkpoint(resolve_output_dir(a.checkpoint));
  StoreImageSource source(store);
  const auto ids = subset_ids(split, a.subset);
  const auto out = resolve_output_dir(a.out.empty() ? "bundles" : a.out);
  std::vector<RepMode> modes;
  if (a.mode == "all") {
    modes = {RepMode::kPre, RepMode::kLatent, RepMode::kPost};
  } else {
    modes = {parse_rep_mode(a.mode)};
  }
  const auto model_ref = checkpoint_digest(resolve_output_dir(a.checkpoint));
  for (auto mode : modes) {
    auto b = extract(*ckpt.model, source, ids, mode);
    b.model_ref = model_ref;
    b.split_ref = fnv1a_hex(split.to_json().dump());
    b.seed = ckpt.seed;
    const auto dir = modes.size() == 1 ? out : out / to_string(mode);
    save_bundle(b, dir);
    std::cout << to_string(mode) << ": " << b.features.rows() << " x " << b.features.cols() << " -> "
              << dir.string() << '\n';
  }
  if (a.dump_messages) {
    const auto msgs = dump_messages(*ckpt.model, source, ids);
    write_messages_jsonl(msgs, out / "messages.jsonl");
    std::cout << "messages -> " << (out / "messages.jsonl").string() << '\n';
  }
  return kExitOk;
}

int cmd_probe(const Args& a) {
  const auto store = load_store(resolve_output_dir(a.store));
  const auto split = SplitAssignment::from_json(read_json(resolve_output_dir(a.split)));
  const auto train_b = load_bundle(resolve_output_dir(a.train_bundle));
  const auto test_b = load_bundle(resolve_output_dir(a.test_bundle));
  require(train_b.mode == test_b.mode && train_b.model_ref == test_b.model_ref, ErrorCode::kInvalidArgument,
          "probe: bundles come from different models or modes");
  ExperimentSpec spec;
  spec.modes = {train_b.mode};
  spec.n_labels = {a.n_label};
  spec.readouts = {parse_readout_kind(a.readout)};
  // The train bundle must cover the train split and the test bundle the test split.
  const auto records = readout_records(spec, store.spec(), store, split, {train_b}, {test_b}, a.seed);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : records) out.push_back(r);
  if (!a.out.empty()) write_json(resolve_output_dir(a.out), out);
  for (const auto& r : records) {
    std::cout << r.at("subset").get<std::string>() << ": accuracy "
              << r.at("report").at("accuracy_macro").get<double>() << " R2 "
              << r.at("report").at("r2_macro").get<double>() << '\n';
  }
  return kExitOk;
}

int cmd_metrics(const Args& a) {
  const auto store = load_store(resolve_output_dir(a.store));
  const auto bundle = load_bundle(resolve_output_dir(a.bundle));
  ExperimentSpec spec;
  spec.metrics = split_list(a.metrics);
  spec.mig_bins = a.bins;
  spec.topsim_encoding = parse_attribute_encoding(a.encoding);
  std::vector<std::vector<int>> messages;
  if (!a.messages.empty()) {
    std::map<std::int64_t, std::vector<int>> by_id;
    for (const auto& m : read_messages_jsonl(resolve_output_dir(a.messages))) by_id[m.flat_id] = m.tokens;
    for (auto id : bundle.ids) {
      const auto it = by_id.find(id);
      require(it != by_id.end(), ErrorCode::kInvalidArgument, "no message for id " + std::to_string(id));
      messages.push_back(it->second);
    }
  }
  const auto report = compute_metrics(spec, store.spec(), store, bundle, a.messages.empty() ? nullptr : &messages, a.seed);
  if (!a.out.empty()) write_json(resolve_output_dir(a.out), report.to_json());
  if (!a.matrices.empty()) {
    const auto dir = resolve_output_dir(a.matrices);
    fs::create_directories(dir);
    const auto labels = labels_for(store, bundle.ids);
    std::vector<std::string> names;
    for (const auto& f : store.spec().factors()) names.push_back(f.name);
    write_matrix_csv((dir / "mig_mi.csv").string(), mig(bundle.features, labels, a.bins).mi, names);
    write_matrix_csv((dir / "sap_scores.csv").string(), sap(bundle.features, labels, store.spec()).scores, names);
    write_matrix_csv((dir / "dci_importance.csv").string(), dci(bundle.features, labels, a.seed).importance, names);
  }
  print_json(report.to_json());
  return kExitOk;
}

std::pair<int, int> parse_shard(const std::string& text) {
  if (text.empty()) return {0, 1};
  const auto slash = text.find('/');
  require(slash != std::string::npos, ErrorCode::kConfig, "--shard must look like i/n");
  try {
    return {std::stoi(text.substr(0, slash)), std::stoi(text.substr(slash + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "--shard must look like i/n");
  }
}

int cmd_run(const Args& a) {
  auto spec = load_experiment_spec(a.config);
  if (!a.output.empty()) spec.output_dir = a.output;
  RunOptions options;
  options.resume = !a.no_resume;
  std::tie(options.shard_index, options.shard_count) = parse_shard(a.shard);
  options.worker_id = a.worker;
  const auto start = std::chrono::steady_clock::now();
  options.log = [start](const std::string& line) {
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char stamp[32];
    std::snprintf(stamp, sizeof(stamp), "[%8.1fs] ", t);
    std::cerr << stamp << line << '\n';
  };
  const auto s = run_experiment(spec, options);
  std::cout << "output " << s.output_dir.string() << "\nspec hash " << s.spec_hash << "\ncompleted " << s.completed
            << " skipped " << s.skipped << " quarantined " << s.quarantined << " records " << s.records
            << " training steps " << s.training_steps << '\n';
  return s.quarantined > 0 ? kExitQuarantined : kExitOk;
}

int cmd_aggregate(const Args& a) {
  const auto output = resolve_output_dir(a.outputs.front());
  auto keys = split_list(a.group_by);
  const auto obs = observations_for(a.outputs, a.all_hashes);
  if (!a.group_by_given) {
    // The default list names every sweep axis; keep the ones this store has.
    std::erase_if(keys, [&](const std::string& k) {
      return std::none_of(obs.begin(), obs.end(), [&](const Observation& o) { return o.keys.count(k) > 0; });
    });
  }
  const auto rows = aggregate(obs, keys);
  const auto out = a.out.empty() ? output / "aggregate.csv" : resolve_output_dir(a.out);
  write_aggregate_csv(rows, keys, out);
  std::cout << rows.size() << " rows -> " << out.string() << '\n';
  return kExitOk;
}

int cmd_plot(const Args& a) {
  PlotData plot;
  if (!a.from_csv.empty()) {
    const auto bytes = read_file_bytes(resolve_output_dir(a.from_csv));
    plot = plot_from_csv(std::string(bytes.begin(), bytes.end()));
  } else {
    auto req = a.plot;
    if (!a.plot_n_label.empty()) req.n_label = a.plot_n_label;
    require(!a.outputs.empty(), ErrorCode::kConfig, "plot: give --output or --from-csv");
    plot = build_plot(observations_for(a.outputs, a.all_hashes), req);
  }
  require(!a.out.empty() || !a.outputs.empty(), ErrorCode::kConfig, "plot: give --out with --from-csv");
  const auto stem = a.out.empty() ? resolve_output_dir(a.outputs.front()) / "plots" / plot.kind
                                  : resolve_output_dir(a.out);
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  write_plot(plot, stem);
  std::cout << stem.string() << ".svg\n" << stem.string() << ".csv\n";
  return kExitOk;
}

int cmd_verify(const Args& a) {
  int problems = 0;
  const auto suite = run_split_property_suite(a.n_splits, a.seed);
  std::cout << "split suite: " << suite.splits << " splits over " << suite.shapes << " grid shapes, "
            << suite.violations.size() << " violations\n";
  for (const auto& v : suite.violations) std::cout << "  " << v << '\n';
  problems += static_cast<int>(suite.violations.size());
  if (!a.output.empty()) {
    const auto found = verify_output(resolve_output_dir(a.output));
    std::cout << "output " << resolve_output_dir(a.output).string() << ": " << found.size() << " problems\n";
    for (const auto& p : found) std::cout << "  " << p << '\n';
    problems += static_cast<int>(found.size());
  }
  return problems == 0 ? kExitOk : kExitFailure;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kNothingToRun:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compgen: compositional generalization experiments"};
  app.require_subcommand(1);
  Args a;

  auto* gen = app.add_subcommand("gen-data", "render a factor grid into a dataset store");
  gen->add_option("--dataset", a.dataset, "desk | dsprites_like")->capture_default_str();
  gen->add_option("--resolution", a.resolution, "image side in pixels (32 or 64)")->capture_default_str();
  gen->add_option("--out", a.out, "store directory");

  auto* split = app.add_subcommand("split", "make a compositional train/test split");
  split->add_option("--store", a.store, "store directory (its factor grid is used)");
  split->add_option("--dataset", a.dataset, "factor grid when no store is given")->capture_default_str();
  split->add_option("--ratio", a.ratio, "train fraction of the grid")->capture_default_str();
  split->add_option("--seed", a.seed)->capture_default_str();
  split->add_option("--out", a.out, "split JSON path");

  auto* tr = app.add_subcommand("train", "train one model");
  tr->add_option("--store", a.store)->required();
  tr->add_option("--split", a.split)->required();
  tr->add_option("--family", a.family, "beta_vae | beta_tcvae | el")->capture_default_str();
  tr->add_option("--beta", a.beta)->capture_default_str();
  tr->add_option("--latent-dim", a.latent_dim)->capture_default_str();
  tr->add_option("--n-msg", a.n_msg)->capture_default_str();
  tr->add_option("--n-vocab", a.n_vocab)->capture_default_str();
  tr->add_option("--variant", a.variant, "el | el_fix | el_fix_det")->capture_default_str();
  tr->add_option("--width", a.width, "width multiplier")->capture_default_str();
  tr->add_option("--steps", a.train.steps)->capture_default_str();
  tr->add_option("--batch", a.train.batch_size)->capture_default_str();
  tr->add_option("--lr", a.train.learning_rate)->capture_default_str();
  tr->add_option("--checkpoint-every", a.train.checkpoint_every)->capture_default_str();
  tr->add_option("--seed", a.seed)->capture_default_str();
  tr->add_option("--out", a.out, "run directory");

  auto* ex = app.add_subcommand("extract", "extract representation bundles from a checkpoint");
  ex->add_option("--checkpoint", a.checkpoint)->required();
  ex->add_option("--store", a.store)->required();
  ex->add_option("--split", a.split)->required();
  ex->add_option("--subset", a.subset, "train | test | all")->capture_default_str();
  ex->add_option("--mode", a.mode, "pre | latent | post | all")->capture_default_str();
  ex->add_flag("--messages", a.dump_messages, "also dump greedy messages (EL)");
  ex->add_option("--out", a.out);

  auto* pr = app.add_subcommand("probe", "fit a readout on labeled train rows and score it");
  pr->add_option("--store", a.store)->required();
  pr->add_option("--split", a.split)->required();
  pr->add_option("--train-bundle", a.train_bundle)->required();
  pr->add_option("--test-bundle", a.test_bundle)->required();
  pr->add_option("--n-label", a.n_label)->capture_default_str();
  pr->add_option("--readout", a.readout, "linear | gbt")->capture_default_str();
  pr->add_option("--seed", a.seed)->capture_default_str();
  pr->add_option("--out", a.out, "report JSON path");

  auto* me = app.add_subcommand("metrics", "disentanglement metrics and topsim of a bundle");
  me->add_option("--store", a.store)->required();
  me->add_option("--bundle", a.bundle)->required();
  me->add_option("--messages", a.messages, "messages.jsonl for topsim");
  me->add_option("--metrics", a.metrics)->capture_default_str();
  me->add_option("--bins", a.bins, "MIG bins")->capture_default_str();
  me->add_option("--topsim-encoding", a.encoding, "normalized_index | one_hot")->capture_default_str();
  me->add_option("--seed", a.seed)->capture_default_str();
  me->add_option("--matrices", a.matrices, "directory for MI / SAP / importance CSVs");
  me->add_option("--out", a.out, "report JSON path");

  auto* run = app.add_subcommand("run", "run an experiment sweep from a config file");
  run->add_option("--config", a.config, "YAML or JSON experiment spec")->required();
  run->add_option("--output", a.output, "overrides output_dir");
  run->add_option("--shard", a.shard, "i/n: run every n-th grid cell starting at i");
  run->add_option("--worker", a.worker, "record file name for this process");
  run->add_flag("--no-resume", a.no_resume, "redo grid cells that are already done");

  auto* ag = app.add_subcommand("aggregate", "mean and spread over seeds");
  ag->add_option("--output", a.outputs, "experiment output directory (repeatable)")->required();
  auto* group_by = ag->add_option("--group-by", a.group_by)->capture_default_str();
  ag->add_flag("--all-hashes", a.all_hashes, "include records of earlier spec versions");
  ag->add_option("--out", a.out, "CSV path");

  auto* pl = app.add_subcommand("plot", "SVG plot with its CSV");
  pl->add_option("--output", a.outputs, "experiment output directory (repeatable)");
  pl->add_option("--from-csv", a.from_csv, "re-render a plot CSV");
  pl->add_option("--kind", a.plot.kind, "beta | bits | metric_vs_gen | bars")->capture_default_str();
  pl->add_option("--quantity", a.plot.quantity)->capture_default_str();
  pl->add_option("--subset", a.plot.subset, "S-train | US-train | Test")->capture_default_str();
  pl->add_option("--readout", a.plot.readout)->capture_default_str();
  pl->add_option("--n-label", a.plot_n_label);
  pl->add_option("--mode", a.plot.mode);
  pl->add_option("--metric", a.plot.metric)->capture_default_str();
  pl->add_option("--metric-mode", a.plot.metric_mode)->capture_default_str();
  pl->add_option("--bar-group", a.plot.bar_group)->capture_default_str();
  pl->add_flag("--all-hashes", a.all_hashes);
  pl->add_option("--out", a.out, "output path without extension");

  auto* ve = app.add_subcommand("verify", "run the split property suite and check an output directory");
  ve->add_option("--output", a.output, "experiment output directory");
  ve->add_option("--splits", a.n_splits)->capture_default_str();
  ve->add_option("--seed", a.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  a.group_by_given = group_by->count() > 0;
  try {
    if (*gen) return cmd_gen_data(a);
    if (*split) return cmd_split(a);
    if (*tr) return cmd_train(a);
    if (*ex) return cmd_extract(a);
    if (*pr) return cmd_probe(a);
    if (*me) return cmd_metrics(a);
    if (*run) return cmd_run(a);
    if (*ag) return cmd_aggregate(a);
    if (*pl) return cmd_plot(a);
    if (*ve) return cmd_verify(a);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
