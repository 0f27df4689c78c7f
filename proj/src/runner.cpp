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

#include "compgen/runner.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include <unistd.h>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/random.hpp"
#include "compgen/results.hpp"

namespace compgen {

namespace fs = std::filesystem;

namespace {

std::string split_ref(const SplitAssignment& split) { return fnv1a_hex(split.to_json().dump()); }

FeatureSet rows_of(const RepresentationBundle& bundle, std::span<const std::int64_t> ids,
                   const DatasetStore& store) {
  std::map<std::int64_t, Eigen::Index> row;
  for (std::size_t i = 0; i < bundle.ids.size(); ++i) row[bundle.ids[i]] = static_cast<Eigen::Index>(i);
  FeatureSet set;
  set.ids.assign(ids.begin(), ids.end());
  set.features.resize(static_cast<Eigen::Index>(ids.size()), bundle.features.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = row.find(ids[i]);
    require(it != row.end(), ErrorCode::kInvalidArgument,
            "representation bundle lacks id " + std::to_string(ids[i]));
    set.features.row(static_cast<Eigen::Index>(i)) = bundle.features.row(it->second);
  }
  set.labels = labels_for(store, set.ids);
  return set;
}

const RepresentationBundle& bundle_for(const std::vector<RepresentationBundle>& bundles, RepMode mode) {
  for (const auto& b : bundles) {
    if (b.mode == mode) return b;
  }
  fail(ErrorCode::kInvalidArgument, "no bundle for mode " + to_string(mode));
}

bool is_done(const fs::path& dir, const std::string& hash) {
  const auto marker = dir / "DONE";
  if (!fs::exists(marker)) return false;
  try {
    return read_json(marker).value("spec_hash", "") == hash;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

ExperimentData prepare_data(const ExperimentSpec& spec, const fs::path& out) {
  const auto factors = spec.factor_spec();
  const auto store_dir = out / "data" / "store";
  ExperimentData data;
  if (fs::exists(store_dir / "meta.json")) {
    data.store = load_store(store_dir);
    require(data.store.spec() == factors && data.store.height() == spec.resolution, ErrorCode::kConfig,
            "cached store at " + store_dir.string() + " belongs to a different dataset");
  } else {
    // Concurrent workers may race here; the loser's rename fails harmlessly.
    data.store = build_store(factors, spec.resolution);
    const auto tmp = out / "data" / ("store.tmp" + std::to_string(::getpid()));
    save_store(data.store, tmp);
    std::error_code ec;
    fs::rename(tmp, store_dir, ec);
    if (ec) fs::remove_all(tmp);
  }
  const auto split_path = out / "data" / "split.json";
  if (fs::exists(split_path)) {
    data.split = SplitAssignment::from_json(read_json(split_path));
    require(data.split.spec == factors && data.split.ratio == spec.split_ratio && data.split.seed == spec.split_seed,
            ErrorCode::kConfig, "cached split at " + split_path.string() + " belongs to a different spec");
  } else {
    data.split = make_compositional_split(factors, spec.split_ratio, spec.split_seed);
    const auto tmp = out / "data" / ("split.json.tmp" + std::to_string(::getpid()));
    write_json(tmp, data.split.to_json());
    fs::rename(tmp, split_path);
  }
  const auto problems = check_split_invariants(data.split);
  require(problems.empty(), ErrorCode::kInvalidSpec,
          "split violates its invariants: " + (problems.empty() ? std::string() : problems.front()));
  return data;
}

std::vector<nlohmann::json> readout_records(const ExperimentSpec& spec, const FactorSpec& factors,
                                            const DatasetStore& store, const SplitAssignment& split,
                                            const std::vector<RepresentationBundle>& train_bundles,
                                            const std::vector<RepresentationBundle>& test_bundles,
                                            std::uint64_t seed) {
  std::vector<nlohmann::json> out;
  for (auto mode : spec.modes) {
    const auto& train_bundle = bundle_for(train_bundles, mode);
    const auto& test_bundle = bundle_for(test_bundles, mode);
    const auto us_train = rows_of(train_bundle, split.train_ids, store);
    const auto test = rows_of(test_bundle, split.test_ids, store);
    for (int n_label : spec.n_labels) {
      const auto subset = sample_labeled_subset(split, static_cast<std::size_t>(n_label),
                                                labeled_subset_seed(seed, n_label));
      require(std::includes(split.train_ids.begin(), split.train_ids.end(), subset.ids.begin(), subset.ids.end()),
              ErrorCode::kInvalidArgument, "labeled subset escapes the train split");
      const auto s_train = rows_of(train_bundle, subset.ids, store);
      for (auto kind : spec.readouts) {
        const auto readout = fit_readout(factors, s_train, kind);
        for (const auto& [tag, set] : {std::pair<const char*, const FeatureSet*>{kSubsetSTrain, &s_train},
                                       {kSubsetUSTrain, &us_train},
                                       {kSubsetTest, &test}}) {
          auto report = score_readout(readout, *set);
          report.metadata["mode"] = to_string(mode);
          report.metadata["labeled_subset_seed"] = subset.seed;
          out.push_back({{"kind", "readout"},
                         {"subset", tag},
                         {"mode", to_string(mode)},
                         {"readout", to_string(kind)},
                         {"n_label", n_label},
                         {"report", report.to_json()}});
        }
      }
    }
  }
  return out;
}

std::uint64_t labeled_subset_seed(std::uint64_t seed, int n_label) {
  return mix_seed(seed, 0x1abe1000ULL + static_cast<std::uint64_t>(n_label));
}

MetricReport compute_metrics(const ExperimentSpec& spec, const FactorSpec& factors, const DatasetStore& store,
                             const RepresentationBundle& bundle, const std::vector<std::vector<int>>* messages,
                             std::uint64_t seed) {
  const auto labels = labels_for(store, bundle.ids);
  MetricReport report;
  report.n_samples = static_cast<std::int64_t>(bundle.ids.size());
  report.mig_bins = spec.mig_bins;
  report.seed = seed;
  const auto enabled = [&](const char* name) {
    return std::find(spec.metrics.begin(), spec.metrics.end(), name) != spec.metrics.end();
  };
  const auto guarded = [&](const char* name, auto&& body) {
    if (!enabled(name)) return;
    try {
      body();
    } catch (const Error& e) {
      report.warnings.push_back(std::string(name) + ": " + e.what());
    }
  };
  guarded("mig", [&] {
    const auto r = mig(bundle.features, labels, spec.mig_bins);
    report.mig = r.score;
    for (int k : r.excluded_factors) {
      report.warnings.push_back("mig: zero-entropy factor '" + factors.factor(k).name + "' excluded");
    }
  });
  guarded("sap", [&] { report.sap = sap(bundle.features, labels, factors).score; });
  guarded("dci", [&] {
    const auto r = dci(bundle.features, labels, seed);
    report.dci_disentanglement = r.disentanglement;
    report.dci_completeness = r.completeness;
    report.dci_informativeness = r.informativeness;
  });
  guarded("irs", [&] { report.irs = irs(bundle.features, labels).score; });
  if (messages) {
    guarded("topsim", [&] {
      const auto attrs = topsim_attributes(factors, labels, spec.topsim_encoding);
      report.topsim = topsim(attrs, *messages, spec.topsim_pair_budget, seed);
    });
  }
  return report;
}

RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  require(options.shard_count >= 1 && options.shard_index >= 0 && options.shard_index < options.shard_count,
          ErrorCode::kConfig, "invalid shard selection");
  const auto grid = expand_grid(spec);
  const auto out = resolve_output_dir(spec.output_dir);
  const auto hash = spec.hash();
  const auto log = [&](const std::string& line) {
    if (options.log) options.log(line);
  };
  const std::string worker = options.worker_id.empty() ? "w" + std::to_string(options.shard_index) : options.worker_id;
  fs::create_directories(out);
  write_json(out / "spec.json", spec.to_json());

  RunSummary summary;
  summary.output_dir = out;
  summary.spec_hash = hash;
  const auto factors = spec.factor_spec();
  auto data = prepare_data(spec, out);
  const auto sref = split_ref(data.split);

  std::size_t cell = 0;
  for (const auto& point : grid) {
    for (auto seed : spec.seeds) {
      if (static_cast<int>(cell++ % static_cast<std::size_t>(options.shard_count)) != options.shard_index) continue;
      const auto dir = out / "runs" / point.key / ("seed_" + std::to_string(seed));
      const std::string tag = point.key + " seed " + std::to_string(seed);
      if (options.resume && is_done(dir, hash)) {
        ++summary.skipped;
        log("skip " + tag + " (done)");
        continue;
      }
      fs::remove_all(dir);
      const auto start = std::chrono::steady_clock::now();
      std::string stage = "train";
      try {
        log("train " + tag);
        StoreImageSource source(data.store);
        auto tc = spec.train;
        tc.seed = seed;
        if (point.steps > 0) tc.steps = point.steps;
        auto trained = train(point.model, data.split.train_ids, source, tc, dir / "train");
        summary.training_steps += trained.steps;
        require(std::includes(data.split.train_ids.begin(), data.split.train_ids.end(), source.fetched().begin(),
                              source.fetched().end()),
                ErrorCode::kInvalidArgument, "training fetched an image outside the train split");
        auto& model = *trained.model;
        const auto model_ref = checkpoint_digest(trained.checkpoint);

        stage = "extract";
        log("extract " + tag);
        auto train_bundles = extract_all(model, source, data.split.train_ids);
        auto test_bundles = extract_all(model, source, data.split.test_ids);
        for (auto* set : {&train_bundles, &test_bundles}) {
          for (auto& b : *set) {
            b.model_ref = model_ref;
            b.split_ref = sref;
            b.seed = seed;
          }
        }
        if (spec.save_bundles) {
          for (const auto& b : train_bundles) save_bundle(b, dir / "bundles" / ("train_" + to_string(b.mode)));
          for (const auto& b : test_bundles) save_bundle(b, dir / "bundles" / ("test_" + to_string(b.mode)));
        }
        nlohmann::json artifacts = {{"checkpoint", fs::relative(trained.checkpoint, out).string()},
                                    {"loss_log", fs::relative(dir / "train" / "loss.csv", out).string()}};
        std::map<std::int64_t, std::vector<int>> tokens;
        const bool is_el = point.model.family == ModelFamily::kEl;
        if (is_el) {
          std::vector<std::int64_t> all = data.split.train_ids;
          all.insert(all.end(), data.split.test_ids.begin(), data.split.test_ids.end());
          std::sort(all.begin(), all.end());
          const auto msgs = dump_messages(model, source, all);
          write_messages_jsonl(msgs, dir / "messages.jsonl");
          artifacts["messages"] = fs::relative(dir / "messages.jsonl", out).string();
          for (const auto& m : msgs) tokens[m.flat_id] = m.tokens;
        }

        stage = "readout";
        log("readout " + tag);
        auto records = readout_records(spec, factors, data.store, data.split, train_bundles, test_bundles, seed);

        stage = "metrics";
        if (!spec.metrics.empty()) {
          log("metrics " + tag);
          const bool on_train = spec.metric_split == "train";
          for (auto mode : spec.metric_modes) {
            const auto& bundle = bundle_for(on_train ? train_bundles : test_bundles, mode);
            std::vector<std::vector<int>> msgs;
            for (auto id : bundle.ids) msgs.push_back(tokens[id]);
            const auto report = compute_metrics(spec, factors, data.store, bundle, is_el ? &msgs : nullptr, seed);
            records.push_back({{"kind", "metrics"},
                               {"subset", on_train ? kSubsetUSTrain : kSubsetTest},
                               {"mode", to_string(mode)},
                               {"readout", nullptr},
                               {"n_label", nullptr},
                               {"report", report.to_json()}});
          }
        }

        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (auto& r : records) {
          r["spec_hash"] = hash;
          r["grid_key"] = point.key;
          r["coords"] = point.coords;
          r["seed"] = seed;
          r["split_ratio"] = spec.split_ratio;
          r["model_ref"] = model_ref;
          r["split_ref"] = sref;
          r["wall_clock_s"] = wall;
          r["artifacts"] = artifacts;
        }
        append_jsonl(out / "records" / (worker + ".jsonl"), records);
        write_json(dir / "DONE", {{"spec_hash", hash}, {"records", records.size()}, {"wall_clock_s", wall}});
        summary.records += static_cast<std::int64_t>(records.size());
        ++summary.completed;
        log("done " + tag);
      } catch (const std::exception& e) {
        const auto* err = dynamic_cast<const Error*>(&e);
        append_jsonl(out / "quarantine" / (worker + ".jsonl"),
                     {{{"spec_hash", hash},
                       {"grid_key", point.key},
                       {"seed", seed},
                       {"stage", stage},
                       {"code", err ? std::string(to_string(err->code())) : std::string("exception")},
                       {"message", e.what()}}});
        ++summary.quarantined;
        log("quarantined " + tag + " at " + stage + ": " + e.what());
      }
    }
  }
  return summary;
}

std::vector<std::string> verify_output(const fs::path& out) {
  std::vector<std::string> problems;
  const auto note = [&](const std::string& p) { problems.push_back(p); };
  ExperimentData data;
  try {
    data.store = load_store(out / "data" / "store");
    if (!data.store.complete()) note("store: incomplete grid");
  } catch (const std::exception& e) {
    note(std::string("store: ") + e.what());
  }
  try {
    data.split = SplitAssignment::from_json(read_json(out / "data" / "split.json"));
    for (const auto& p : check_split_invariants(data.split)) note("split: " + p);
  } catch (const std::exception& e) {
    note(std::string("split: ") + e.what());
    return problems;
  }
  const auto sref = split_ref(data.split);
  std::vector<nlohmann::json> records;
  try {
    records = load_records(out / "records");
  } catch (const std::exception& e) {
    note(std::string("records: ") + e.what());
    return problems;
  }
  std::set<std::string> hashes;
  for (const auto& r : records) {
    const auto id = record_identity(r);
    for (const char* k : {"spec_hash", "grid_key", "seed", "kind", "subset", "mode", "report", "model_ref"}) {
      if (!r.contains(k)) note(id + ": missing '" + k + "'");
    }
    if (!r.contains("report")) continue;
    hashes.insert(r.value("spec_hash", ""));
    if (r.value("split_ref", "") != sref) note(id + ": split_ref does not match data/split.json");
    const auto subset = r.value("subset", "");
    const auto& report = r.at("report");
    if (r.value("kind", "") == "readout") {
      const auto n_eval = report.value("metadata", nlohmann::json::object()).value("n_eval", std::size_t{0});
      std::size_t expect = 0;
      if (subset == kSubsetSTrain) {
        expect = r.value("n_label", std::size_t{0});
      } else if (subset == kSubsetUSTrain) {
        expect = data.split.train_ids.size();
      } else if (subset == kSubsetTest) {
        expect = data.split.test_ids.size();
      } else {
        note(id + ": unknown subset tag '" + subset + "'");
      }
      if (expect && n_eval != expect) note(id + ": evaluated " + std::to_string(n_eval) + " rows, expected " +
                                           std::to_string(expect));
      for (const auto& f : report.value("factors", nlohmann::json::array())) {
        const double acc = f.value("accuracy", -1.0), r2 = f.value("r2", 0.0);
        if (acc < 0.0 || acc > 1.0) note(id + ": accuracy out of range");
        if (r2 < 0.0 || r2 > 1.0) note(id + ": clipped R2 out of range");
      }
    } else if (r.value("kind", "") == "metrics") {
      for (const char* m : {"mig", "sap", "irs", "dci_disentanglement", "dci_completeness", "dci_informativeness"}) {
        const auto v = report.value(m, nlohmann::json());
        if (v.is_number() && (v.get<double>() < -1e-9 || v.get<double>() > 1.0 + 1e-9)) {
          note(id + ": " + m + " out of [0, 1]");
        }
      }
      const auto t = report.value("topsim", nlohmann::json());
      if (t.is_number() && std::abs(t.get<double>()) > 1.0 + 1e-9) note(id + ": topsim out of [-1, 1]");
    } else {
      note(id + ": unknown record kind");
    }
    if (r.contains("artifacts") && r.at("artifacts").contains("checkpoint")) {
      const auto ckpt = out / r.at("artifacts").value("checkpoint", "");
      try {
        if (checkpoint_digest(ckpt) != r.value("model_ref", "")) note(id + ": checkpoint digest mismatch");
      } catch (const std::exception& e) {
        note(id + ": checkpoint: " + e.what());
      }
    }
  }
  return problems;
}

}  // namespace compgen
