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

#include "compgen/results.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"

namespace compgen {

namespace {

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

std::string record_identity(const nlohmann::json& r) {
  return r.value("spec_hash", "") + "|" + r.value("grid_key", "") + "|" + scalar_text(r.value("seed", nlohmann::json())) +
         "|" + r.value("kind", "") + "|" + r.value("subset", "") + "|" + r.value("mode", "") + "|" +
         scalar_text(r.value("readout", nlohmann::json())) + "|" + scalar_text(r.value("n_label", nlohmann::json()));
}

std::vector<nlohmann::json> load_records(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::kIo, "no result store at " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<nlohmann::json> out;
  std::map<std::string, std::size_t> index;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json r;
      try {
        r = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        fail(ErrorCode::kStoreCorrupt, f.string() + ":" + std::to_string(lineno) + ": malformed record");
      }
      const auto id = record_identity(r);
      if (auto it = index.find(id); it != index.end()) {
        out[it->second] = std::move(r);
      } else {
        index.emplace(id, out.size());
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

void append_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::string blob;
  for (const auto& l : lines) blob += l.dump() + "\n";
  std::ofstream out(path, std::ios::app | std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot append to " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for " + path.string());
}

const std::vector<std::string>& known_group_keys() {
  static const std::vector<std::string> keys{"spec_hash", "grid_key", "family",  "beta",    "variant",
                                             "n_msg",     "n_vocab",  "bits",    "seed",    "kind",
                                             "subset",    "mode",     "readout", "n_label", "split_ratio"};
  return keys;
}

std::vector<Observation> flatten_records(const std::vector<nlohmann::json>& records) {
  std::vector<Observation> out;
  for (const auto& r : records) {
    std::map<std::string, std::string> keys;
    for (const char* k : {"spec_hash", "grid_key", "seed", "kind", "subset", "mode", "readout", "n_label",
                          "split_ratio"}) {
      if (r.contains(k) && !r.at(k).is_null()) keys[k] = scalar_text(r.at(k));
    }
    if (r.contains("coords")) {
      for (const auto& [k, v] : r.at("coords").items()) {
        if (!v.is_null()) keys[k] = scalar_text(v);
      }
    }
    const auto emit = [&](const std::string& quantity, const nlohmann::json& v) {
      if (v.is_number()) out.push_back({keys, quantity, v.get<double>()});
    };
    const auto& report = r.value("report", nlohmann::json::object());
    if (r.value("kind", "") == "readout") {
      emit("accuracy_macro", report.value("accuracy_macro", nlohmann::json()));
      const auto& factors = report.value("factors", nlohmann::json::array());
      if (std::any_of(factors.begin(), factors.end(), [](const auto& f) { return f.value("has_r2", false); })) {
        emit("r2_macro", report.value("r2_macro", nlohmann::json()));
      }
      for (const auto& f : factors) {
        const auto name = f.value("factor", std::string("?"));
        emit("accuracy:" + name, f.value("accuracy", nlohmann::json()));
        if (f.value("has_r2", false)) emit("r2:" + name, f.value("r2", nlohmann::json()));
      }
    } else if (r.value("kind", "") == "metrics") {
      for (const char* m : {"mig", "sap", "irs", "dci_disentanglement", "dci_completeness", "dci_informativeness"}) {
        emit(m, report.value(m, nlohmann::json()));
      }
      if (report.value("topsim_defined", false)) emit("topsim", report.value("topsim", nlohmann::json()));
    }
  }
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<Observation>& observations,
                                    const std::vector<std::string>& group_keys) {
  require(!observations.empty(), ErrorCode::kInvalidArgument, "aggregate: the result store is empty");
  for (const auto& k : group_keys) {
    const auto& known = known_group_keys();
    require(std::find(known.begin(), known.end(), k) != known.end(), ErrorCode::kInvalidArgument,
            "aggregate: unknown group key '" + k + "'");
    const bool present = std::any_of(observations.begin(), observations.end(),
                                     [&](const Observation& o) { return o.keys.count(k) > 0; });
    require(present, ErrorCode::kInvalidArgument, "aggregate: group key '" + k + "' is absent from every record");
  }
  std::map<std::pair<std::vector<std::string>, std::string>, AggregateRow> groups;
  for (const auto& o : observations) {
    std::vector<std::string> values;
    AggregateRow proto;
    for (const auto& k : group_keys) {
      const auto it = o.keys.find(k);
      values.push_back(it == o.keys.end() ? "" : it->second);
      proto.keys[k] = values.back();
    }
    auto [it, inserted] = groups.try_emplace({values, o.quantity}, proto);
    if (inserted) it->second.quantity = o.quantity;
    it->second.values.push_back(o.value);
  }
  std::vector<AggregateRow> out;
  for (auto& [key, row] : groups) {
    row.n = static_cast<std::int64_t>(row.values.size());
    double sum = 0.0;
    for (double v : row.values) sum += v;
    row.mean = sum / static_cast<double>(row.n);
    if (row.n > 1) {
      double ss = 0.0;
      for (double v : row.values) ss += (v - row.mean) * (v - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(row.n - 1));
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& group_keys,
                         const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& k : group_keys) out << k << ',';
  out << "quantity,mean,std,n\n";
  for (const auto& r : rows) {
    for (const auto& k : group_keys) out << r.keys.at(k) << ',';
    out << r.quantity << ',' << format_double(r.mean) << ',' << format_double(r.std) << ',' << r.n << '\n';
  }
}

}  // namespace compgen
