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

#include "compgen/rep_extract.hpp"

#include <fstream>

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"

namespace compgen {

namespace {

Eigen::MatrixXd to_matrix(const torch::Tensor& t) {
  const auto f = t.detach().to(torch::kFloat32).contiguous();
  Eigen::MatrixXd out(f.size(0), f.size(1));
  const auto* data = f.data_ptr<float>();
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = data[i * out.cols() + j];
  return out;
}

void check_finite(const Eigen::MatrixXd& m, RepMode mode) {
  require(m.allFinite(), ErrorCode::kDiverged,
          "non-finite entries in the " + to_string(mode) + " representation");
}

}  // namespace

RepresentationBundle extract(Model& model, ImageSource& source, std::span<const std::int64_t> ids,
                             RepMode mode, int batch_size) {
  require(!ids.empty(), ErrorCode::kInvalidArgument, "extract: empty id list");
  require(batch_size >= 1, ErrorCode::kInvalidArgument, "extract: batch size must be >= 1");
  model.module().eval();
  std::vector<Eigen::MatrixXd> parts;
  for (std::size_t start = 0; start < ids.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto n = std::min(ids.size() - start, static_cast<std::size_t>(batch_size));
    const auto x = source.fetch(ids.subspan(start, n));
    parts.push_back(to_matrix(model.represent(x, mode)));
  }
  RepresentationBundle b;
  b.mode = mode;
  b.ids.assign(ids.begin(), ids.end());
  b.features.resize(static_cast<Eigen::Index>(ids.size()), parts.front().cols());
  Eigen::Index row = 0;
  for (const auto& p : parts) {
    b.features.middleRows(row, p.rows()) = p;
    row += p.rows();
  }
  check_finite(b.features, mode);
  return b;
}

std::vector<RepresentationBundle> extract_all(Model& model, ImageSource& source,
                                              std::span<const std::int64_t> ids, int batch_size) {
  std::vector<RepresentationBundle> out;
  for (auto mode : {RepMode::kPre, RepMode::kLatent, RepMode::kPost}) {
    out.push_back(extract(model, source, ids, mode, batch_size));
  }
  return out;
}

void save_bundle(const RepresentationBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<float> values(static_cast<std::size_t>(bundle.features.size()));
  for (Eigen::Index i = 0; i < bundle.features.rows(); ++i)
    for (Eigen::Index j = 0; j < bundle.features.cols(); ++j)
      values[static_cast<std::size_t>(i * bundle.features.cols() + j)] = static_cast<float>(bundle.features(i, j));
  const auto bytes = to_le_bytes<float>(values);
  write_file_bytes(dir / "features.bin", bytes);
  write_json(dir / "meta.json", {{"format", "compgen-bundle-v1"},
                                 {"mode", to_string(bundle.mode)},
                                 {"rows", bundle.features.rows()},
                                 {"cols", bundle.features.cols()},
                                 {"dtype", "float32"},
                                 {"byte_order", "little"},
                                 {"ids", bundle.ids},
                                 {"model_ref", bundle.model_ref},
                                 {"split_ref", bundle.split_ref},
                                 {"seed", bundle.seed},
                                 {"crc32", crc32_hex(bytes)}});
}

RepresentationBundle load_bundle(const std::filesystem::path& dir) {
  const auto meta = read_json(dir / "meta.json");
  require(meta.value("format", "") == "compgen-bundle-v1", ErrorCode::kStoreCorrupt,
          "not a representation bundle: " + dir.string());
  const auto bytes = read_file_bytes(dir / "features.bin");
  require(crc32_hex(bytes) == meta.at("crc32").get<std::string>(), ErrorCode::kStoreCorrupt,
          "bundle checksum mismatch: " + dir.string());
  RepresentationBundle b;
  b.mode = parse_rep_mode(meta.at("mode").get<std::string>());
  b.ids = meta.at("ids").get<std::vector<std::int64_t>>();
  b.model_ref = meta.value("model_ref", "");
  b.split_ref = meta.value("split_ref", "");
  b.seed = meta.value("seed", std::uint64_t{0});
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  const auto values = from_le_bytes<float>(bytes);
  require(static_cast<Eigen::Index>(values.size()) == rows * cols &&
              static_cast<Eigen::Index>(b.ids.size()) == rows,
          ErrorCode::kStoreCorrupt, "bundle shape mismatch: " + dir.string());
  b.features.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) b.features(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return b;
}

std::vector<MessageRecord> dump_messages(Model& model, ImageSource& source,
                                         std::span<const std::int64_t> ids, int batch_size) {
  model.module().eval();
  std::vector<MessageRecord> out;
  for (std::size_t start = 0; start < ids.size(); start += static_cast<std::size_t>(batch_size)) {
    const auto n = std::min(ids.size() - start, static_cast<std::size_t>(batch_size));
    const auto chunk = ids.subspan(start, n);
    const auto msg = model.messages(source.fetch(chunk));
    const auto tokens = msg.tokens.contiguous();
    const auto lengths = msg.lengths.contiguous();
    for (std::size_t i = 0; i < n; ++i) {
      MessageRecord r;
      r.flat_id = chunk[i];
      const auto row = tokens[static_cast<std::int64_t>(i)];
      for (std::int64_t t = 0; t < row.size(0); ++t) r.tokens.push_back(static_cast<int>(row[t].item<std::int64_t>()));
      r.length = static_cast<int>(lengths[static_cast<std::int64_t>(i)].item<std::int64_t>());
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_messages_jsonl(const std::vector<MessageRecord>& messages, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& m : messages) {
    out << nlohmann::json{{"flat_id", m.flat_id}, {"tokens", m.tokens}, {"T", m.length}}.dump() << '\n';
  }
}

std::vector<MessageRecord> read_messages_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot read " + path.string());
  std::vector<MessageRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("flat_id").get<std::int64_t>(), j.at("tokens").get<std::vector<int>>(),
                   j.at("T").get<int>()});
  }
  return out;
}

}  // namespace compgen
