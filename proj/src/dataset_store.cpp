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

#include "compgen/dataset_store.hpp"

#include "compgen/error.hpp"
#include "compgen/io_util.hpp"
#include "compgen/render.hpp"

namespace compgen {

namespace fs = std::filesystem;

DatasetStore::DatasetStore(FactorSpec spec, int height, int width, int channels,
                           std::vector<std::uint8_t> images,
                           std::vector<std::int32_t> factor_labels, std::string provenance)
    : spec_(std::move(spec)),
      height_(height),
      width_(width),
      channels_(channels),
      images_(std::move(images)),
      labels_(std::move(factor_labels)),
      provenance_(std::move(provenance)) {
  require(height_ > 0 && width_ > 0 && channels_ > 0, ErrorCode::kStoreCorrupt,
          "store dimensions must be positive");
  const auto n_gen = static_cast<std::size_t>(spec_.num_factors());
  require(labels_.size() % n_gen == 0, ErrorCode::kStoreCorrupt,
          "factor label payload does not match the factor count");
  size_ = static_cast<std::int64_t>(labels_.size() / n_gen);
  require(static_cast<std::int64_t>(images_.size()) == size_ * image_bytes(),
          ErrorCode::kStoreCorrupt, "image payload does not match header shape");

  row_index_.assign(static_cast<std::size_t>(spec_.grid_size()), -1);
  std::vector<int> tuple(n_gen);
  for (std::int64_t r = 0; r < size_; ++r) {
    for (std::size_t k = 0; k < n_gen; ++k) tuple[k] = labels_[static_cast<std::size_t>(r) * n_gen + k];
    require(spec_.is_valid(tuple), ErrorCode::kStoreCorrupt,
            "row " + std::to_string(r) + " has factor labels out of range");
    const auto id = spec_.to_flat(tuple);
    require(row_index_[static_cast<std::size_t>(id)] < 0, ErrorCode::kStoreCorrupt,
            "duplicate factor tuple at row " + std::to_string(r));
    row_index_[static_cast<std::size_t>(id)] = r;
  }
}

bool DatasetStore::complete() const { return size_ == spec_.grid_size(); }

std::int64_t DatasetStore::row_of(std::int64_t flat_id) const {
  require(flat_id >= 0 && flat_id < spec_.grid_size(), ErrorCode::kInvalidArgument,
          "flat id out of range: " + std::to_string(flat_id));
  const auto row = row_index_[static_cast<std::size_t>(flat_id)];
  require(row >= 0, ErrorCode::kInvalidArgument,
          "store has no image for flat id " + std::to_string(flat_id));
  return row;
}

std::span<const std::uint8_t> DatasetStore::image(std::int64_t row) const {
  const auto bytes = static_cast<std::size_t>(image_bytes());
  return std::span<const std::uint8_t>(images_).subspan(static_cast<std::size_t>(row) * bytes, bytes);
}

std::span<const std::int32_t> DatasetStore::labels(std::int64_t row) const {
  const auto n = static_cast<std::size_t>(spec_.num_factors());
  return std::span<const std::int32_t>(labels_).subspan(static_cast<std::size_t>(row) * n, n);
}

FactorTuple DatasetStore::tuple_of(std::int64_t flat_id) const {
  const auto l = labels(row_of(flat_id));
  return FactorTuple(l.begin(), l.end());
}

bool operator==(const DatasetStore& a, const DatasetStore& b) {
  return a.spec_ == b.spec_ && a.height_ == b.height_ && a.width_ == b.width_ &&
         a.channels_ == b.channels_ && a.images_ == b.images_ && a.labels_ == b.labels_ &&
         a.provenance_ == b.provenance_;
}

DatasetStore build_store(const FactorSpec& spec, int resolution) {
  check_renderable(spec);
  const auto n = spec.grid_size();
  const auto pixels = static_cast<std::size_t>(resolution) * resolution;
  std::vector<std::uint8_t> images(static_cast<std::size_t>(n) * pixels);
  std::vector<std::int32_t> labels;
  labels.reserve(static_cast<std::size_t>(n * spec.num_factors()));
  for (std::int64_t id = 0; id < n; ++id) {
    const auto tuple = spec.to_tuple(id);
    const auto img = render(spec, tuple, resolution);
    std::copy(img.pixels.begin(), img.pixels.end(),
              images.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(id) * pixels));
    labels.insert(labels.end(), tuple.begin(), tuple.end());
  }
  return DatasetStore(spec, resolution, resolution, 1, std::move(images), std::move(labels),
                      "procedural dsprites-like renderer, resolution " + std::to_string(resolution));
}

void save_store(const DatasetStore& store, const fs::path& dir) {
  fs::create_directories(dir);
  const auto label_bytes = to_le_bytes<std::int32_t>(store.factor_labels());
  write_file_bytes(dir / "images.bin", store.images());
  write_file_bytes(dir / "factors.bin", label_bytes);
  nlohmann::json meta;
  meta["format"] = "fds-v1";
  meta["spec"] = store.spec().to_json();
  meta["N"] = store.size();
  meta["H"] = store.height();
  meta["W"] = store.width();
  meta["C"] = store.channels();
  meta["dtype"] = {{"images", "uint8"}, {"factors", "int32"}};
  meta["byte_order"] = "little-endian";
  meta["provenance"] = store.provenance();
  meta["checksum"] = {{"algorithm", "crc32"},
                      {"images", crc32_hex(store.images())},
                      {"factors", crc32_hex(label_bytes)}};
  write_json(dir / "meta.json", meta);
}

DatasetStore load_store(const fs::path& dir) {
  const auto meta = read_json(dir / "meta.json");
  try {
    require(meta.value("byte_order", "") == "little-endian", ErrorCode::kStoreCorrupt,
            "unsupported byte order");
    auto spec = FactorSpec::from_json(meta.at("spec"));
    const auto n = meta.at("N").get<std::int64_t>();
    const int h = meta.at("H").get<int>();
    const int w = meta.at("W").get<int>();
    const int c = meta.at("C").get<int>();
    auto images = read_file_bytes(dir / "images.bin");
    const auto label_bytes = read_file_bytes(dir / "factors.bin");
    require(static_cast<std::int64_t>(images.size()) == n * h * w * c, ErrorCode::kStoreCorrupt,
            "images.bin size does not match header shape");
    require(static_cast<std::int64_t>(label_bytes.size()) ==
                n * spec.num_factors() * static_cast<std::int64_t>(sizeof(std::int32_t)),
            ErrorCode::kStoreCorrupt, "factors.bin size does not match header shape");
    const auto& checksum = meta.at("checksum");
    require(crc32_hex(images) == checksum.at("images").get<std::string>(),
            ErrorCode::kStoreCorrupt, "images.bin checksum mismatch");
    require(crc32_hex(label_bytes) == checksum.at("factors").get<std::string>(),
            ErrorCode::kStoreCorrupt, "factors.bin checksum mismatch");
    return DatasetStore(std::move(spec), h, w, c, std::move(images),
                        from_le_bytes<std::int32_t>(label_bytes),
                        meta.value("provenance", std::string("external")));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kStoreCorrupt, std::string("malformed store metadata: ") + e.what());
  }
}

}  // namespace compgen
