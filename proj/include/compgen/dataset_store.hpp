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
#include <span>
#include <string>
#include <vector>

#include "compgen/factor_spec.hpp"

namespace compgen {

/// Images [N, H, W, C] (uint8, row-major) with their factor indices
/// [N, n_gen] (int32). Rows produced by `build_store` are in flat-id order.
class DatasetStore {
 public:
  DatasetStore() = default;
  DatasetStore(FactorSpec spec, int height, int width, int channels,
               std::vector<std::uint8_t> images, std::vector<std::int32_t> factor_labels,
               std::string provenance);

  const FactorSpec& spec() const { return spec_; }
  std::int64_t size() const { return size_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::int64_t image_bytes() const {
    return static_cast<std::int64_t>(height_) * width_ * channels_;
  }
  const std::string& provenance() const { return provenance_; }
  const std::vector<std::uint8_t>& images() const { return images_; }
  const std::vector<std::int32_t>& factor_labels() const { return labels_; }

  /// True when every grid tuple is present exactly once.
  bool complete() const;

  /// Row holding this flat id; throws if the store lacks it.
  std::int64_t row_of(std::int64_t flat_id) const;
  std::span<const std::uint8_t> image(std::int64_t row) const;
  std::span<const std::int32_t> labels(std::int64_t row) const;

  /// Factor-index tuple of a flat id as stored (validates presence).
  FactorTuple tuple_of(std::int64_t flat_id) const;

  friend bool operator==(const DatasetStore& a, const DatasetStore& b);

 private:
  FactorSpec spec_;
  std::int64_t size_ = 0;
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> images_;
  std::vector<std::int32_t> labels_;
  std::string provenance_;
  std::vector<std::int64_t> row_index_;
};

/// Renders the complete grid of a dSprites-like spec.
DatasetStore build_store(const FactorSpec& spec, int resolution);

/// FDS directory: meta.json + images.bin + factors.bin, little-endian, with
/// CRC-32 checksums of both payloads recorded in the metadata.
void save_store(const DatasetStore& store, const std::filesystem::path& dir);
DatasetStore load_store(const std::filesystem::path& dir);

}  // namespace compgen
