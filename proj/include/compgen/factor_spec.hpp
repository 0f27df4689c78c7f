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
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace compgen {

enum class FactorKind { kCategorical, kOrdinal };

/// One generative factor. Ordinal factors carry strictly increasing physical
/// values; categorical factors carry symbols (their physical value is the
/// index).
struct Factor {
  std::string name;
  FactorKind kind = FactorKind::kOrdinal;
  std::vector<double> values;
  std::vector<std::string> symbols;

  int cardinality() const {
    return static_cast<int>(kind == FactorKind::kCategorical ? symbols.size()
                                                             : values.size());
  }
};

using FactorTuple = std::vector<int>;

/// The factor grid of a dataset. Flat ids are the mixed-radix encoding of a
/// tuple, row-major over factor order (last factor varies fastest).
class FactorSpec {
 public:
  FactorSpec() = default;
  explicit FactorSpec(std::vector<Factor> factors);

  int num_factors() const { return static_cast<int>(factors_.size()); }
  const Factor& factor(int k) const { return factors_.at(static_cast<std::size_t>(k)); }
  const std::vector<Factor>& factors() const { return factors_; }
  std::vector<int> cardinalities() const;
  int cardinality_sum() const;
  std::int64_t grid_size() const { return grid_size_; }

  /// Index of the factor with this name, or -1.
  int find(std::string_view name) const;

  std::int64_t to_flat(std::span<const int> tuple) const;
  FactorTuple to_tuple(std::int64_t flat_id) const;
  bool is_valid(std::span<const int> tuple) const;

  /// Physical value of factor k at index i (the index itself for categorical).
  double value(int k, int index) const;
  /// Physical value mapped affinely onto [0, 1].
  double normalized_value(int k, int index) const;

  nlohmann::json to_json() const;
  static FactorSpec from_json(const nlohmann::json& j);

  friend bool operator==(const FactorSpec& a, const FactorSpec& b);

 private:
  std::vector<Factor> factors_;
  std::vector<std::int64_t> strides_;
  std::int64_t grid_size_ = 0;
};

/// dSprites-style grid: shape {square, ellipse, heart}, scale linear in
/// [0.5, 1], rotation evenly spaced in [0, pi/2), x and y evenly spaced in
/// [0, 1]. The defaults give the full 3x6x10x32x32 grid.
FactorSpec dsprites_like_spec(int scale_count = 6, int rotation_count = 10,
                              int position_count = 32);

/// The reduced 3x4x5x8x8 grid (3840 tuples) used for desk-scale runs.
FactorSpec desk_spec();

}  // namespace compgen
