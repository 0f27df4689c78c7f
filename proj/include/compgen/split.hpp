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
#include <vector>

#include <json.hpp>

#include "compgen/factor_spec.hpp"

namespace compgen {

/// Train/test partition of a factor grid in which every value of every factor
/// occurs in at least one train tuple, so test tuples are novel combinations
/// of seen values.
struct SplitAssignment {
  FactorSpec spec;
  std::vector<std::int64_t> train_ids;  // sorted
  std::vector<std::int64_t> test_ids;   // sorted
  double ratio = 0.0;
  std::uint64_t seed = 0;
  int repairs = 0;

  nlohmann::json to_json() const;
  static SplitAssignment from_json(const nlohmann::json& j);
};

struct LabeledSubset {
  std::vector<std::int64_t> ids;  // sorted, subset of train_ids
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static LabeledSubset from_json(const nlohmann::json& j);
};

/// Uniform random partition with round(ratio * |grid|) train tuples, then a
/// repair pass: each factor value missing from train pulls in one uniformly
/// chosen test tuple holding it, and a uniformly chosen train tuple whose
/// values are all covered at least twice goes back to test (when one exists).
SplitAssignment make_compositional_split(const FactorSpec& spec, double ratio,
                                         std::uint64_t seed);

/// Empty when the invariants hold; otherwise one message per violation.
std::vector<std::string> check_split_invariants(const SplitAssignment& split);

struct SplitSuiteResult {
  int splits = 0;
  int shapes = 0;
  std::vector<std::string> violations;  // prefixed with the grid shape and seed
};

/// Randomized property check: `n_splits` splits with random seeds and ratios
/// spread over several grid shapes, each checked for the invariants and for
/// being reproduced exactly by the same (ratio, seed).
SplitSuiteResult run_split_property_suite(int n_splits, std::uint64_t seed);

LabeledSubset sample_labeled_subset(const SplitAssignment& split, std::size_t n_label,
                                    std::uint64_t seed);

}  // namespace compgen
