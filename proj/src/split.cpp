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

#include "compgen/split.hpp"

#include <algorithm>
#include <cmath>

#include "compgen/error.hpp"
#include "compgen/random.hpp"

namespace compgen {

namespace {

// Per-(factor, value) counts of train tuples, flattened with factor offsets.
class CoverageCounter {
 public:
  explicit CoverageCounter(const FactorSpec& spec) : spec_(spec) {
    int offset = 0;
    for (int k = 0; k < spec.num_factors(); ++k) {
      offsets_.push_back(offset);
      offset += spec.factor(k).cardinality();
    }
    counts_.assign(static_cast<std::size_t>(offset), 0);
  }

  void add(std::int64_t id, int delta) {
    const auto t = spec_.to_tuple(id);
    for (std::size_t k = 0; k < t.size(); ++k) counts_[slot(static_cast<int>(k), t[k])] += delta;
  }

  std::int64_t count(int k, int v) const { return counts_[slot(k, v)]; }

  std::int64_t covered() const {
    return std::count_if(counts_.begin(), counts_.end(), [](std::int64_t c) { return c > 0; });
  }

  // Removing this tuple keeps every value it holds covered.
  bool removable(std::int64_t id) const {
    const auto t = spec_.to_tuple(id);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (counts_[slot(static_cast<int>(k), t[k])] < 2) return false;
    }
    return true;
  }

 private:
  std::size_t slot(int k, int v) const {
    return static_cast<std::size_t>(offsets_[static_cast<std::size_t>(k)] + v);
  }

  const FactorSpec& spec_;
  std::vector<int> offsets_;
  std::vector<std::int64_t> counts_;
};

}  // namespace

SplitAssignment make_compositional_split(const FactorSpec& spec, double ratio,
                                         std::uint64_t seed) {
  require(spec.num_factors() >= 2, ErrorCode::kInvalidSpec,
          "no novel combinations exist with a single factor");
  require(ratio > 0.0 && ratio < 1.0, ErrorCode::kInvalidArgument,
          "split ratio must lie in (0, 1)");
  const auto grid = spec.grid_size();
  const auto cards = spec.cardinalities();
  const int max_card = *std::max_element(cards.begin(), cards.end());
  require(std::llround(ratio * static_cast<double>(grid)) >= max_card, ErrorCode::kInvalidArgument,
          "split ratio too small to cover every factor value");

  Rng rng(seed);
  std::vector<std::int64_t> ids(static_cast<std::size_t>(grid));
  for (std::int64_t i = 0; i < grid; ++i) ids[static_cast<std::size_t>(i)] = i;
  rng.shuffle(ids);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(grid)));
  std::vector<std::int64_t> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::int64_t> test(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  CoverageCounter cover(spec);
  for (auto id : train) cover.add(id, +1);

  int repairs = 0;
  for (int k = 0; k < spec.num_factors(); ++k) {
    for (int v = 0; v < spec.factor(k).cardinality(); ++v) {
      if (cover.count(k, v) > 0) continue;
      const auto covered_before = cover.covered();

      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < test.size(); ++i) {
        if (spec.to_tuple(test[i])[static_cast<std::size_t>(k)] == v) candidates.push_back(i);
      }
      const auto pick = candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
      const auto moved = test[pick];
      test.erase(test.begin() + static_cast<std::ptrdiff_t>(pick));
      train.insert(std::upper_bound(train.begin(), train.end(), moved), moved);
      cover.add(moved, +1);
      ++repairs;

      std::vector<std::size_t> removable;
      for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i] != moved && cover.removable(train[i])) removable.push_back(i);
      }
      if (!removable.empty()) {
        const auto drop = removable[static_cast<std::size_t>(rng.uniform_index(removable.size()))];
        const auto back = train[drop];
        train.erase(train.begin() + static_cast<std::ptrdiff_t>(drop));
        test.insert(std::upper_bound(test.begin(), test.end(), back), back);
        cover.add(back, -1);
      }
      require(cover.covered() > covered_before, ErrorCode::kInvalidArgument,
              "split repair lost value coverage");
    }
  }

  SplitAssignment split;
  split.spec = spec;
  split.train_ids = std::move(train);
  split.test_ids = std::move(test);
  split.ratio = ratio;
  split.seed = seed;
  split.repairs = repairs;
  return split;
}

std::vector<std::string> check_split_invariants(const SplitAssignment& split) {
  std::vector<std::string> violations;
  const auto& spec = split.spec;
  const auto grid = spec.grid_size();
  if (!std::is_sorted(split.train_ids.begin(), split.train_ids.end()) ||
      !std::is_sorted(split.test_ids.begin(), split.test_ids.end())) {
    violations.emplace_back("id lists are not sorted");
  }
  std::vector<int> in_train(static_cast<std::size_t>(grid), 0);
  std::vector<int> in_test(static_cast<std::size_t>(grid), 0);
  for (auto id : split.train_ids) {
    if (id < 0 || id >= grid) {
      violations.emplace_back("train id out of range");
      continue;
    }
    in_train[static_cast<std::size_t>(id)] += 1;
  }
  for (auto id : split.test_ids) {
    if (id < 0 || id >= grid) {
      violations.emplace_back("test id out of range");
      continue;
    }
    in_test[static_cast<std::size_t>(id)] += 1;
  }
  for (std::int64_t id = 0; id < grid; ++id) {
    const int a = in_train[static_cast<std::size_t>(id)];
    const int b = in_test[static_cast<std::size_t>(id)];
    if (a + b == 0) violations.push_back("id " + std::to_string(id) + " in neither set");
    if (a > 0 && b > 0) violations.push_back("id " + std::to_string(id) + " in both sets");
    if (a > 1 || b > 1) violations.push_back("id " + std::to_string(id) + " duplicated");
  }
  CoverageCounter cover(spec);
  for (auto id : split.train_ids) {
    if (id >= 0 && id < grid) cover.add(id, +1);
  }
  for (int k = 0; k < spec.num_factors(); ++k) {
    for (int v = 0; v < spec.factor(k).cardinality(); ++v) {
      if (cover.count(k, v) == 0) {
        violations.push_back("factor " + spec.factor(k).name + " value " + std::to_string(v) +
                             " absent from train");
      }
    }
  }
  const auto target = std::llround(split.ratio * static_cast<double>(grid));
  if (std::llabs(static_cast<long long>(split.train_ids.size()) - target) > spec.cardinality_sum()) {
    violations.emplace_back("train size outside the repair bound");
  }
  return violations;
}

LabeledSubset sample_labeled_subset(const SplitAssignment& split, std::size_t n_label,
                                    std::uint64_t seed) {
  require(n_label <= split.train_ids.size(), ErrorCode::kInvalidArgument,
          "N_label exceeds the train split size");
  Rng rng(seed);
  LabeledSubset subset;
  subset.ids = rng.sample_without_replacement(split.train_ids, n_label);
  std::sort(subset.ids.begin(), subset.ids.end());
  subset.seed = seed;
  return subset;
}

nlohmann::json SplitAssignment::to_json() const {
  return {{"spec", spec.to_json()}, {"ratio", ratio},         {"seed", seed},
          {"repairs", repairs},     {"train_ids", train_ids}, {"test_ids", test_ids}};
}

SplitAssignment SplitAssignment::from_json(const nlohmann::json& j) {
  try {
    SplitAssignment s;
    s.spec = FactorSpec::from_json(j.at("spec"));
    s.ratio = j.at("ratio").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.repairs = j.value("repairs", 0);
    s.train_ids = j.at("train_ids").get<std::vector<std::int64_t>>();
    s.test_ids = j.at("test_ids").get<std::vector<std::int64_t>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed split: ") + e.what());
  }
}

nlohmann::json LabeledSubset::to_json() const { return {{"seed", seed}, {"ids", ids}}; }

LabeledSubset LabeledSubset::from_json(const nlohmann::json& j) {
  LabeledSubset s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.ids = j.at("ids").get<std::vector<std::int64_t>>();
  return s;
}

namespace {

FactorSpec ordinal_grid(const std::vector<int>& shape) {
  std::vector<Factor> factors;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    Factor f;
    f.name = "f" + std::to_string(k);
    for (int v = 0; v < shape[k]; ++v) f.values.push_back(v);
    factors.push_back(std::move(f));
  }
  return FactorSpec(std::move(factors));
}

}  // namespace

SplitSuiteResult run_split_property_suite(int n_splits, std::uint64_t seed) {
  const std::vector<FactorSpec> shapes{
      ordinal_grid({2, 2}),       ordinal_grid({3, 5}),          ordinal_grid({2, 3, 4}),
      ordinal_grid({4, 4, 4, 2}), dsprites_like_spec(2, 3, 4),   desk_spec()};
  SplitSuiteResult result;
  result.shapes = static_cast<int>(shapes.size());
  Rng rng(seed);
  for (int i = 0; i < n_splits; ++i) {
    const auto& spec = shapes[static_cast<std::size_t>(i) % shapes.size()];
    int max_card = 0;
    for (int c : spec.cardinalities()) max_card = std::max(max_card, c);
    // Smallest ratio whose train size can hold every value of the widest factor.
    const double lo = std::max(0.05, (max_card + 0.5) / static_cast<double>(spec.grid_size()));
    const double ratio = lo + (0.9 - lo) * rng.uniform();
    const auto split_seed = rng.next_u64();
    const auto split = make_compositional_split(spec, ratio, split_seed);
    std::string where = "grid";
    for (int c : spec.cardinalities()) where += "x" + std::to_string(c);
    where += " seed " + std::to_string(split_seed) + ": ";
    for (const auto& v : check_split_invariants(split)) result.violations.push_back(where + v);
    const auto again = make_compositional_split(spec, ratio, split_seed);
    if (again.train_ids != split.train_ids || again.test_ids != split.test_ids) {
      result.violations.push_back(where + "not reproducible");
    }
    ++result.splits;
  }
  return result;
}

}  // namespace compgen
