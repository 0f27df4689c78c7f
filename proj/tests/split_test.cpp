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
#include <set>

#include <gtest/gtest.h>

#include "compgen/error.hpp"
#include "compgen/random.hpp"

namespace compgen {
namespace {

FactorSpec grid_of(const std::vector<int>& cards) {
  std::vector<Factor> factors;
  for (std::size_t k = 0; k < cards.size(); ++k) {
    Factor f{"f" + std::to_string(k), FactorKind::kOrdinal, {}, {}};
    for (int v = 0; v < cards[k]; ++v) f.values.push_back(v);
    factors.push_back(std::move(f));
  }
  return FactorSpec(std::move(factors));
}

TEST(SplitTest, TwoByTwoMatchesBruteForceBisections) {
  const auto spec = grid_of({2, 2});
  // Enumerate all 2-of-4 train sets and keep those covering every value.
  std::set<std::vector<std::int64_t>> valid;
  for (std::int64_t a = 0; a < 4; ++a) {
    for (std::int64_t b = a + 1; b < 4; ++b) {
      std::set<std::pair<int, int>> values;
      for (auto id : {a, b}) {
        const auto t = spec.to_tuple(id);
        values.insert({0, t[0]});
        values.insert({1, t[1]});
      }
      if (values.size() == 4) valid.insert({a, b});
    }
  }
  ASSERT_EQ(valid.size(), 2u);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto split = make_compositional_split(spec, 0.5, seed);
    EXPECT_TRUE(valid.contains(split.train_ids)) << "seed " << seed;
    EXPECT_EQ(split.test_ids.size(), 2u);
    EXPECT_TRUE(check_split_invariants(split).empty());
  }
}

TEST(SplitTest, DspritesTenPercentSize) {
  const auto spec = dsprites_like_spec();
  const auto split = make_compositional_split(spec, 0.1, 7);
  EXPECT_LE(std::llabs(static_cast<long long>(split.train_ids.size()) - 18432),
            spec.cardinality_sum());
  EXPECT_TRUE(check_split_invariants(split).empty());
}

TEST(SplitTest, DeterministicGivenSeed) {
  const auto spec = desk_spec();
  const auto a = make_compositional_split(spec, 0.3, 11);
  const auto b = make_compositional_split(spec, 0.3, 11);
  EXPECT_EQ(a.train_ids, b.train_ids);
  EXPECT_EQ(a.test_ids, b.test_ids);
  const auto c = make_compositional_split(spec, 0.3, 12);
  EXPECT_NE(a.train_ids, c.train_ids);
}

TEST(SplitTest, RandomizedInvariantSuite) {
  Rng rng(2024);
  int with_repairs = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_factors = 2 + static_cast<int>(rng.uniform_index(3));
    std::vector<int> cards;
    for (int k = 0; k < n_factors; ++k) cards.push_back(2 + static_cast<int>(rng.uniform_index(5)));
    const auto spec = grid_of(cards);
    const double min_ratio =
        (*std::max_element(cards.begin(), cards.end()) + 0.5) / static_cast<double>(spec.grid_size());
    if (min_ratio >= 0.95) continue;
    const double ratio = min_ratio + (0.95 - min_ratio) * rng.uniform();
    const auto seed = rng.next_u64();
    const auto split = make_compositional_split(spec, ratio, seed);
    const auto violations = check_split_invariants(split);
    ASSERT_TRUE(violations.empty()) << "trial " << trial << ": " << violations.front();
    const auto again = make_compositional_split(spec, ratio, seed);
    ASSERT_EQ(split.train_ids, again.train_ids);
    with_repairs += split.repairs > 0;
  }
  // The suite must actually exercise the repair pass.
  EXPECT_GT(with_repairs, 10);
}

TEST(SplitTest, ErrorPaths) {
  const auto spec = grid_of({4, 4});
  EXPECT_THROW(make_compositional_split(spec, 0.0, 1), Error);
  EXPECT_THROW(make_compositional_split(spec, 1.0, 1), Error);
  EXPECT_THROW(make_compositional_split(spec, 0.2, 1), Error);  // 3 tuples < 4 values of a factor
  try {
    grid_of({5});
    FAIL() << "single-factor grid accepted";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no novel combinations exist"), std::string::npos);
  }
}

TEST(SplitTest, LabeledSubsets) {
  const auto split = make_compositional_split(desk_spec(), 0.3, 3);
  const auto all = sample_labeled_subset(split, split.train_ids.size(), 9);
  EXPECT_EQ(all.ids, split.train_ids);

  const auto s500 = sample_labeled_subset(split, 500, 9);
  EXPECT_EQ(s500.ids.size(), 500u);
  EXPECT_EQ(std::set<std::int64_t>(s500.ids.begin(), s500.ids.end()).size(), 500u);
  EXPECT_TRUE(std::includes(split.train_ids.begin(), split.train_ids.end(), s500.ids.begin(),
                            s500.ids.end()));
  EXPECT_EQ(sample_labeled_subset(split, 500, 9).ids, s500.ids);
  EXPECT_NE(sample_labeled_subset(split, 500, 10).ids, s500.ids);

  EXPECT_THROW(sample_labeled_subset(split, split.train_ids.size() + 1, 9), Error);
}

TEST(SplitTest, JsonRoundTrip) {
  const auto split = make_compositional_split(desk_spec(), 0.3, 3);
  const auto back = SplitAssignment::from_json(split.to_json());
  EXPECT_EQ(back.train_ids, split.train_ids);
  EXPECT_EQ(back.test_ids, split.test_ids);
  EXPECT_EQ(back.seed, split.seed);
  EXPECT_EQ(back.spec, split.spec);
}

}  // namespace
}  // namespace compgen
