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

#include "compgen/random.hpp"

#include <cmath>
#include <numbers>

#include "compgen/error.hpp"

namespace compgen {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kStoreCorrupt: return "store-corrupt";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kEstimatorUndefined: return "estimator-undefined";
    case ErrorCode::kDiverged: return "diverged";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNothingToRun: return "nothing-to-run";
  }
  return "unknown";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  require(n > 0, ErrorCode::kInvalidArgument, "uniform_index: empty range");
  // Rejection sampling removes modulo bias.
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t r = engine_();
  while (r < threshold) r = engine_();
  return r % n;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::int64_t> Rng::sample_without_replacement(
    std::span<const std::int64_t> population, std::size_t k) {
  require(k <= population.size(), ErrorCode::kInvalidArgument,
          "sample_without_replacement: k exceeds population");
  std::vector<std::int64_t> pool(population.begin(), population.end());
  // Partial Fisher-Yates: the first k slots end up uniformly sampled.
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace compgen
