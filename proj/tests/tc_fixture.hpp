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

#include <cmath>
#include <cstdint>

#include <torch/torch.h>

#include "compgen/random.hpp"
#include "compgen/vae.hpp"

namespace compgen::testing {

// Aggregate posterior N(0, [[1, rho], [rho, 1]]) built from narrow posteriors.
struct GaussianAggregate {
  torch::Tensor z;
  GaussianPosterior q;
};

inline GaussianAggregate correlated_aggregate(double rho, int m, std::uint64_t seed) {
  const double s2 = 0.05;
  Rng rng(seed);
  auto mu = torch::empty({m, 2}, torch::kFloat64);
  auto z = torch::empty({m, 2}, torch::kFloat64);
  const double a = 1 - s2;
  // Cholesky of [[a, rho], [rho, a]].
  const double l11 = std::sqrt(a), l21 = rho / l11, l22 = std::sqrt(a - l21 * l21);
  for (int i = 0; i < m; ++i) {
    const double e1 = rng.normal(), e2 = rng.normal();
    const double m1 = l11 * e1, m2 = l21 * e1 + l22 * e2;
    mu[i][0] = m1;
    mu[i][1] = m2;
    z[i][0] = m1 + std::sqrt(s2) * rng.normal();
    z[i][1] = m2 + std::sqrt(s2) * rng.normal();
  }
  return {z, {mu, torch::full({m, 2}, std::log(s2), torch::kFloat64)}};
}

}  // namespace compgen::testing
