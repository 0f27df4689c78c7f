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
#include <vector>

#include "compgen/factor_spec.hpp"

namespace compgen {

/// Row-major H x W grayscale raster.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;

  std::int64_t foreground_count() const;
};

/// Rasterizes one tuple of a dSprites-like spec as a white shape on black.
///
/// The factor spec may name any subset of {shape, scale, rotation, x, y}; absent
/// factors take the defaults square / 1.0 / 0 / 0.5 / 0.5. Positions in [0, 1]
/// map into the inset pixel box [0.1 R, 0.9 R] and the shape half-extent is
/// 0.07 R * scale, so every shape stays inside the frame at any rotation. Each
/// pixel is the coverage of a 2x2 grid of inside-tests.
GrayImage render(const FactorSpec& spec, std::span<const int> tuple, int resolution);

/// Throws kInvalidSpec unless `render` accepts this spec.
void check_renderable(const FactorSpec& spec);

}  // namespace compgen
