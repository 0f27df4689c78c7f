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

#include "compgen/render.hpp"

#include <set>

#include <gtest/gtest.h>

#include "compgen/error.hpp"

namespace compgen {
namespace {

TEST(RenderTest, Deterministic) {
  const auto spec = dsprites_like_spec();
  const std::vector<int> tuple{2, 3, 7, 11, 20};
  const auto a = render(spec, tuple, 64);
  const auto b = render(spec, tuple, 64);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_GT(a.foreground_count(), 0);
}

TEST(RenderTest, LargerScaleCoversMorePixels) {
  const auto spec = dsprites_like_spec();
  for (int shape = 0; shape < 3; ++shape) {
    const auto small = render(spec, std::vector<int>{shape, 0, 4, 16, 16}, 64);
    const auto large = render(spec, std::vector<int>{shape, 5, 4, 16, 16}, 64);
    EXPECT_GT(large.foreground_count(), small.foreground_count()) << "shape " << shape;
  }
}

TEST(RenderTest, ShapesStayInFrame) {
  const auto spec = dsprites_like_spec();
  auto intensity = [](const GrayImage& img) {
    std::int64_t total = 0;
    for (auto p : img.pixels) total += p;
    return static_cast<double>(total);
  };
  // A clipped shape would lose a large part of its mass relative to the same
  // shape rendered at the centre of the frame.
  for (int res : {32, 64}) {
    for (int shape = 0; shape < 3; ++shape) {
      for (int rot = 0; rot < 10; ++rot) {
        const double centred = intensity(render(spec, std::vector<int>{shape, 5, rot, 16, 16}, res));
        for (int corner_x : {0, 31}) {
          for (int corner_y : {0, 31}) {
            const double at_corner =
                intensity(render(spec, std::vector<int>{shape, 5, rot, corner_x, corner_y}, res));
            EXPECT_NEAR(at_corner / centred, 1.0, 0.15)
                << "res " << res << " shape " << shape << " rot " << rot;
          }
        }
      }
    }
  }
}

TEST(RenderTest, TwoFactorGridRendersPairwiseDistinct) {
  const FactorSpec spec({{"shape", FactorKind::kCategorical, {}, {"square", "ellipse", "heart"}},
                         {"scale", FactorKind::kOrdinal, {0.5, 0.6, 0.7, 0.8, 0.9, 1.0}, {}}});
  for (int res : {64}) {
    std::set<std::vector<std::uint8_t>> seen;
    for (std::int64_t id = 0; id < spec.grid_size(); ++id) {
      seen.insert(render(spec, spec.to_tuple(id), res).pixels);
    }
    EXPECT_EQ(static_cast<std::int64_t>(seen.size()), spec.grid_size()) << "resolution " << res;
  }
}

TEST(RenderTest, UnknownShapeIsInvalidSpec) {
  const FactorSpec spec({{"shape", FactorKind::kCategorical, {}, {"square", "triangle"}},
                         {"x", FactorKind::kOrdinal, {0.0, 1.0}, {}}});
  try {
    render(spec, std::vector<int>{1, 0}, 64);
    FAIL() << "expected an invalid-spec error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
  }
  EXPECT_THROW(check_renderable(spec), Error);
}

TEST(RenderTest, RejectsUnsupportedResolution) {
  EXPECT_THROW(render(desk_spec(), std::vector<int>{0, 0, 0, 0, 0}, 48), Error);
}

}  // namespace
}  // namespace compgen
