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

#include <algorithm>
#include <cmath>

#include "compgen/error.hpp"

namespace compgen {

namespace {

enum class Shape { kSquare, kEllipse, kHeart };

constexpr double kInset = 0.1;
constexpr double kHalfExtent = 0.07;
constexpr int kSupersample = 2;

Shape parse_shape(const std::string& symbol) {
  if (symbol == "square") return Shape::kSquare;
  if (symbol == "ellipse") return Shape::kEllipse;
  if (symbol == "heart") return Shape::kHeart;
  fail(ErrorCode::kInvalidSpec, "unknown shape symbol '" + symbol + "'");
}

// u, v in units of the half-extent; v points up.
bool inside(Shape shape, double u, double v) {
  switch (shape) {
    case Shape::kSquare:
      return std::abs(u) <= 1.0 && std::abs(v) <= 1.0;
    case Shape::kEllipse:
      return u * u + 4.0 * v * v <= 1.0;
    case Shape::kHeart: {
      // The implicit heart spans roughly [-1.14, 1.14] x [-1, 1.25]; shrink it
      // so its farthest point sits inside the unit disc of the half-extent.
      const double a = u * 1.3;
      const double b = v * 1.3 + 0.12;
      const double r = a * a + b * b - 1.0;
      return r * r * r - a * a * b * b * b <= 0.0;
    }
  }
  return false;
}

}  // namespace

std::int64_t GrayImage::foreground_count() const {
  return std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p > 0; });
}

void check_renderable(const FactorSpec& spec) {
  for (const auto& f : spec.factors()) {
    if (f.name == "shape") {
      require(f.kind == FactorKind::kCategorical, ErrorCode::kInvalidSpec,
              "shape factor must be categorical");
      for (const auto& s : f.symbols) parse_shape(s);
    } else if (f.name == "scale" || f.name == "rotation" || f.name == "x" || f.name == "y") {
      require(f.kind == FactorKind::kOrdinal, ErrorCode::kInvalidSpec,
              "factor '" + f.name + "' must be ordinal");
    } else {
      fail(ErrorCode::kInvalidSpec, "renderer does not know factor '" + f.name + "'");
    }
  }
}

GrayImage render(const FactorSpec& spec, std::span<const int> tuple, int resolution) {
  require(resolution == 32 || resolution == 64, ErrorCode::kInvalidArgument,
          "render resolution must be 32 or 64");
  require(spec.is_valid(tuple), ErrorCode::kInvalidArgument, "tuple out of range");

  Shape shape = Shape::kSquare;
  double scale = 1.0, rotation = 0.0, x = 0.5, y = 0.5;
  for (int k = 0; k < spec.num_factors(); ++k) {
    const auto& f = spec.factor(k);
    const int i = tuple[static_cast<std::size_t>(k)];
    if (f.name == "shape") {
      shape = parse_shape(f.symbols.at(static_cast<std::size_t>(i)));
    } else if (f.name == "scale") {
      scale = f.values[static_cast<std::size_t>(i)];
    } else if (f.name == "rotation") {
      rotation = f.values[static_cast<std::size_t>(i)];
    } else if (f.name == "x") {
      x = f.values[static_cast<std::size_t>(i)];
    } else if (f.name == "y") {
      y = f.values[static_cast<std::size_t>(i)];
    } else {
      fail(ErrorCode::kInvalidSpec, "renderer does not know factor '" + f.name + "'");
    }
  }

  const double res = resolution;
  const double cx = (kInset + (1.0 - 2.0 * kInset) * x) * res;
  const double cy = (kInset + (1.0 - 2.0 * kInset) * y) * res;
  const double half = kHalfExtent * res * scale;
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);

  GrayImage img{resolution, resolution,
                std::vector<std::uint8_t>(static_cast<std::size_t>(resolution * resolution))};
  constexpr int kSamples = kSupersample * kSupersample;
  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      int hits = 0;
      for (int sy = 0; sy < kSupersample; ++sy) {
        for (int sx = 0; sx < kSupersample; ++sx) {
          const double dx = px + (sx + 0.5) / kSupersample - cx;
          // Image rows grow downward; flip so v points up.
          const double dy = cy - (py + (sy + 0.5) / kSupersample);
          const double u = (c * dx + s * dy) / half;
          const double v = (-s * dx + c * dy) / half;
          if (inside(shape, u, v)) ++hits;
        }
      }
      img.pixels[static_cast<std::size_t>(py * resolution + px)] =
          static_cast<std::uint8_t>((hits * 255 + kSamples / 2) / kSamples);
    }
  }
  return img;
}

}  // namespace compgen
