// Copyright 2026 The amodal-synth Authors
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"

namespace amodal {

/// Round half up, clamped to [0, 255].
inline std::uint8_t round_to_u8(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

/// Bilinear sample at pixel-index coordinates (u, v) of an interleaved 8-bit
/// plane with `stride` channels. Coordinates are clamped to the image, so an
/// integral (u, v) inside the image returns that texel exactly.
inline double sample_bilinear(std::span<const std::uint8_t> data, int width, int height,
                              int stride, int channel, double u, double v) noexcept {
  u = std::clamp(u, 0.0, static_cast<double>(width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double fx = u - x0;
  const double fy = v - y0;
  auto px = [&](int x, int y) {
    return static_cast<double>(
        data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
              static_cast<std::size_t>(x)) * static_cast<std::size_t>(stride) +
             static_cast<std::size_t>(channel)]);
  };
  if (fx == 0.0 && fy == 0.0) return px(x0, y0);
  const double top = px(x0, y0) + (px(x1, y0) - px(x0, y0)) * fx;
  const double bottom = px(x0, y1) + (px(x1, y1) - px(x0, y1)) * fx;
  return top + (bottom - top) * fy;
}

/// Pixel-center aligned resize; the alpha plane, if any, is resized too.
Frame resize_bilinear(const Frame& src, int width, int height);
Mask resize_nearest(const Mask& src, int width, int height);

}  // namespace amodal
