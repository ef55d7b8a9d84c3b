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

#include "amodal/resample.hpp"

#include "amodal/error.hpp"

namespace amodal {

Frame resize_bilinear(const Frame& src, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::invalid_argument, "resize target must be positive");
  if (width == src.width() && height == src.height()) return src;
  Frame out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  const auto pixels = src.pixels();
  auto dst = out.pixels();
  std::vector<std::uint8_t> alpha;
  if (src.has_alpha()) alpha.resize(out.pixel_count());
  for (int y = 0; y < height; ++y) {
    const double v = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) * sx - 0.5;
      const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                            static_cast<std::size_t>(x);
      for (int c = 0; c < 3; ++c) {
        dst[i * 3 + static_cast<std::size_t>(c)] =
            round_to_u8(sample_bilinear(pixels, src.width(), src.height(), 3, c, u, v));
      }
      if (!alpha.empty()) {
        alpha[i] = round_to_u8(sample_bilinear(src.alpha(), src.width(), src.height(), 1, 0, u, v));
      }
    }
  }
  if (!alpha.empty()) out.set_alpha(std::move(alpha));
  return out;
}

Mask resize_nearest(const Mask& src, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::invalid_argument, "resize target must be positive");
  if (width == src.width() && height == src.height()) return src;
  Mask out(width, height);
  const double sx = static_cast<double>(src.width()) / width;
  const double sy = static_cast<double>(src.height()) / height;
  for (int y = 0; y < height; ++y) {
    const int v = std::clamp(static_cast<int>(std::floor((y + 0.5) * sy)), 0, src.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int u = std::clamp(static_cast<int>(std::floor((x + 0.5) * sx)), 0, src.width() - 1);
      if (src.get(u, v)) out.set(x, y);
    }
  }
  return out;
}

}  // namespace amodal
