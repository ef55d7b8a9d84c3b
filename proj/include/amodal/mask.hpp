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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace amodal {

/// Axis-aligned pixel box, inclusive-exclusive: width = x_max - x_min.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  long long area() const noexcept {
    return static_cast<long long>(width()) * static_cast<long long>(height());
  }
  bool degenerate() const noexcept { return x_min >= x_max || y_min >= y_max; }
  double center_x() const noexcept { return 0.5 * (x_min + x_max); }
  double center_y() const noexcept { return 0.5 * (y_min + y_max); }

  BBox expanded(int by) const noexcept { return {x_min - by, y_min - by, x_max + by, y_max + by}; }
  BBox clamped(int width, int height) const noexcept;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Binary per-pixel mask, one bit per pixel, row-major. Bits past the last
/// pixel in the final word are always zero.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);

  /// Sets every pixel whose byte value is >= threshold.
  static Mask from_bytes(int width, int height, std::span<const std::uint8_t> bytes,
                         std::uint8_t threshold = 1);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  bool get(int x, int y) const noexcept {
    const auto i = bit_index(x, y);
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }
  void set(int x, int y, bool value = true) noexcept {
    const auto i = bit_index(x, y);
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }
  /// Bounds-checked read; out-of-range coordinates read as unset.
  bool test(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
  }

  std::size_t area() const noexcept;
  bool empty() const noexcept { return area() == 0; }
  bool same_size(const Mask& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

  /// 0 or 255 per pixel.
  std::vector<std::uint8_t> to_bytes() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  Mask& operator&=(const Mask& o);
  Mask& operator|=(const Mask& o);
  /// Set difference: this AND NOT o.
  Mask& subtract(const Mask& o);
  Mask inverted() const;

  friend Mask operator&(Mask a, const Mask& b) { return a &= b; }
  friend Mask operator|(Mask a, const Mask& b) { return a |= b; }
  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t bit_index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }
  void require_same_size(const Mask& o) const;
  void clear_tail() noexcept;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t mask_area(const Mask& m) noexcept;

/// Tightest box around all set bits; nullopt for an empty mask.
std::optional<BBox> mask_bbox(const Mask& m);

std::size_t intersection_area(const Mask& a, const Mask& b);

/// Row-major run-length string "WxH:r0,r1,...". Runs alternate unset/set
/// starting with an unset run (possibly 0). Empty runs list means all unset.
std::string encode_rle(const Mask& m);
Mask decode_rle(std::string_view text);

}  // namespace amodal
