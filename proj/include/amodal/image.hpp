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
#include <vector>

namespace amodal {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

/// One 8-bit sRGB image, row-major, 3 interleaved channels, with an optional
/// separate alpha plane.
class Frame {
 public:
  static constexpr int kChannels = 3;

  Frame() = default;
  Frame(int width, int height, Rgb fill = kBlack);
  Frame(int width, int height, std::vector<std::uint8_t> rgb,
        std::optional<std::vector<std::uint8_t>> alpha = std::nullopt);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  bool empty() const noexcept { return width_ == 0; }

  std::span<const std::uint8_t> pixels() const noexcept { return rgb_; }
  std::span<std::uint8_t> pixels() noexcept { return rgb_; }

  bool has_alpha() const noexcept { return alpha_.has_value(); }
  std::span<const std::uint8_t> alpha() const noexcept;
  std::span<std::uint8_t> alpha() noexcept;
  void set_alpha(std::vector<std::uint8_t> alpha);
  void drop_alpha() noexcept { alpha_.reset(); }

  Rgb at(int x, int y) const noexcept {
    const auto i = index(x, y);
    return {rgb_[i], rgb_[i + 1], rgb_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const auto i = index(x, y);
    rgb_[i] = c.r;
    rgb_[i + 1] = c.g;
    rgb_[i + 2] = c.b;
  }
  std::uint8_t channel(int x, int y, int c) const noexcept { return rgb_[index(x, y) + c]; }

  bool same_size(const Frame& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> rgb_;
  std::optional<std::vector<std::uint8_t>> alpha_;
};

struct VideoClip {
  std::vector<Frame> frames;
  double fps = 0.0;

  std::size_t size() const noexcept { return frames.size(); }
  int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }

  /// Throws if the clip is empty or frame sizes disagree.
  void validate() const;

  friend bool operator==(const VideoClip& a, const VideoClip& b) { return a.frames == b.frames; }
};

/// Relative depth, smaller = closer.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::vector<float> depth);
  DepthMap(int width, int height, float fill);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int x, int y) const noexcept {
    return depth_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(x)];
  }
  void set(int x, int y, float v) noexcept {
    depth_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x)] = v;
  }
  std::span<const float> values() const noexcept { return depth_; }

  friend bool operator==(const DepthMap&, const DepthMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> depth_;
};

}  // namespace amodal
