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

#include "amodal/error.hpp"
#include "amodal/image.hpp"

#include <cmath>
#include <string>

namespace amodal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::empty_mask: return "empty_mask";
    case ErrorCode::degenerate_bbox: return "degenerate_bbox";
    case ErrorCode::malformed_file: return "malformed_file";
    case ErrorCode::io: return "io";
    case ErrorCode::invalid_spec: return "invalid_spec";
    case ErrorCode::completer_failed: return "completer_failed";
    case ErrorCode::config: return "config";
  }
  return "unknown";
}

namespace {

void require_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::invalid_argument,
                "image dimensions must be positive, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
}

}  // namespace

Frame::Frame(int width, int height, Rgb fill) : width_(width), height_(height) {
  require_dims(width, height);
  rgb_.resize(pixel_count() * kChannels);
  for (std::size_t i = 0; i < rgb_.size(); i += kChannels) {
    rgb_[i] = fill.r;
    rgb_[i + 1] = fill.g;
    rgb_[i + 2] = fill.b;
  }
}

Frame::Frame(int width, int height, std::vector<std::uint8_t> rgb,
             std::optional<std::vector<std::uint8_t>> alpha)
    : width_(width), height_(height), rgb_(std::move(rgb)), alpha_(std::move(alpha)) {
  require_dims(width, height);
  if (rgb_.size() != pixel_count() * kChannels) {
    throw Error(ErrorCode::dimension_mismatch, "pixel buffer length does not match dimensions");
  }
  if (alpha_ && alpha_->size() != pixel_count()) {
    throw Error(ErrorCode::dimension_mismatch, "alpha plane length does not match dimensions");
  }
}

std::span<const std::uint8_t> Frame::alpha() const noexcept {
  if (!alpha_) return {};
  return *alpha_;
}

std::span<std::uint8_t> Frame::alpha() noexcept {
  if (!alpha_) return {};
  return *alpha_;
}

void Frame::set_alpha(std::vector<std::uint8_t> alpha) {
  if (alpha.size() != pixel_count()) {
    throw Error(ErrorCode::dimension_mismatch, "alpha plane length does not match dimensions");
  }
  alpha_ = std::move(alpha);
}

void VideoClip::validate() const {
  if (frames.empty()) throw Error(ErrorCode::invalid_argument, "video clip has no frames");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_size(frames.front())) {
      throw Error(ErrorCode::dimension_mismatch,
                  "frame " + std::to_string(i) + " size differs from frame 0");
    }
  }
}

DepthMap::DepthMap(int width, int height, std::vector<float> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
  require_dims(width, height);
  if (depth_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::dimension_mismatch, "depth buffer length does not match dimensions");
  }
  for (const float v : depth_) {
    if (!std::isfinite(v) || v < 0.0F) {
      throw Error(ErrorCode::invalid_argument, "depth values must be finite and non-negative");
    }
  }
}

DepthMap::DepthMap(int width, int height, float fill)
    : DepthMap(width, height,
               std::vector<float>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                      static_cast<std::size_t>(height > 0 ? height : 0),
                                  fill)) {}

}  // namespace amodal
