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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"

namespace amodal {

struct PngInfo {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
};

// Encoders are deterministic: no timestamps or text chunks, fixed zlib level.
std::vector<std::uint8_t> encode_png(const Frame& frame);
/// 1-bit grayscale.
std::vector<std::uint8_t> encode_png(const Mask& mask);
/// 16-bit grayscale, values rounded and clamped to [0, 65535].
std::vector<std::uint8_t> encode_png(const DepthMap& depth);

/// Any PNG color type; gray is replicated to RGB, an alpha channel or tRNS
/// chunk becomes the frame's alpha plane. 16-bit input is reduced to 8 bits.
Frame decode_frame_png(std::span<const std::uint8_t> bytes);
/// A pixel is set when its gray value (or any color channel) is >= 128.
Mask decode_mask_png(std::span<const std::uint8_t> bytes);
/// Grayscale 8- or 16-bit; raw sample values become depth.
DepthMap decode_depth_png(std::span<const std::uint8_t> bytes);
/// Parses only the header chunk.
PngInfo decode_png_info(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
/// Writes to a sibling temp file, fsyncs, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

Frame read_frame(const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path);
DepthMap read_depth(const std::filesystem::path& path);
PngInfo read_png_info(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const Frame& frame);
void write_png(const std::filesystem::path& path, const Mask& mask);
void write_png(const std::filesystem::path& path, const DepthMap& depth);

/// "NNNN.png", zero-padded to four digits.
std::string frame_filename(std::size_t index);

/// Sorted list of `*.png` files directly inside `dir`.
std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir);

}  // namespace amodal
