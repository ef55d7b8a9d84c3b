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

#include "amodal/mask.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <limits>

#include "amodal/error.hpp"

namespace amodal {

BBox BBox::clamped(int width, int height) const noexcept {
  return {std::clamp(x_min, 0, width), std::clamp(y_min, 0, height), std::clamp(x_max, 0, width),
          std::clamp(y_max, 0, height)};
}

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::invalid_argument, "mask dimensions must be positive");
  }
  words_.assign((pixel_count() + 63) / 64, fill ? ~std::uint64_t{0} : std::uint64_t{0});
  clear_tail();
}

Mask Mask::from_bytes(int width, int height, std::span<const std::uint8_t> bytes,
                      std::uint8_t threshold) {
  Mask m(width, height);
  if (bytes.size() != m.pixel_count()) {
    throw Error(ErrorCode::dimension_mismatch, "byte plane length does not match mask dimensions");
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] >= threshold) m.words_[i >> 6] |= std::uint64_t{1} << (i & 63);
  }
  return m;
}

void Mask::clear_tail() noexcept {
  const std::size_t tail = pixel_count() & 63;
  if (tail != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << tail) - 1;
}

void Mask::require_same_size(const Mask& o) const {
  if (!same_size(o)) throw Error(ErrorCode::dimension_mismatch, "mask dimensions differ");
}

std::size_t Mask::area() const noexcept {
  std::size_t n = 0;
  for (const auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

std::vector<std::uint8_t> Mask::to_bytes() const {
  std::vector<std::uint8_t> out(pixel_count(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if ((words_[i >> 6] >> (i & 63)) & 1U) out[i] = 255;
  }
  return out;
}

Mask& Mask::operator&=(const Mask& o) {
  require_same_size(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

Mask& Mask::operator|=(const Mask& o) {
  require_same_size(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

Mask& Mask::subtract(const Mask& o) {
  require_same_size(o);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

Mask Mask::inverted() const {
  Mask out = *this;
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

std::size_t mask_area(const Mask& m) noexcept { return m.area(); }

std::optional<BBox> mask_bbox(const Mask& m) {
  const auto words = m.words();
  const auto width = static_cast<std::size_t>(m.width());
  int x_min = std::numeric_limits<int>::max();
  int y_min = std::numeric_limits<int>::max();
  int x_max = -1;
  int y_max = -1;
  for (std::size_t wi = 0; wi < words.size(); ++wi) {
    std::uint64_t w = words[wi];
    while (w != 0) {
      const std::size_t i = wi * 64 + static_cast<std::size_t>(std::countr_zero(w));
      w &= w - 1;
      const int x = static_cast<int>(i % width);
      const int y = static_cast<int>(i / width);
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max < 0) return std::nullopt;
  return BBox{x_min, y_min, x_max + 1, y_max + 1};
}

std::size_t intersection_area(const Mask& a, const Mask& b) {
  if (!a.same_size(b)) throw Error(ErrorCode::dimension_mismatch, "mask dimensions differ");
  const auto wa = a.words();
  const auto wb = b.words();
  std::size_t n = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(wa[i] & wb[i]));
  }
  return n;
}

std::string encode_rle(const Mask& m) {
  std::string out = std::to_string(m.width()) + "x" + std::to_string(m.height()) + ":";
  const std::size_t n = m.pixel_count();
  const auto words = m.words();
  bool current = false;
  std::size_t run = 0;
  bool first = true;
  auto emit = [&](std::size_t r) {
    if (!first) out.push_back(',');
    out += std::to_string(r);
    first = false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    const bool bit = (words[i >> 6] >> (i & 63)) & 1U;
    if (bit != current) {
      emit(run);
      run = 0;
      current = bit;
    }
    ++run;
  }
  // A trailing unset run is implied; omit it so an all-unset mask encodes
  // with no runs at all.
  if (current) emit(run);
  return out;
}

namespace {

std::size_t parse_count(std::string_view text, std::size_t& pos, std::string_view what) {
  std::size_t value = 0;
  const char* begin = text.data() + pos;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr == begin) {
    throw MalformedFileError(pos, "rle: expected " + std::string(what));
  }
  pos = static_cast<std::size_t>(ptr - text.data());
  return value;
}

}  // namespace

Mask decode_rle(std::string_view text) {
  std::size_t pos = 0;
  const std::size_t width = parse_count(text, pos, "width");
  if (pos >= text.size() || text[pos] != 'x') throw MalformedFileError(pos, "rle: expected 'x'");
  ++pos;
  const std::size_t height = parse_count(text, pos, "height");
  if (pos >= text.size() || text[pos] != ':') throw MalformedFileError(pos, "rle: expected ':'");
  ++pos;
  if (width < 1 || height < 1 || width > (1U << 20) || height > (1U << 20)) {
    throw MalformedFileError(0, "rle: dimensions out of range");
  }
  Mask m(static_cast<int>(width), static_cast<int>(height));
  const std::size_t total = m.pixel_count();
  std::size_t cursor = 0;
  bool bit = false;
  while (pos < text.size()) {
    const std::size_t run_start = pos;
    const std::size_t run = parse_count(text, pos, "run length");
    if (run > total - cursor) throw MalformedFileError(run_start, "rle: runs exceed mask size");
    if (bit) {
      for (std::size_t i = cursor; i < cursor + run; ++i) {
        m.set(static_cast<int>(i % width), static_cast<int>(i / width));
      }
    }
    cursor += run;
    bit = !bit;
    if (pos < text.size()) {
      if (text[pos] != ',') throw MalformedFileError(pos, "rle: expected ','");
      ++pos;
      if (pos == text.size()) throw MalformedFileError(pos, "rle: trailing ','");
    }
  }
  return m;
}

}  // namespace amodal
