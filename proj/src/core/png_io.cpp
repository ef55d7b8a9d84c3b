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

#include "amodal/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include <fcntl.h>
#include <unistd.h>

#include "amodal/error.hpp"

namespace amodal {
namespace {

constexpr int kZlibLevel = 3;

struct ReadContext {
  std::span<const std::uint8_t> data;
  std::size_t pos = 0;
  std::size_t error_offset = 0;
  bool offset_set = false;
  char message[256] = {};
};

void on_read_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<ReadContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  if (!ctx->offset_set) {
    ctx->error_offset = ctx->pos;
    ctx->offset_set = true;
  }
  png_longjmp(png, 1);
}

void on_warning(png_structp, png_const_charp) {}

void read_bytes(png_structp png, png_bytep out, png_size_t length) {
  auto* ctx = static_cast<ReadContext*>(png_get_io_ptr(png));
  if (length > ctx->data.size() - ctx->pos) {
    ctx->error_offset = ctx->data.size();
    ctx->offset_set = true;
    png_error(png, "unexpected end of data");
  }
  std::memcpy(out, ctx->data.data() + ctx->pos, length);
  ctx->pos += length;
}

struct ReadHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~ReadHandles() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

/// Decoded samples after expansion: palette -> RGB, gray < 8 bit -> 8 bit,
/// tRNS -> alpha. `bit_depth` is 8 or 16 (16 only when `keep16`).
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  int color_type = 0;
  std::vector<std::uint8_t> data;

  std::size_t row_bytes() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(channels) *
           static_cast<std::size_t>(bit_depth / 8);
  }
};

[[noreturn]] void fail_read(const ReadContext& ctx) {
  throw MalformedFileError(ctx.offset_set ? ctx.error_offset : ctx.pos,
                           std::string("png: ") + ctx.message);
}

RawImage decode_raw(std::span<const std::uint8_t> bytes, bool keep16, bool header_only) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    std::size_t bad = 0;
    static constexpr std::uint8_t kSig[8] = {137, 80, 78, 71, 13, 10, 26, 10};
    while (bad < std::min<std::size_t>(bytes.size(), 8) && bytes[bad] == kSig[bad]) ++bad;
    throw MalformedFileError(bad, "png: bad signature");
  }
  ReadContext ctx;
  ctx.data = bytes;
  ReadHandles h;
  RawImage out;
  std::vector<png_bytep> rows;

  h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, on_read_error, on_warning);
  if (h.png == nullptr) throw Error(ErrorCode::io, "png: cannot allocate reader");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw Error(ErrorCode::io, "png: cannot allocate info");

  if (setjmp(png_jmpbuf(h.png))) {
    fail_read(ctx);
  }
  png_set_read_fn(h.png, &ctx, read_bytes);
  png_read_info(h.png, h.info);

  out.width = static_cast<int>(png_get_image_width(h.png, h.info));
  out.height = static_cast<int>(png_get_image_height(h.png, h.info));
  const int bit_depth = png_get_bit_depth(h.png, h.info);
  out.color_type = png_get_color_type(h.png, h.info);
  if (header_only) {
    out.bit_depth = bit_depth;
    out.channels = png_get_channels(h.png, h.info);
    return out;
  }

  png_set_expand(h.png);
  if (bit_depth == 16) {
    if (keep16) {
      png_set_swap(h.png);  // host (little-endian) order for the uint16 view below
    } else {
      png_set_strip_16(h.png);
    }
  }
  png_set_interlace_handling(h.png);
  png_read_update_info(h.png, h.info);

  out.channels = png_get_channels(h.png, h.info);
  out.bit_depth = png_get_bit_depth(h.png, h.info);
  const std::size_t stride = png_get_rowbytes(h.png, h.info);
  out.data.resize(stride * static_cast<std::size_t>(out.height));
  rows.resize(static_cast<std::size_t>(out.height));
  for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = out.data.data() + y * stride;
  png_read_image(h.png, rows.data());
  png_read_end(h.png, nullptr);
  return out;
}

struct WriteHandles {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~WriteHandles() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct WriteContext {
  std::vector<std::uint8_t>* out = nullptr;
  char message[256] = {};
};

void on_write_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<WriteContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof(ctx->message), "%s", msg);
  png_longjmp(png, 1);
}

void write_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* ctx = static_cast<WriteContext*>(png_get_io_ptr(png));
  ctx->out->insert(ctx->out->end(), data, data + length);
}

void flush_noop(png_structp) {}

/// `rows` must stay valid for the duration of the call.
std::vector<std::uint8_t> encode_rows(int width, int height, int bit_depth, int color_type,
                                      int filters, const std::vector<png_bytep>& rows) {
  std::vector<std::uint8_t> out;
  WriteContext ctx;
  ctx.out = &out;
  WriteHandles h;
  h.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, on_write_error, on_warning);
  if (h.png == nullptr) throw Error(ErrorCode::io, "png: cannot allocate writer");
  h.info = png_create_info_struct(h.png);
  if (h.info == nullptr) throw Error(ErrorCode::io, "png: cannot allocate info");
  if (setjmp(png_jmpbuf(h.png))) {
    throw Error(ErrorCode::io, std::string("png encode: ") + ctx.message);
  }
  png_set_write_fn(h.png, &ctx, write_bytes, flush_noop);
  png_set_compression_level(h.png, kZlibLevel);
  png_set_filter(h.png, PNG_FILTER_TYPE_BASE, filters);
  png_set_IHDR(h.png, h.info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_write_info(h.png, h.info);
  if (bit_depth == 16) png_set_swap(h.png);
  png_write_image(h.png, const_cast<png_bytepp>(rows.data()));
  png_write_end(h.png, nullptr);
  return out;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Frame& frame) {
  const int w = frame.width();
  const int h = frame.height();
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  int color_type = PNG_COLOR_TYPE_RGB;
  std::size_t stride = static_cast<std::size_t>(w) * 3;
  if (frame.has_alpha()) {
    color_type = PNG_COLOR_TYPE_RGB_ALPHA;
    stride = static_cast<std::size_t>(w) * 4;
    buffer.resize(stride * static_cast<std::size_t>(h));
    const auto rgb = frame.pixels();
    const auto alpha = frame.alpha();
    for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
      buffer[i * 4] = rgb[i * 3];
      buffer[i * 4 + 1] = rgb[i * 3 + 1];
      buffer[i * 4 + 2] = rgb[i * 3 + 2];
      buffer[i * 4 + 3] = alpha[i];
    }
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * static_cast<std::size_t>(y);
  } else {
    auto* base = const_cast<std::uint8_t*>(frame.pixels().data());
    for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = base + stride * static_cast<std::size_t>(y);
  }
  return encode_rows(w, h, 8, color_type, PNG_FILTER_SUB, rows);
}

std::vector<std::uint8_t> encode_png(const Mask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t stride = (static_cast<std::size_t>(w) + 7) / 8;
  std::vector<std::uint8_t> buffer(stride * static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    auto* row = buffer.data() + stride * static_cast<std::size_t>(y);
    for (int x = 0; x < w; ++x) {
      if (mask.get(x, y)) row[x >> 3] |= static_cast<std::uint8_t>(0x80U >> (x & 7));
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * static_cast<std::size_t>(y);
  return encode_rows(w, h, 1, PNG_COLOR_TYPE_GRAY, PNG_FILTER_NONE, rows);
}

std::vector<std::uint8_t> encode_png(const DepthMap& depth) {
  const int w = depth.width();
  const int h = depth.height();
  std::vector<std::uint16_t> buffer(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  const auto values = depth.values();
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<std::uint16_t>(
        std::clamp(std::floor(static_cast<double>(values[i]) + 0.5), 0.0, 65535.0));
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    rows[static_cast<std::size_t>(y)] =
        reinterpret_cast<png_bytep>(buffer.data() + static_cast<std::size_t>(w) * static_cast<std::size_t>(y));
  }
  return encode_rows(w, h, 16, PNG_COLOR_TYPE_GRAY, PNG_FILTER_NONE, rows);
}

Frame decode_frame_png(std::span<const std::uint8_t> bytes) {
  const RawImage raw = decode_raw(bytes, false, false);
  const std::size_t n = static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height);
  std::vector<std::uint8_t> rgb(n * 3);
  std::optional<std::vector<std::uint8_t>> alpha;
  const int c = raw.channels;
  if (c == 2 || c == 4) alpha.emplace(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* px = raw.data.data() + i * static_cast<std::size_t>(c);
    if (c <= 2) {
      rgb[i * 3] = rgb[i * 3 + 1] = rgb[i * 3 + 2] = px[0];
    } else {
      rgb[i * 3] = px[0];
      rgb[i * 3 + 1] = px[1];
      rgb[i * 3 + 2] = px[2];
    }
    if (alpha) (*alpha)[i] = px[c - 1];
  }
  return Frame(raw.width, raw.height, std::move(rgb), std::move(alpha));
}

Mask decode_mask_png(std::span<const std::uint8_t> bytes) {
  const RawImage raw = decode_raw(bytes, false, false);
  Mask m(raw.width, raw.height);
  const int color = (raw.channels >= 3) ? 3 : 1;
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      const std::uint8_t* px =
          raw.data.data() + (static_cast<std::size_t>(y) * static_cast<std::size_t>(raw.width) +
                             static_cast<std::size_t>(x)) * static_cast<std::size_t>(raw.channels);
      bool on = false;
      for (int ch = 0; ch < color; ++ch) on = on || px[ch] >= 128;
      if (on) m.set(x, y);
    }
  }
  return m;
}

DepthMap decode_depth_png(std::span<const std::uint8_t> bytes) {
  const RawImage raw = decode_raw(bytes, true, false);
  if (raw.color_type != PNG_COLOR_TYPE_GRAY) {
    throw MalformedFileError(0, "png: depth maps must be single-channel grayscale");
  }
  const std::size_t n = static_cast<std::size_t>(raw.width) * static_cast<std::size_t>(raw.height);
  std::vector<float> depth(n);
  const auto step = static_cast<std::size_t>(raw.channels);
  for (std::size_t i = 0; i < n; ++i) {
    if (raw.bit_depth == 16) {
      std::uint16_t v = 0;
      std::memcpy(&v, raw.data.data() + i * step * 2, 2);
      depth[i] = static_cast<float>(v);
    } else {
      depth[i] = static_cast<float>(raw.data[i * step]);
    }
  }
  return DepthMap(raw.width, raw.height, std::move(depth));
}

PngInfo decode_png_info(std::span<const std::uint8_t> bytes) {
  const RawImage raw = decode_raw(bytes, false, true);
  return {raw.width, raw.height, raw.channels, raw.bit_depth};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> out(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(out.data()), size)) {
    throw Error(ErrorCode::io, "cannot read " + path.string());
  }
  return out;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::io, "cannot open " + tmp.string() + ": " + std::strerror(errno));
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::io, "cannot write " + tmp.string() + ": " + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    throw Error(ErrorCode::io, "cannot flush " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

Frame read_frame(const std::filesystem::path& path) { return decode_frame_png(read_file(path)); }
Mask read_mask(const std::filesystem::path& path) { return decode_mask_png(read_file(path)); }
DepthMap read_depth(const std::filesystem::path& path) { return decode_depth_png(read_file(path)); }

PngInfo read_png_info(const std::filesystem::path& path) {
  // The IHDR chunk ends at byte 33.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::uint8_t> head(64);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return decode_png_info(head);
}

void write_png(const std::filesystem::path& path, const Frame& frame) { write_file(path, encode_png(frame)); }
void write_png(const std::filesystem::path& path, const Mask& mask) { write_file(path, encode_png(mask)); }
void write_png(const std::filesystem::path& path, const DepthMap& depth) { write_file(path, encode_png(depth)); }

std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu.png", index);
  return buf;
}

std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::io, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace amodal
