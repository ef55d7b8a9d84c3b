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

#include "amodal/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "amodal/manifest.hpp"
#include "amodal/png_io.hpp"
#include "amodal/rng.hpp"

namespace amodal {

namespace fs = std::filesystem;

namespace {

struct Shape {
  bool ellipse = true;
  double rx = 0.0;
  double ry = 0.0;
  double angle = 0.0;
  std::vector<Point2> polygon;  // unit-radius star polygon, vertices in angular order
};

Shape random_shape(SplitMix64& rng, bool ellipse) {
  Shape s;
  s.ellipse = ellipse;
  s.angle = rng.uniform(0.0, std::numbers::pi);
  if (s.ellipse) {
    s.rx = rng.uniform(0.7, 1.0);
    s.ry = rng.uniform(0.5, 1.0);
    return s;
  }
  const int n = 5 + static_cast<int>(rng.below(5));
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * (i + rng.uniform(-0.3, 0.3)) / n;
    const double r = rng.uniform(0.6, 1.0);
    s.polygon.push_back({r * std::cos(theta), r * std::sin(theta)});
  }
  return s;
}

/// Point (u, v) in shape-local units, rotated into the shape frame.
bool inside(const Shape& s, double u, double v) {
  const double c = std::cos(s.angle);
  const double sn = std::sin(s.angle);
  const double a = c * u + sn * v;
  const double b = -sn * u + c * v;
  if (s.ellipse) return (a * a) / (s.rx * s.rx) + (b * b) / (s.ry * s.ry) <= 1.0;
  bool in = false;
  const auto& p = s.polygon;
  for (std::size_t i = 0, j = p.size() - 1; i < p.size(); j = i++) {
    if ((p[i].y > b) != (p[j].y > b) && a < (p[j].x - p[i].x) * (b - p[i].y) / (p[j].y - p[i].y) + p[i].x) {
      in = !in;
    }
  }
  return in;
}

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

Rgb random_color(SplitMix64& rng, int lo, int hi) {
  auto c = [&] { return static_cast<std::uint8_t>(lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)))); };
  const auto r = c();
  const auto g = c();
  return Rgb{r, g, c()};
}

}  // namespace

ProceduralClip make_shape_clip(std::uint64_t seed, const ProceduralClipOptions& options) {
  SplitMix64 rng(seed);
  const int w = options.width;
  const int h = options.height;
  const double dim = std::min(w, h);

  const Rgb bg_a = random_color(rng, 40, 200);
  const Rgb bg_b = random_color(rng, 40, 200);
  const double freq = rng.uniform(0.02, 0.08);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double dir = rng.uniform(0.0, std::numbers::pi);
  const std::uint64_t noise_seed = rng.next();
  Frame background(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double t = 0.5 + 0.5 * std::sin(freq * (x * std::cos(dir) + y * std::sin(dir)) + phase);
      const double checker = ((x / 24 + y / 24) % 2 == 0) ? 10.0 : -10.0;
      const double noise = static_cast<double>(mix64(noise_seed ^ (static_cast<std::uint64_t>(y) * 65536u + x)) % 17) - 8.0;
      background.set(x, y, Rgb{clamp_u8(bg_a.r + t * (bg_b.r - bg_a.r) + checker + noise),
                               clamp_u8(bg_a.g + t * (bg_b.g - bg_a.g) + checker + noise),
                               clamp_u8(bg_a.b + t * (bg_b.b - bg_a.b) + checker + noise)});
    }
  }

  const bool ellipse = rng.uniform01() < 0.5;
  const Shape shape = random_shape(rng, ellipse);
  const Rgb color = random_color(rng, 20, 235);
  const double radius0 = rng.uniform(0.12, 0.22) * dim;
  const double radius1 = radius0 * rng.uniform(0.9, 1.1);
  const double cx0 = rng.uniform(0.38, 0.62) * w;
  const double cy0 = rng.uniform(0.38, 0.62) * h;
  const double cx1 = cx0 + rng.uniform(-0.08, 0.08) * w;
  const double cy1 = cy0 + rng.uniform(-0.08, 0.08) * h;
  const double spin = rng.uniform(-0.3, 0.3);

  ProceduralClip out;
  out.clip.fps = 8.0;
  const int n = options.frames;
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    const double cx = std::lerp(cx0, cx1, t);
    const double cy = std::lerp(cy0, cy1, t);
    const double radius = std::lerp(radius0, radius1, t);
    Shape s = shape;
    s.angle += spin * t;
    Frame frame = background;
    Mask mask(w, h);
    DepthMap depth(w, h, 0.0f);
    const int x_lo = std::max(0, static_cast<int>(cx - radius) - 1);
    const int x_hi = std::min(w - 1, static_cast<int>(cx + radius) + 1);
    const int y_lo = std::max(0, static_cast<int>(cy - radius) - 1);
    const int y_hi = std::min(h - 1, static_cast<int>(cy + radius) + 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) depth.set(x, y, static_cast<float>(1000.0 + y));
    }
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double u = (x + 0.5 - cx) / radius;
        const double v = (y + 0.5 - cy) / radius;
        if (!inside(s, u, v)) continue;
        mask.set(x, y, true);
        const double shade = 1.0 - 0.25 * (u + v) / 2.0;
        frame.set(x, y, Rgb{clamp_u8(color.r * shade), clamp_u8(color.g * shade), clamp_u8(color.b * shade)});
        depth.set(x, y, 500.0f);
      }
    }
    out.clip.frames.push_back(std::move(frame));
    out.masks.push_back(std::move(mask));
    out.depths.push_back(std::move(depth));
  }
  return out;
}

OccluderAsset make_procedural_occluder(std::string id, std::uint64_t seed, OccluderBank bank) {
  SplitMix64 rng(seed);
  const int w = 48 + static_cast<int>(rng.below(81));
  const int h = 48 + static_cast<int>(rng.below(81));
  const int kind = static_cast<int>(rng.below(3));
  Shape shape = random_shape(rng, kind == 1);
  if (kind == 1) {
    shape.rx = 1.0;
    shape.ry = 1.0;
  }
  const Rgb a = random_color(rng, 0, 255);
  const Rgb b = random_color(rng, 0, 255);
  const int stripe = 4 + static_cast<int>(rng.below(12));

  Frame rgba(w, h);
  std::vector<std::uint8_t> alpha(static_cast<std::size_t>(w) * h, 0);
  constexpr int kSuper = 4;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int hits = 0;
      for (int sy = 0; sy < kSuper; ++sy) {
        for (int sx = 0; sx < kSuper; ++sx) {
          const double u = 2.0 * (x + (sx + 0.5) / kSuper) / w - 1.0;
          const double v = 2.0 * (y + (sy + 0.5) / kSuper) / h - 1.0;
          hits += kind == 0 ? (std::abs(u) <= 0.95 && std::abs(v) <= 0.95) : inside(shape, u, v);
        }
      }
      alpha[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>((hits * 255 + 8) / 16);
      rgba.set(x, y, ((x + y) / stripe) % 2 == 0 ? a : b);
    }
  }
  rgba.set_alpha(std::move(alpha));
  return make_occluder(std::move(id), rgba, bank);
}

std::vector<OccluderAsset> make_procedural_bank(std::size_t count, std::uint64_t seed, OccluderBank bank) {
  std::vector<OccluderAsset> out;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "occ_%03zu", i);
    out.push_back(make_procedural_occluder(std::string(to_string(bank)) + "/" + name, mix64(seed + i), bank));
  }
  return out;
}

void write_procedural_source(const fs::path& dir, std::size_t count, std::uint64_t seed,
                             const ProceduralClipOptions& options, bool with_depth) {
  for (std::size_t c = 0; c < count; ++c) {
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%05zu", c);
    const fs::path clip_dir = dir / name;
    fs::create_directories(clip_dir / "frames");
    fs::create_directories(clip_dir / "masks");
    if (with_depth) fs::create_directories(clip_dir / "depth");
    const ProceduralClip clip = make_shape_clip(mix64(seed + c), options);
    for (std::size_t i = 0; i < clip.clip.size(); ++i) {
      write_png(clip_dir / "frames" / frame_filename(i), clip.clip.frames[i]);
      write_png(clip_dir / "masks" / frame_filename(i), clip.masks[i]);
      if (with_depth) write_png(clip_dir / "depth" / frame_filename(i), clip.depths[i]);
    }
  }
}

void write_procedural_bank(const fs::path& dir, std::size_t count, std::uint64_t seed) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "occ_%03zu.png", i);
    write_png(dir / name, make_procedural_occluder(name, mix64(seed + i)).rgba);
  }
}

}  // namespace amodal
