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

#include "amodal/image2video.hpp"

#include <algorithm>
#include <cmath>

#include "amodal/error.hpp"
#include "amodal/resample.hpp"

namespace amodal {
namespace {

constexpr double kSingularEps = 1e-12;

double frame_param(int i, int n) { return static_cast<double>(i) / static_cast<double>(n - 1); }

int round_half_up(double v) { return static_cast<int>(std::floor(v + 0.5)); }

void require_same_size(const Frame& img, const Mask& mask) {
  if (img.width() != mask.width() || img.height() != mask.height()) {
    throw Error(ErrorCode::dimension_mismatch, "image and mask sizes differ");
  }
}

}  // namespace

void MotionSpec::validate() const {
  if (frames < 2) throw Error(ErrorCode::invalid_spec, "motion spec needs at least 2 frames");
  if (!(zoom_end > 0.0 && zoom_end <= 1.0)) {
    throw Error(ErrorCode::invalid_spec, "zoom_end must lie in (0, 1]");
  }
  if (!std::isfinite(dx) || !std::isfinite(dy)) throw Error(ErrorCode::invalid_spec, "displacement must be finite");
  if (std::abs(homography_end[8]) < kSingularEps ||
      std::abs(homography_determinant(homography_end)) < kSingularEps) {
    throw Error(ErrorCode::invalid_spec, "homography_end is not invertible");
  }
}

double homography_determinant(const Homography& h) {
  return h[0] * (h[4] * h[8] - h[5] * h[7]) - h[1] * (h[3] * h[8] - h[5] * h[6]) +
         h[2] * (h[3] * h[7] - h[4] * h[6]);
}

Homography invert_homography(const Homography& h) {
  const double det = homography_determinant(h);
  if (std::abs(det) < kSingularEps) throw Error(ErrorCode::invalid_spec, "homography is singular");
  const double inv = 1.0 / det;
  return {(h[4] * h[8] - h[5] * h[7]) * inv, (h[2] * h[7] - h[1] * h[8]) * inv,
          (h[1] * h[5] - h[2] * h[4]) * inv, (h[5] * h[6] - h[3] * h[8]) * inv,
          (h[0] * h[8] - h[2] * h[6]) * inv, (h[2] * h[3] - h[0] * h[5]) * inv,
          (h[3] * h[7] - h[4] * h[6]) * inv, (h[1] * h[6] - h[0] * h[7]) * inv,
          (h[0] * h[4] - h[1] * h[3]) * inv};
}

Homography interpolate_homography(const Homography& end, double t) {
  Homography h{};
  for (std::size_t i = 0; i < 9; ++i) h[i] = std::lerp(kIdentityHomography[i], end[i], t);
  if (std::abs(h[8]) < kSingularEps) {
    throw Error(ErrorCode::invalid_spec, "interpolated homography has zero scale entry");
  }
  const double s = h[8];
  for (auto& v : h) v /= s;
  h[8] = 1.0;
  if (std::abs(homography_determinant(h)) < kSingularEps) {
    throw Error(ErrorCode::invalid_spec, "interpolated homography is not invertible");
  }
  return h;
}

std::array<double, 2> apply_homography(const Homography& h, double x, double y) {
  const double w = h[6] * x + h[7] * y + h[8];
  return {(h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w};
}

SyntheticClip zoom_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec) {
  spec.validate();
  require_same_size(img, mask);
  const int w = img.width();
  const int h = img.height();
  if (spec.zoom_end * w < 2.0 || spec.zoom_end * h < 2.0) {
    throw Error(ErrorCode::invalid_spec, "zoom crop would be smaller than 2x2");
  }
  SyntheticClip out;
  const auto src = img.pixels();
  for (int i = 0; i < spec.frames; ++i) {
    const double f = std::lerp(1.0, spec.zoom_end, frame_param(i, spec.frames));
    const double x0 = 0.5 * (w - f * w);
    const double y0 = 0.5 * (h - f * h);
    Frame frame(w, h);
    Mask m(w, h);
    auto dst = frame.pixels();
    for (int y = 0; y < h; ++y) {
      const double v = y0 + (y + 0.5) * f - 0.5;
      const int mv = std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, h - 1);
      for (int x = 0; x < w; ++x) {
        const double u = x0 + (x + 0.5) * f - 0.5;
        const std::size_t di = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3;
        for (int c = 0; c < 3; ++c) dst[di + static_cast<std::size_t>(c)] = round_to_u8(sample_bilinear(src, w, h, 3, c, u, v));
        const int mu = std::clamp(static_cast<int>(std::floor(u + 0.5)), 0, w - 1);
        if (mask.get(mu, mv)) m.set(x, y);
      }
    }
    out.clip.frames.push_back(std::move(frame));
    out.masks.push_back(std::move(m));
  }
  return out;
}

Frame fill_background(const Frame& img, const Mask& hole) {
  require_same_size(img, hole);
  const int w = img.width();
  const int h = img.height();
  const std::size_t n = img.pixel_count();
  if (hole.area() == n) throw Error(ErrorCode::invalid_spec, "fill_background: nothing known to fill from");
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

  std::vector<double> value(n * 3);
  std::vector<std::uint8_t> known(n);
  const auto src = img.pixels();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < 3; ++c) value[i * 3 + c] = src[i * 3 + c];
  }
  std::vector<std::pair<int, int>> unknown;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      known[idx(x, y)] = hole.get(x, y) ? 0 : 1;
      if (!known[idx(x, y)]) unknown.emplace_back(x, y);
    }
  }
  const int dxs[4] = {-1, 1, 0, 0};
  const int dys[4] = {0, 0, -1, 1};

  // Onion peel: each ring takes the mean of its already-known neighbors.
  std::vector<std::pair<int, int>> remaining = unknown;
  std::vector<std::pair<int, int>> next;
  std::vector<std::size_t> ring;
  while (!remaining.empty()) {
    ring.clear();
    next.clear();
    std::vector<double> ring_values;
    for (const auto& [x, y] : remaining) {
      double sum[3] = {0, 0, 0};
      int count = 0;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dxs[k];
        const int ny = y + dys[k];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h || !known[idx(nx, ny)]) continue;
        for (std::size_t c = 0; c < 3; ++c) sum[c] += value[idx(nx, ny) * 3 + c];
        ++count;
      }
      if (count == 0) {
        next.emplace_back(x, y);
        continue;
      }
      ring.push_back(idx(x, y));
      for (double s : sum) ring_values.push_back(s / count);
    }
    for (std::size_t r = 0; r < ring.size(); ++r) {
      known[ring[r]] = 1;
      for (std::size_t c = 0; c < 3; ++c) value[ring[r] * 3 + c] = ring_values[r * 3 + c];
    }
    remaining.swap(next);
  }

  // Gauss-Seidel relaxation toward the discrete harmonic fill.
  constexpr int kMaxSweeps = 2000;
  constexpr double kTolerance = 1e-2;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double max_change = 0.0;
    for (const auto& [x, y] : unknown) {
      double sum[3] = {0, 0, 0};
      int count = 0;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dxs[k];
        const int ny = y + dys[k];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        for (std::size_t c = 0; c < 3; ++c) sum[c] += value[idx(nx, ny) * 3 + c];
        ++count;
      }
      for (std::size_t c = 0; c < 3; ++c) {
        auto& v = value[idx(x, y) * 3 + c];
        const double updated = sum[c] / count;
        max_change = std::max(max_change, std::abs(updated - v));
        v = updated;
      }
    }
    if (max_change < kTolerance) break;
  }

  Frame out = img;
  out.drop_alpha();
  auto dst = out.pixels();
  for (const auto& [x, y] : unknown) {
    for (std::size_t c = 0; c < 3; ++c) dst[idx(x, y) * 3 + c] = round_to_u8(value[idx(x, y) * 3 + c]);
  }
  return out;
}

SyntheticClip parallel_move_sequence(const Frame& img, const Mask& fg_mask, const MotionSpec& spec) {
  spec.validate();
  require_same_size(img, fg_mask);
  const auto box = mask_bbox(fg_mask);
  if (!box) throw Error(ErrorCode::empty_mask, "parallel_move_sequence: foreground mask is empty");
  if (box->x_min < 1 || box->y_min < 1 || box->x_max > img.width() - 1 || box->y_max > img.height() - 1) {
    throw Error(ErrorCode::invalid_spec, "parallel_move_sequence: foreground touches the image border");
  }
  const int w = img.width();
  const int h = img.height();
  const Frame plate = fill_background(img, fg_mask);
  SyntheticClip out;
  for (int i = 0; i < spec.frames; ++i) {
    const double t = frame_param(i, spec.frames);
    const int fx = round_half_up(t * spec.dx);
    const int fy = round_half_up(t * spec.dy);
    const int bx = round_half_up(-0.5 * t * spec.dx);
    const int by = round_half_up(-0.5 * t * spec.dy);
    Frame frame(w, h);
    Mask m(w, h);
    for (int y = 0; y < h; ++y) {
      const int sy = std::clamp(y - by, 0, h - 1);
      for (int x = 0; x < w; ++x) frame.set(x, y, plate.at(std::clamp(x - bx, 0, w - 1), sy));
    }
    for (int y = box->y_min; y < box->y_max; ++y) {
      for (int x = box->x_min; x < box->x_max; ++x) {
        if (!fg_mask.get(x, y)) continue;
        const int tx = x + fx;
        const int ty = y + fy;
        if (tx < 0 || ty < 0 || tx >= w || ty >= h) continue;
        frame.set(tx, ty, img.at(x, y));
        m.set(tx, ty);
      }
    }
    out.clip.frames.push_back(std::move(frame));
    out.masks.push_back(std::move(m));
  }
  return out;
}

SyntheticClip warp_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec) {
  spec.validate();
  require_same_size(img, mask);
  const int w = img.width();
  const int h = img.height();
  const auto src = img.pixels();
  constexpr double kEdge = 1e-9;
  SyntheticClip out;
  for (int i = 0; i < spec.frames; ++i) {
    const Homography inv = invert_homography(interpolate_homography(spec.homography_end, frame_param(i, spec.frames)));
    Frame frame(w, h);
    Mask m(w, h);
    auto dst = frame.pixels();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto [u, v] = apply_homography(inv, x, y);
        if (!(u >= -kEdge && v >= -kEdge && u <= w - 1 + kEdge && v <= h - 1 + kEdge)) continue;
        const std::size_t di = (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) * 3;
        for (int c = 0; c < 3; ++c) dst[di + static_cast<std::size_t>(c)] = round_to_u8(sample_bilinear(src, w, h, 3, c, u, v));
        const int mu = std::clamp(static_cast<int>(std::floor(u + 0.5)), 0, w - 1);
        const int mv = std::clamp(static_cast<int>(std::floor(v + 0.5)), 0, h - 1);
        if (mask.get(mu, mv)) m.set(x, y);
      }
    }
    out.clip.frames.push_back(std::move(frame));
    out.masks.push_back(std::move(m));
  }
  return out;
}

SyntheticClip make_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec) {
  switch (spec.kind) {
    case MotionKind::zoom: return zoom_sequence(img, mask, spec);
    case MotionKind::parallel_move: return parallel_move_sequence(img, mask, spec);
    case MotionKind::warp: return warp_sequence(img, mask, spec);
  }
  throw Error(ErrorCode::invalid_spec, "unknown motion kind");
}

MotionSpec random_motion(MotionKind kind, int frames, int width, int height, SplitMix64& rng) {
  MotionSpec spec;
  spec.kind = kind;
  spec.frames = frames;
  switch (kind) {
    case MotionKind::zoom:
      spec.zoom_end = rng.uniform(0.6, 0.9);
      break;
    case MotionKind::parallel_move:
      spec.dx = rng.uniform(-0.15, 0.15) * width;
      spec.dy = rng.uniform(-0.15, 0.15) * height;
      break;
    case MotionKind::warp: {
      // Small affine part plus a mild perspective term, scaled so corners
      // move by at most a few percent of the image size.
      const double size = std::max(width, height);
      Homography hm = kIdentityHomography;
      hm[0] += rng.uniform(-0.05, 0.05);
      hm[1] += rng.uniform(-0.05, 0.05);
      hm[3] += rng.uniform(-0.05, 0.05);
      hm[4] += rng.uniform(-0.05, 0.05);
      hm[2] = rng.uniform(-0.05, 0.05) * width;
      hm[5] = rng.uniform(-0.05, 0.05) * height;
      hm[6] = rng.uniform(-0.05, 0.05) / size;
      hm[7] = rng.uniform(-0.05, 0.05) / size;
      spec.homography_end = hm;
      break;
    }
  }
  return spec;
}

}  // namespace amodal
