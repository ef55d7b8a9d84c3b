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

// Shared helpers for the test suites: scratch directories, random inputs and
// reference implementations that work on plain byte arrays.

#pragma once

#include <stdlib.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <string>
#include <vector>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"
#include "amodal/rng.hpp"

namespace amodal::testing {

class TempDir {
 public:
  TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "amodal-test-XXXXXX").string();
    if (::mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

using Bytes = std::vector<std::uint8_t>;

inline Mask mask_of(const Bytes& b, int w, int h) { return Mask::from_bytes(w, h, b); }

/// Random blobs: a union of discs and rectangles plus salt noise.
inline Bytes random_blob_bytes(SplitMix64& rng, int w, int h, double noise = 0.02) {
  Bytes b(static_cast<std::size_t>(w) * h, 0);
  const int shapes = 1 + static_cast<int>(rng.below(5));
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform(0, w);
    const double cy = rng.uniform(0, h);
    const double r = rng.uniform(2, std::min(w, h) / 3.0);
    const bool disc = rng.uniform01() < 0.5;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double dx = x + 0.5 - cx;
        const double dy = y + 0.5 - cy;
        const bool in = disc ? dx * dx + dy * dy <= r * r : std::abs(dx) <= r && std::abs(dy) <= r * 0.6;
        if (in) b[static_cast<std::size_t>(y) * w + x] = 1;
      }
    }
  }
  for (auto& v : b) {
    if (rng.uniform01() < noise) v ^= 1;
  }
  return b;
}

inline Bytes random_bytes(SplitMix64& rng, std::size_t n, double p = 0.5) {
  Bytes b(n);
  for (auto& v : b) v = rng.uniform01() < p ? 1 : 0;
  return b;
}

inline Frame random_frame(SplitMix64& rng, int w, int h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3);
  for (auto& v : px) v = static_cast<std::uint8_t>(rng.below(256));
  return Frame(w, h, std::move(px));
}

// ---- reference implementations ----

inline std::size_t oracle_area(const Bytes& b) {
  return static_cast<std::size_t>(std::count_if(b.begin(), b.end(), [](auto v) { return v != 0; }));
}

struct OracleBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool empty = true;
};

inline OracleBox oracle_bbox(const Bytes& b, int w, int h) {
  OracleBox box{w, h, -1, -1, true};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!b[static_cast<std::size_t>(y) * w + x]) continue;
      box.empty = false;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x + 1);
      box.y1 = std::max(box.y1, y + 1);
    }
  }
  return box;
}

/// Holes by union-find labelling of background pixels; a component is a hole
/// when none of its pixels lies on the frame border.
struct OracleHoles {
  int count = 0;
  std::size_t area = 0;
};

inline OracleHoles oracle_holes(const Bytes& b, int w, int h) {
  const std::size_t n = b.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  auto unite = [&](std::size_t a, std::size_t c) { parent[find(a)] = find(c); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (b[i]) continue;
      if (x + 1 < w && !b[i + 1]) unite(i, i + 1);
      if (y + 1 < h && !b[i + w]) unite(i, i + w);
    }
  }
  std::vector<char> touches(n, 0);
  std::vector<std::size_t> size(n, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (b[i]) continue;
      const std::size_t r = find(i);
      ++size[r];
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) touches[r] = 1;
    }
  }
  OracleHoles out;
  for (std::size_t i = 0; i < n; ++i) {
    if (b[i] || find(i) != i || touches[i]) continue;
    ++out.count;
    out.area += size[i];
  }
  return out;
}

/// Smallest distance from a set pixel to the frame edge.
inline int oracle_boundary_distance(const Bytes& b, int w, int h) {
  int best = std::max(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (b[static_cast<std::size_t>(y) * w + x]) best = std::min({best, x, y, w - 1 - x, h - 1 - y});
    }
  }
  return best;
}

/// Closer fraction of the depth band by direct per-pixel comparison.
inline double oracle_depth_fraction(const Bytes& b, const std::vector<float>& depth, int w, int h, int band) {
  auto set = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && b[static_cast<std::size_t>(y) * w + x]; };
  std::vector<float> edge;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (set(x, y) && (!set(x - 1, y) || !set(x + 1, y) || !set(x, y - 1) || !set(x, y + 1))) {
        edge.push_back(depth[static_cast<std::size_t>(y) * w + x]);
      }
    }
  }
  std::sort(edge.begin(), edge.end());
  const float ref = edge[(edge.size() - 1) / 2];
  std::size_t in_band = 0, closer = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (set(x, y)) continue;
      bool near = false;
      for (int dy = -band; dy <= band && !near; ++dy) {
        for (int dx = -band; dx <= band && !near; ++dx) near = set(x + dx, y + dy);
      }
      if (!near) continue;
      ++in_band;
      if (depth[static_cast<std::size_t>(y) * w + x] < ref) ++closer;
    }
  }
  return in_band == 0 ? 0.0 : static_cast<double>(closer) / static_cast<double>(in_band);
}

/// Box average over the full (2r+1)^2 window with replicated edges, rounded half up.
inline Bytes oracle_feather(const Bytes& a, int w, int h, int r) {
  Bytes out(a.size());
  const long den = static_cast<long>(2 * r + 1) * (2 * r + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long sum = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          sum += a[static_cast<std::size_t>(std::clamp(y + dy, 0, h - 1)) * w + std::clamp(x + dx, 0, w - 1)];
        }
      }
      out[static_cast<std::size_t>(y) * w + x] = static_cast<std::uint8_t>(std::floor(static_cast<double>(sum) / den + 0.5));
    }
  }
  return out;
}

inline double oracle_psnr(const Frame& a, const Frame& b, const BBox& r) {
  long double se = 0;
  long n = 0;
  for (int y = r.y_min; y < r.y_max; ++y) {
    for (int x = r.x_min; x < r.x_max; ++x) {
      for (int c = 0; c < 3; ++c) {
        const long double d = static_cast<long double>(a.channel(x, y, c)) - b.channel(x, y, c);
        se += d * d;
        ++n;
      }
    }
  }
  const long double mse = se / n;
  if (mse == 0) return 99.0;
  return std::min(99.0, static_cast<double>(10.0L * std::log10(255.0L * 255.0L / mse)));
}

/// SSIM straight from its definition: 2-D Gaussian weights evaluated with
/// exp() per offset, every valid window, mean over windows and channels.
inline double oracle_ssim(const Frame& a, const Frame& b, const BBox& r) {
  constexpr int kWin = 11;
  constexpr long double kSigma = 1.5L;
  long double wts[kWin][kWin];
  long double total = 0;
  for (int i = 0; i < kWin; ++i) {
    for (int j = 0; j < kWin; ++j) {
      const long double di = i - 5, dj = j - 5;
      wts[i][j] = std::exp(-(di * di + dj * dj) / (2 * kSigma * kSigma));
      total += wts[i][j];
    }
  }
  for (auto& row : wts) {
    for (auto& v : row) v /= total;
  }
  const long double c1 = (0.01L * 255) * (0.01L * 255);
  const long double c2 = (0.03L * 255) * (0.03L * 255);
  long double acc = 0;
  long count = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y = r.y_min; y + kWin <= r.y_max; ++y) {
      for (int x = r.x_min; x + kWin <= r.x_max; ++x) {
        long double ma = 0, mb = 0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            ma += wts[i][j] * a.channel(x + j, y + i, c);
            mb += wts[i][j] * b.channel(x + j, y + i, c);
          }
        }
        long double va = 0, vb = 0, cov = 0;
        for (int i = 0; i < kWin; ++i) {
          for (int j = 0; j < kWin; ++j) {
            const long double da = a.channel(x + j, y + i, c) - ma;
            const long double db = b.channel(x + j, y + i, c) - mb;
            va += wts[i][j] * da * da;
            vb += wts[i][j] * db * db;
            cov += wts[i][j] * da * db;
          }
        }
        acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
  }
  return static_cast<double>(acc / count);
}

inline double oracle_iou(const Bytes& a, const Bytes& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct Window {
  std::size_t start, end;
};

/// Checks the sliding-window invariants; returns an empty string when they hold.
inline std::string check_window_plan(const std::vector<Window>& w, std::size_t n, std::size_t k, std::size_t m) {
  if (n == 0) return w.empty() ? "" : "windows for empty clip";
  if (w.empty()) return "no windows";
  if (w.front().start != 0) return "first window does not start at 0";
  if (w.back().end != n) return "last window does not end at N";
  std::vector<int> covered(n, 0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].end <= w[i].start || w[i].end > n) return "bad window bounds";
    if (w[i].end - w[i].start > k) return "window longer than k";
    if (n >= k && w[i].end - w[i].start != k) return "window shorter than k while N >= k";
    for (std::size_t f = w[i].start; f < w[i].end; ++f) covered[f] = 1;
    if (i == 0) continue;
    if (w[i].start <= w[i - 1].start || w[i].end <= w[i - 1].end) return "windows not strictly advancing";
    if (w[i - 1].end < w[i].start + m) return "overlap smaller than m";
    if (i + 1 < w.size() && w[i - 1].end != w[i].start + m) return "interior overlap differs from m";
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end()) return "frames not covered";
  return "";
}

}  // namespace amodal::testing
