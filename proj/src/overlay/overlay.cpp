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

#include "amodal/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "amodal/error.hpp"
#include "amodal/resample.hpp"

namespace amodal {

StrategyConfig StrategyConfig::defaults(Strategy s) {
  StrategyConfig c;
  c.strategy = s;
  if (s == Strategy::hard) {
    c.rate_lo = 0.4;
    c.rate_hi = 0.8;
    c.feather_radius = 2;
  }
  return c;
}

void StrategyConfig::validate() const {
  if (!(rate_lo >= 0.0 && rate_lo < rate_hi && rate_hi <= 1.0)) {
    throw Error(ErrorCode::config, "rate range must satisfy 0 <= lo < hi <= 1");
  }
  if (placement_budget < 1) throw Error(ErrorCode::config, "placement_budget must be >= 1");
  if (feather_radius < 0) throw Error(ErrorCode::config, "feather_radius must be >= 0");
  if (!(scale_lo > 0.0 && scale_lo <= scale_hi && std::isfinite(scale_hi))) {
    throw Error(ErrorCode::config, "scale range must satisfy 0 < lo <= hi");
  }
}

void to_json(nlohmann::json& j, const StrategyConfig& c) {
  j = nlohmann::json{{"strategy", to_string(c.strategy)},
                     {"rate_lo", c.rate_lo},
                     {"rate_hi", c.rate_hi},
                     {"feather_radius", c.feather_radius},
                     {"placement_budget", c.placement_budget},
                     {"scale_lo", c.scale_lo},
                     {"scale_hi", c.scale_hi}};
}

void from_json(const nlohmann::json& j, StrategyConfig& c) {
  const Strategy s = j.contains("strategy")
                         ? strategy_from_string(j.at("strategy").get<std::string>())
                         : c.strategy;
  StrategyConfig d = (s == c.strategy) ? c : StrategyConfig::defaults(s);
  d.rate_lo = j.value("rate_lo", d.rate_lo);
  d.rate_hi = j.value("rate_hi", d.rate_hi);
  d.feather_radius = j.value("feather_radius", d.feather_radius);
  d.placement_budget = j.value("placement_budget", d.placement_budget);
  d.scale_lo = j.value("scale_lo", d.scale_lo);
  d.scale_hi = j.value("scale_hi", d.scale_hi);
  c = d;
}

double occlusion_rate(const Mask& object, const Mask& occluder_footprint) {
  const std::size_t area = object.area();
  if (area == 0) throw Error(ErrorCode::empty_mask, "occlusion_rate: object mask is empty");
  return static_cast<double>(intersection_area(object, occluder_footprint)) /
         static_cast<double>(area);
}

OccluderTrack interpolate_track_easy(Point2 p_st, double s_st, Point2 p_ed, double s_ed, int n) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "interpolate_track_easy: need at least 2 frames");
  if (!(s_st > 0.0) || !(s_ed > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "interpolate_track_easy: scales must be positive");
  }
  OccluderTrack t;
  t.positions.reserve(static_cast<std::size_t>(n));
  t.scales.reserve(static_cast<std::size_t>(n));
  // Frame n-1 carries the end placement, so the parameter is i/(n-1).
  // std::lerp is exact at both ends.
  for (int i = 0; i < n; ++i) {
    const double a = static_cast<double>(i) / static_cast<double>(n - 1);
    t.positions.push_back({std::lerp(p_st.x, p_ed.x, a), std::lerp(p_st.y, p_ed.y, a)});
    t.scales.push_back(std::lerp(s_st, s_ed, a));
  }
  return t;
}

OccluderTrack track_hard(Point2 p_st, double s_st, std::span<const BBox> bboxes) {
  if (bboxes.empty()) throw Error(ErrorCode::invalid_argument, "track_hard: no bounding boxes");
  if (!(s_st > 0.0)) throw Error(ErrorCode::invalid_argument, "track_hard: scale must be positive");
  for (std::size_t i = 0; i < bboxes.size(); ++i) {
    if (bboxes[i].degenerate()) {
      throw Error(ErrorCode::degenerate_bbox,
                  "track_hard: degenerate bbox at frame " + std::to_string(i));
    }
  }
  const BBox& first = bboxes.front();
  const double h_st = first.height();
  const double w_st = first.width();
  OccluderTrack t;
  t.positions.reserve(bboxes.size());
  t.scales.reserve(bboxes.size());
  for (const auto& b : bboxes) {
    t.positions.push_back({b.center_x() - first.center_x() + p_st.x,
                           b.center_y() - first.center_y() + p_st.y});
    t.scales.push_back(std::cbrt(std::max(b.height() / h_st, b.width() / w_st)) * s_st);
  }
  return t;
}

std::vector<std::uint8_t> feather(std::span<const std::uint8_t> alpha, int width, int height,
                                  int radius) {
  if (radius < 0) throw Error(ErrorCode::invalid_argument, "feather: radius must be >= 0");
  if (alpha.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::dimension_mismatch, "feather: plane size does not match dimensions");
  }
  std::vector<std::uint8_t> out(alpha.begin(), alpha.end());
  if (radius == 0) return out;
  const auto w = static_cast<std::size_t>(width);
  // Separable integer window sums, one rounding division at the end.
  std::vector<std::uint32_t> rows(alpha.size());
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* src = alpha.data() + static_cast<std::size_t>(y) * w;
    auto px = [&](int x) -> std::uint32_t { return src[std::clamp(x, 0, width - 1)]; };
    std::uint32_t sum = 0;
    for (int k = -radius; k <= radius; ++k) sum += px(k);
    for (int x = 0; x < width; ++x) {
      rows[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] = sum;
      sum += px(x + radius + 1);
      sum -= px(x - radius);
    }
  }
  const auto den = static_cast<std::uint32_t>((2 * radius + 1) * (2 * radius + 1));
  for (int x = 0; x < width; ++x) {
    auto px = [&](int y) -> std::uint32_t {
      return rows[static_cast<std::size_t>(std::clamp(y, 0, height - 1)) * w +
                  static_cast<std::size_t>(x)];
    };
    std::uint32_t sum = 0;
    for (int k = -radius; k <= radius; ++k) sum += px(k);
    for (int y = 0; y < height; ++y) {
      out[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] =
          static_cast<std::uint8_t>(std::min<std::uint32_t>((2 * sum + den) / (2 * den), 255));
      sum += px(y + radius + 1);
      sum -= px(y - radius);
    }
  }
  return out;
}

namespace {

/// Bilinear alpha where texels outside the occluder are transparent.
double sample_alpha(std::span<const std::uint8_t> alpha, int w, int h, double u, double v) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double fx = u - x0;
  const double fy = v - y0;
  auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return alpha[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)];
  };
  const double top = px(x0, y0) + (px(x0 + 1, y0) - px(x0, y0)) * fx;
  const double bottom = px(x0, y0 + 1) + (px(x0 + 1, y0 + 1) - px(x0, y0 + 1)) * fx;
  return top + (bottom - top) * fy;
}

}  // namespace

OccluderLayer rasterize_occluder(const OccluderAsset& occluder, Point2 center, double scale,
                                 int feather_radius) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::invalid_argument, "rasterize_occluder: scale must be positive");
  }
  if (feather_radius < 0) throw Error(ErrorCode::invalid_argument, "feather radius must be >= 0");
  const int ow = occluder.width();
  const int oh = occluder.height();
  const double half_w = 0.5 * ow * scale;
  const double half_h = 0.5 * oh * scale;
  const int pad = 1 + feather_radius;
  OccluderLayer layer;
  layer.region = {static_cast<int>(std::floor(center.x - half_w)) - pad,
                  static_cast<int>(std::floor(center.y - half_h)) - pad,
                  static_cast<int>(std::ceil(center.x + half_w)) + pad,
                  static_cast<int>(std::ceil(center.y + half_h)) + pad};
  const int rw = layer.region.width();
  const int rh = layer.region.height();
  const std::size_t n = static_cast<std::size_t>(rw) * static_cast<std::size_t>(rh);
  layer.rgb.assign(n * 3, 0);
  std::vector<std::uint8_t> binary(n, 0);
  const auto rgba_alpha = occluder.rgba.alpha();
  const auto rgb = occluder.rgba.pixels();
  const double inv = 1.0 / scale;
  for (int ry = 0; ry < rh; ++ry) {
    const double v = (layer.region.y_min + ry + 0.5 - center.y) * inv + 0.5 * oh - 0.5;
    if (v <= -1.0 || v >= oh) continue;
    for (int rx = 0; rx < rw; ++rx) {
      const double u = (layer.region.x_min + rx + 0.5 - center.x) * inv + 0.5 * ow - 0.5;
      if (u <= -1.0 || u >= ow) continue;
      if (sample_alpha(rgba_alpha, ow, oh, u, v) < 128.0) continue;
      const std::size_t i = static_cast<std::size_t>(ry) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(rx);
      binary[i] = 255;
      for (int c = 0; c < 3; ++c) {
        layer.rgb[i * 3 + static_cast<std::size_t>(c)] = round_to_u8(sample_bilinear(rgb, ow, oh, 3, c, u, v));
      }
    }
  }
  if (feather_radius > 0) {
    layer.alpha = feather(binary, rw, rh, feather_radius);
    // Feathering spreads alpha past the silhouette; those pixels need a color.
    // Use the nearest silhouette color along the sampling direction by
    // clamping into the occluder texture.
    for (int ry = 0; ry < rh; ++ry) {
      const double v = (layer.region.y_min + ry + 0.5 - center.y) * inv + 0.5 * oh - 0.5;
      for (int rx = 0; rx < rw; ++rx) {
        const std::size_t i = static_cast<std::size_t>(ry) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(rx);
        if (binary[i] != 0 || layer.alpha[i] == 0) continue;
        const double u = (layer.region.x_min + rx + 0.5 - center.x) * inv + 0.5 * ow - 0.5;
        for (int c = 0; c < 3; ++c) {
          layer.rgb[i * 3 + static_cast<std::size_t>(c)] = round_to_u8(sample_bilinear(rgb, ow, oh, 3, c, u, v));
        }
      }
    }
  } else {
    layer.alpha = std::move(binary);
  }
  return layer;
}

Mask occluder_footprint(const OccluderLayer& layer, int width, int height) {
  Mask m(width, height);
  const BBox clip = layer.region.clamped(width, height);
  for (int y = clip.y_min; y < clip.y_max; ++y) {
    for (int x = clip.x_min; x < clip.x_max; ++x) {
      if (layer.alpha_at(x, y) >= 128) m.set(x, y);
    }
  }
  return m;
}

Frame composite(const Frame& frame, const OccluderLayer& layer) {
  Frame out = frame;
  const BBox clip = layer.region.clamped(frame.width(), frame.height());
  auto dst = out.pixels();
  const int rw = layer.region.width();
  for (int y = clip.y_min; y < clip.y_max; ++y) {
    for (int x = clip.x_min; x < clip.x_max; ++x) {
      const std::size_t li = static_cast<std::size_t>(y - layer.region.y_min) * static_cast<std::size_t>(rw) +
                             static_cast<std::size_t>(x - layer.region.x_min);
      const std::uint32_t a = layer.alpha[li];
      if (a == 0) continue;
      const std::size_t fi = (static_cast<std::size_t>(y) * static_cast<std::size_t>(frame.width()) +
                              static_cast<std::size_t>(x)) * 3;
      for (std::size_t c = 0; c < 3; ++c) {
        const std::uint32_t num = a * layer.rgb[li * 3 + c] + (255 - a) * dst[fi + c];
        // round(num / 255), half up; num / 255 is never exactly k + 1/2
        dst[fi + c] = static_cast<std::uint8_t>((2 * num + 255) / 510);
      }
    }
  }
  return out;
}

Frame composite(const Frame& frame, const OccluderAsset& occluder, Point2 center, double scale,
                int feather_radius) {
  return composite(frame, rasterize_occluder(occluder, center, scale, feather_radius));
}

namespace {

std::size_t covered_pixels(const OccluderLayer& layer, const Mask& object) {
  const BBox clip = layer.region.clamped(object.width(), object.height());
  std::size_t n = 0;
  for (int y = clip.y_min; y < clip.y_max; ++y) {
    for (int x = clip.x_min; x < clip.x_max; ++x) {
      if (object.get(x, y) && layer.alpha_at(x, y) >= 128) ++n;
    }
  }
  return n;
}

std::optional<Placement> sample_one(const Mask& object, const OccluderAsset& occluder,
                                    const StrategyConfig& cfg, SplitMix64& rng, int& attempts) {
  const auto box = mask_bbox(object);
  if (!box) throw Error(ErrorCode::empty_mask, "sample_placement: object mask is empty");
  const double area = static_cast<double>(object.area());
  const double object_diag = std::hypot(box->width(), box->height());
  const double occluder_diag = std::hypot(occluder.width(), occluder.height());
  const double base = object_diag / occluder_diag;
  const double log_lo = std::log(cfg.scale_lo);
  const double log_hi = std::log(cfg.scale_hi);
  const double span_x = 1.5 * box->width();
  const double span_y = 1.5 * box->height();
  for (int attempt = 0; attempt < cfg.placement_budget; ++attempt) {
    ++attempts;
    const Point2 center{box->center_x() + (rng.uniform01() - 0.5) * span_x,
                        box->center_y() + (rng.uniform01() - 0.5) * span_y};
    const double scale = base * std::exp(rng.uniform(log_lo, log_hi));
    const auto layer = rasterize_occluder(occluder, center, scale, cfg.feather_radius);
    const double rate = static_cast<double>(covered_pixels(layer, object)) / area;
    if (rate >= cfg.rate_lo && rate <= cfg.rate_hi) return Placement{center, scale, rate};
  }
  return std::nullopt;
}

}  // namespace

std::optional<PlacementPlan> sample_placement(std::span<const Mask> object_masks,
                                              const OccluderAsset& occluder,
                                              const StrategyConfig& cfg, SplitMix64& rng) {
  if (object_masks.empty()) throw Error(ErrorCode::invalid_argument, "sample_placement: no masks");
  cfg.validate();
  PlacementPlan plan;
  auto start = sample_one(object_masks.front(), occluder, cfg, rng, plan.attempts);
  if (!start) return std::nullopt;
  plan.start = *start;
  if (cfg.strategy == Strategy::easy && object_masks.size() > 1) {
    auto end = sample_one(object_masks.back(), occluder, cfg, rng, plan.attempts);
    if (!end) return std::nullopt;
    plan.end = *end;
  }
  return plan;
}

Frame isolate_on_white(const Frame& frame, const Mask& mask) {
  if (frame.width() != mask.width() || frame.height() != mask.height()) {
    throw Error(ErrorCode::dimension_mismatch, "isolate_on_white: frame and mask sizes differ");
  }
  Frame out(frame.width(), frame.height(), kWhite);
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (mask.get(x, y)) out.set(x, y, frame.at(x, y));
    }
  }
  return out;
}

std::variant<SynthPair, SynthFailure> synthesize_pair(const std::string& clip_id,
                                                      const VideoClip& clip,
                                                      std::span<const Mask> masks,
                                                      const OccluderAsset& occluder,
                                                      const StrategyConfig& cfg,
                                                      std::uint64_t seed, SplitMix64& rng) {
  clip.validate();
  cfg.validate();
  if (masks.size() != clip.size()) {
    throw Error(ErrorCode::dimension_mismatch, "synthesize_pair: mask count differs from frame count");
  }
  for (const auto& m : masks) {
    if (m.width() != clip.width() || m.height() != clip.height()) {
      throw Error(ErrorCode::dimension_mismatch, "synthesize_pair: mask size differs from frame size");
    }
  }
  const std::size_t n = clip.size();
  if (masks.front().empty() || (cfg.strategy == Strategy::easy && masks.back().empty())) {
    return SynthFailure{clip_id, "endpoint mask is empty"};
  }

  const auto plan = sample_placement(masks, occluder, cfg, rng);
  if (!plan) {
    return SynthFailure{clip_id, "no placement within rate range after " +
                                     std::to_string(cfg.placement_budget) + " attempts per endpoint"};
  }

  OccluderTrack track;
  if (n == 1) {
    track.positions = {plan->start.center};
    track.scales = {plan->start.scale};
  } else if (cfg.strategy == Strategy::easy) {
    track = interpolate_track_easy(plan->start.center, plan->start.scale, plan->end->center,
                                   plan->end->scale, static_cast<int>(n));
  } else {
    std::vector<BBox> boxes;
    boxes.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto b = mask_bbox(masks[i]);
      if (!b) return SynthFailure{clip_id, "empty object mask at frame " + std::to_string(i)};
      boxes.push_back(*b);
    }
    track = track_hard(plan->start.center, plan->start.scale, boxes);
  }

  SynthPair pair;
  pair.occluded.fps = clip.fps;
  pair.gt.fps = clip.fps;
  auto& mf = pair.manifest;
  mf.clip_id = clip_id;
  mf.strategy = cfg.strategy;
  mf.occluder_id = occluder.id;
  mf.feather_radius = cfg.feather_radius;
  mf.rng_seed = seed;
  mf.verdict = Verdict::pending;
  mf.frame_count = static_cast<int>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto layer = rasterize_occluder(occluder, track.positions[i], track.scales[i], cfg.feather_radius);
    Mask footprint = occluder_footprint(layer, clip.width(), clip.height());
    pair.occluded.frames.push_back(composite(clip.frames[i], layer));
    pair.gt.frames.push_back(isolate_on_white(clip.frames[i], masks[i]));
    pair.gt_masks.push_back(masks[i]);
    // An object that left the frame has nothing to occlude.
    mf.occlusion_rates.push_back(masks[i].empty() ? 0.0 : occlusion_rate(masks[i], footprint));
    Mask visible = masks[i];
    visible.subtract(footprint);
    pair.visible_masks.push_back(std::move(visible));
    pair.occluder_masks.push_back(std::move(footprint));
  }
  mf.track = std::move(track);
  return pair;
}

}  // namespace amodal
