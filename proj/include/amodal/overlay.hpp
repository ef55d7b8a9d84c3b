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
#include <variant>
#include <vector>

#include <json.hpp>

#include "amodal/image.hpp"
#include "amodal/manifest.hpp"
#include "amodal/mask.hpp"
#include "amodal/occluder.hpp"
#include "amodal/rng.hpp"

namespace amodal {

struct StrategyConfig {
  Strategy strategy = Strategy::easy;
  double rate_lo = 0.3;
  double rate_hi = 0.7;
  int feather_radius = 0;
  int placement_budget = 200;
  /// Multipliers on (object bbox diagonal / occluder diagonal).
  double scale_lo = 0.3;
  double scale_hi = 2.0;

  /// Easy: rates [0.3, 0.7] at both ends, no feathering.
  /// Hard: rate [0.4, 0.8] on the first frame, 2 px feathering.
  static StrategyConfig defaults(Strategy s);
  void validate() const;

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

void to_json(nlohmann::json& j, const StrategyConfig& c);
/// Missing keys keep the defaults of the strategy named in `strategy`
/// (or of the strategy already in `c`).
void from_json(const nlohmann::json& j, StrategyConfig& c);

/// area(object AND footprint) / area(object). Throws on an empty object.
double occlusion_rate(const Mask& object, const Mask& occluder_footprint);

/// Linear track from (p_st, s_st) at frame 0 to (p_ed, s_ed) at frame n-1.
OccluderTrack interpolate_track_easy(Point2 p_st, double s_st, Point2 p_ed, double s_ed, int n);

/// Bounding-box locked track: p_i = c_i - c_0 + p_st and
/// s_i = max(h_i/h_0, w_i/w_0)^(1/3) * s_st, with no clamping.
OccluderTrack track_hard(Point2 p_st, double s_st, std::span<const BBox> bboxes);

/// An occluder rendered into frame space: straight RGB and final (possibly
/// feathered) alpha over `region`, which may extend past the frame.
struct OccluderLayer {
  BBox region;
  std::vector<std::uint8_t> rgb;
  std::vector<std::uint8_t> alpha;

  std::uint8_t alpha_at(int x, int y) const noexcept {
    if (x < region.x_min || y < region.y_min || x >= region.x_max || y >= region.y_max) return 0;
    return alpha[static_cast<std::size_t>(y - region.y_min) * static_cast<std::size_t>(region.width()) +
                 static_cast<std::size_t>(x - region.x_min)];
  }
};

/// Box blur of the plane with kernel (2r+1)^2, edges replicated, exact
/// integer rounding. r = 0 returns the input.
std::vector<std::uint8_t> feather(std::span<const std::uint8_t> alpha, int width, int height, int radius);

/// Resamples the occluder (bilinear) scaled by `scale` about its center and
/// centered at `center`. The alpha is thresholded at 128 to a binary
/// silhouette, then feathered with `feather_radius`.
OccluderLayer rasterize_occluder(const OccluderAsset& occluder, Point2 center, double scale,
                                 int feather_radius);

/// Pixels of the frame where the layer's alpha is >= 128.
Mask occluder_footprint(const OccluderLayer& layer, int width, int height);

/// out = a*occ + (1-a)*frame per channel, a = alpha/255, rounded half up.
Frame composite(const Frame& frame, const OccluderLayer& layer);
Frame composite(const Frame& frame, const OccluderAsset& occluder, Point2 center, double scale,
                int feather_radius);

struct Placement {
  Point2 center;
  double scale = 1.0;
  double rate = 0.0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct PlacementPlan {
  Placement start;
  /// Easy only: the independent placement for the last frame.
  std::optional<Placement> end;
  int attempts = 0;
};

/// Rejection-samples centers uniformly over the object bbox grown 1.5x and
/// scales log-uniformly over the configured range until the rate lands in
/// [rate_lo, rate_hi]. Easy samples a second placement on the last mask.
/// Each endpoint gets `placement_budget` attempts; nullopt on exhaustion.
std::optional<PlacementPlan> sample_placement(std::span<const Mask> object_masks,
                                              const OccluderAsset& occluder,
                                              const StrategyConfig& cfg, SplitMix64& rng);

struct SynthPair {
  VideoClip occluded;
  VideoClip gt;
  std::vector<Mask> gt_masks;
  std::vector<Mask> occluder_masks;
  std::vector<Mask> visible_masks;
  ClipManifest manifest;
};

struct SynthFailure {
  std::string clip_id;
  std::string reason;
};

/// Builds the track, composites every frame and records per-frame rates. The
/// GT clip is the object on white. `rng` must be seeded with `seed`, which is
/// only recorded.
std::variant<SynthPair, SynthFailure> synthesize_pair(const std::string& clip_id,
                                                      const VideoClip& clip,
                                                      std::span<const Mask> masks,
                                                      const OccluderAsset& occluder,
                                                      const StrategyConfig& cfg,
                                                      std::uint64_t seed, SplitMix64& rng);

/// Object pixels kept, everything else white.
Frame isolate_on_white(const Frame& frame, const Mask& mask);

}  // namespace amodal
