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

#include <array>
#include <vector>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"
#include "amodal/rng.hpp"

namespace amodal {

/// Row-major 3x3 homography acting on (x, y, 1) in pixel-index coordinates.
using Homography = std::array<double, 9>;

inline constexpr Homography kIdentityHomography{1, 0, 0, 0, 1, 0, 0, 0, 1};

enum class MotionKind { zoom, parallel_move, warp };

struct MotionSpec {
  MotionKind kind = MotionKind::zoom;
  int frames = 14;
  /// Side fraction of the centered crop on the last frame, in (0, 1].
  double zoom_end = 1.0;
  /// Total foreground displacement over the clip, in pixels.
  double dx = 0.0;
  double dy = 0.0;
  Homography homography_end = kIdentityHomography;

  void validate() const;
};

struct SyntheticClip {
  VideoClip clip;
  std::vector<Mask> masks;
};

/// Frame i crops a centered window of side fraction lerp(1, zoom_end, i/(N-1))
/// and resizes it back (bilinear for frames, nearest for masks).
SyntheticClip zoom_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec);

/// Fills the foreground out of the background by repeated 4-neighbor
/// averaging. Every filled value lies within the range of the known pixels
/// bordering the hole.
Frame fill_background(const Frame& img, const Mask& hole);

/// Foreground moves by round(t * (dx, dy)); the filled background moves by
/// round(-t * (dx, dy) / 2), edges replicated, t = i/(N-1).
SyntheticClip parallel_move_sequence(const Frame& img, const Mask& fg_mask, const MotionSpec& spec);

/// Frame i warps by lerp(I, H_end, i/(N-1)) normalized to H[2][2] = 1, using
/// inverse mapping. Frames sample bilinearly, masks by nearest neighbor;
/// samples falling outside the source are black / unset.
SyntheticClip warp_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec);

/// Dispatches on spec.kind.
SyntheticClip make_sequence(const Frame& img, const Mask& mask, const MotionSpec& spec);

Homography interpolate_homography(const Homography& end, double t);
Homography invert_homography(const Homography& h);
double homography_determinant(const Homography& h);
/// Projective image of (x, y).
std::array<double, 2> apply_homography(const Homography& h, double x, double y);

/// Draws parameters for `kind` from fixed moderate ranges: zoom_end in
/// [0.6, 0.9], displacement up to 15% of the image size per axis, and a warp
/// within +-5% of identity in every entry (translation and perspective terms
/// scaled to the image size).
MotionSpec random_motion(MotionKind kind, int frames, int width, int height, SplitMix64& rng);

}  // namespace amodal
