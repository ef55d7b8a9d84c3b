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

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "amodal/image.hpp"
#include "amodal/manifest.hpp"
#include "amodal/mask.hpp"

namespace amodal {

/// Thresholds for the heuristic candidate rules. No published values exist;
/// the defaults are conservative and recorded with every manifest.
struct CheckConfig {
  int boundary_margin = 2;
  double min_area_fraction = 0.005;
  int max_hole_count = 3;
  double max_hole_area_fraction = 0.05;
  int depth_band = 5;
  double depth_closer_fraction_threshold = 0.4;

  void validate() const;

  friend bool operator==(const CheckConfig&, const CheckConfig&) = default;
};

void to_json(nlohmann::json& j, const CheckConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, CheckConfig& c);

struct CheckResult {
  RuleId rule = RuleId::too_small;
  bool passed = true;
  double measured = 0.0;

  friend bool operator==(const CheckResult&, const CheckResult&) = default;
};

/// Fails when a set bit lies closer than `boundary_margin` to an image edge.
/// measured = min over set bits of min(x, y, W-1-x, H-1-y).
CheckResult check_boundary(const Mask& m, const CheckConfig& cfg);

/// measured = area / (W*H).
CheckResult check_area(const Mask& m, const CheckConfig& cfg);

/// Holes are 4-connected background components that cannot reach the image
/// border. measured = hole count.
CheckResult check_holes(const Mask& m, const CheckConfig& cfg);

/// Compares the band dilate(m, depth_band) \ m (square neighborhood) with the
/// lower median depth of the mask's boundary pixels. measured = fraction of
/// band pixels strictly closer than that median; 0 for an empty band.
CheckResult check_depth_occlusion(const Mask& m, const DepthMap& d, const CheckConfig& cfg);

struct HoleStats {
  int count = 0;
  std::size_t area = 0;
};

HoleStats find_holes(const Mask& m);

struct AmodalCheckReport {
  Verdict verdict = Verdict::pending;
  std::vector<std::vector<CheckResult>> per_frame;
  /// Sorted, unique.
  std::vector<RuleId> reject_reasons;

  /// Worst measurement per rule across frames.
  std::vector<RuleMeasurement> summary() const;
};

/// Runs every rule on every frame. A frame whose mask is empty fails
/// too_small and skips the rules that need a non-empty mask. The result is
/// never auto_pass: survivors stay pending for a human decision.
AmodalCheckReport run_amodal_check(std::span<const Mask> masks,
                                   std::optional<std::span<const DepthMap>> depths,
                                   const CheckConfig& cfg);

}  // namespace amodal
