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

#include "amodal/amodal_check.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "amodal/error.hpp"

namespace amodal {

void CheckConfig::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (boundary_margin < 0 || max_hole_count < 0 || depth_band < 0) {
    throw Error(ErrorCode::config, "check thresholds must be non-negative");
  }
  if (!fraction(min_area_fraction) || !fraction(max_hole_area_fraction) ||
      !fraction(depth_closer_fraction_threshold)) {
    throw Error(ErrorCode::config, "check fractions must lie in [0, 1]");
  }
}

void to_json(nlohmann::json& j, const CheckConfig& c) {
  j = nlohmann::json{{"boundary_margin", c.boundary_margin},
                     {"min_area_fraction", c.min_area_fraction},
                     {"max_hole_count", c.max_hole_count},
                     {"max_hole_area_fraction", c.max_hole_area_fraction},
                     {"depth_band", c.depth_band},
                     {"depth_closer_fraction_threshold", c.depth_closer_fraction_threshold}};
}

void from_json(const nlohmann::json& j, CheckConfig& c) {
  c.boundary_margin = j.value("boundary_margin", c.boundary_margin);
  c.min_area_fraction = j.value("min_area_fraction", c.min_area_fraction);
  c.max_hole_count = j.value("max_hole_count", c.max_hole_count);
  c.max_hole_area_fraction = j.value("max_hole_area_fraction", c.max_hole_area_fraction);
  c.depth_band = j.value("depth_band", c.depth_band);
  c.depth_closer_fraction_threshold =
      j.value("depth_closer_fraction_threshold", c.depth_closer_fraction_threshold);
}

namespace {

void require_non_empty(const Mask& m, const char* rule) {
  if (m.empty()) throw Error(ErrorCode::empty_mask, std::string(rule) + ": mask is empty");
}

}  // namespace

CheckResult check_boundary(const Mask& m, const CheckConfig& cfg) {
  require_non_empty(m, "check_boundary");
  // Only the box matters: the nearest set bit to each edge lies on the box.
  const BBox box = *mask_bbox(m);
  const int distance = std::min({box.x_min, box.y_min, m.width() - box.x_max, m.height() - box.y_max});
  return {RuleId::touches_boundary, distance >= cfg.boundary_margin, static_cast<double>(distance)};
}

CheckResult check_area(const Mask& m, const CheckConfig& cfg) {
  const double fraction = static_cast<double>(m.area()) / static_cast<double>(m.pixel_count());
  return {RuleId::too_small, !(fraction < cfg.min_area_fraction), fraction};
}

HoleStats find_holes(const Mask& m) {
  const int w = m.width();
  const int h = m.height();
  // 0 = background unvisited, 1 = foreground, 2 = visited background
  std::vector<std::uint8_t> state = m.to_bytes();
  for (auto& v : state) v = v ? 1 : 0;
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

  std::vector<std::pair<int, int>> stack;
  auto flood = [&](int sx, int sy) {
    std::size_t size = 0;
    state[idx(sx, sy)] = 2;
    stack.emplace_back(sx, sy);
    while (!stack.empty()) {
      const auto [x, y] = stack.back();
      stack.pop_back();
      ++size;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        auto& s = state[idx(nx[k], ny[k])];
        if (s == 0) {
          s = 2;
          stack.emplace_back(nx[k], ny[k]);
        }
      }
    }
    return size;
  };

  for (int x = 0; x < w; ++x) {
    if (state[idx(x, 0)] == 0) flood(x, 0);
    if (state[idx(x, h - 1)] == 0) flood(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    if (state[idx(0, y)] == 0) flood(0, y);
    if (state[idx(w - 1, y)] == 0) flood(w - 1, y);
  }
  HoleStats stats;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (state[idx(x, y)] == 0) {
        ++stats.count;
        stats.area += flood(x, y);
      }
    }
  }
  return stats;
}

CheckResult check_holes(const Mask& m, const CheckConfig& cfg) {
  require_non_empty(m, "check_holes");
  const HoleStats holes = find_holes(m);
  const bool too_many = holes.count > cfg.max_hole_count;
  const bool too_large = static_cast<double>(holes.area) >
                         cfg.max_hole_area_fraction * static_cast<double>(m.area());
  return {RuleId::too_many_holes, !(too_many || too_large), static_cast<double>(holes.count)};
}

namespace {

/// Square (Chebyshev) dilation by `radius` as two separable running-max passes.
std::vector<std::uint8_t> dilate_square(const Mask& m, int radius) {
  const int w = m.width();
  const int h = m.height();
  std::vector<std::uint8_t> src = m.to_bytes();
  std::vector<std::uint8_t> tmp(src.size(), 0);
  std::vector<std::uint8_t> out(src.size(), 0);
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };
  for (int y = 0; y < h; ++y) {
    int last_set = std::numeric_limits<int>::min() / 2;
    // forward then backward sweep keeps each pass linear in width
    for (int x = 0; x < w; ++x) {
      if (src[idx(x, y)]) last_set = x;
      if (x - last_set <= radius) tmp[idx(x, y)] = 1;
    }
    last_set = std::numeric_limits<int>::max() / 2;
    for (int x = w - 1; x >= 0; --x) {
      if (src[idx(x, y)]) last_set = x;
      if (last_set - x <= radius) tmp[idx(x, y)] = 1;
    }
  }
  for (int x = 0; x < w; ++x) {
    int last_set = std::numeric_limits<int>::min() / 2;
    for (int y = 0; y < h; ++y) {
      if (tmp[idx(x, y)]) last_set = y;
      if (y - last_set <= radius) out[idx(x, y)] = 1;
    }
    last_set = std::numeric_limits<int>::max() / 2;
    for (int y = h - 1; y >= 0; --y) {
      if (tmp[idx(x, y)]) last_set = y;
      if (last_set - y <= radius) out[idx(x, y)] = 1;
    }
  }
  return out;
}

}  // namespace

CheckResult check_depth_occlusion(const Mask& m, const DepthMap& d, const CheckConfig& cfg) {
  if (d.width() != m.width() || d.height() != m.height()) {
    throw Error(ErrorCode::dimension_mismatch, "check_depth_occlusion: depth and mask sizes differ");
  }
  require_non_empty(m, "check_depth_occlusion");
  const int w = m.width();
  const int h = m.height();

  std::vector<float> boundary;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m.get(x, y)) continue;
      if (!m.test(x - 1, y) || !m.test(x + 1, y) || !m.test(x, y - 1) || !m.test(x, y + 1)) {
        boundary.push_back(d.at(x, y));
      }
    }
  }
  const auto mid = boundary.begin() + static_cast<std::ptrdiff_t>((boundary.size() - 1) / 2);
  std::nth_element(boundary.begin(), mid, boundary.end());
  const float reference = *mid;

  const auto dilated = dilate_square(m, cfg.depth_band);
  std::size_t band = 0;
  std::size_t closer = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!dilated[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] || m.get(x, y)) continue;
      ++band;
      if (d.at(x, y) < reference) ++closer;
    }
  }
  const double fraction = band == 0 ? 0.0 : static_cast<double>(closer) / static_cast<double>(band);
  return {RuleId::depth_occluded, !(fraction > cfg.depth_closer_fraction_threshold), fraction};
}

std::vector<RuleMeasurement> AmodalCheckReport::summary() const {
  std::map<RuleId, RuleMeasurement> worst;
  for (const auto& frame : per_frame) {
    for (const auto& r : frame) {
      auto [it, inserted] = worst.try_emplace(r.rule, RuleMeasurement{r.rule, r.passed, r.measured});
      if (inserted) continue;
      auto& w = it->second;
      w.passed = w.passed && r.passed;
      // Smaller is worse for distance and area, larger for holes and depth.
      if (r.rule == RuleId::touches_boundary || r.rule == RuleId::too_small) {
        w.worst = std::min(w.worst, r.measured);
      } else {
        w.worst = std::max(w.worst, r.measured);
      }
    }
  }
  std::vector<RuleMeasurement> out;
  for (const auto& [rule, m] : worst) out.push_back(m);
  return out;
}

AmodalCheckReport run_amodal_check(std::span<const Mask> masks,
                                   std::optional<std::span<const DepthMap>> depths,
                                   const CheckConfig& cfg) {
  if (masks.empty()) throw Error(ErrorCode::invalid_argument, "run_amodal_check: no masks");
  if (depths && depths->size() != masks.size()) {
    throw Error(ErrorCode::dimension_mismatch, "run_amodal_check: depth count differs from mask count");
  }
  cfg.validate();
  AmodalCheckReport report;
  std::set<RuleId> failed;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const Mask& m = masks[i];
    std::vector<CheckResult> results;
    results.push_back(check_area(m, cfg));
    if (!m.empty()) {
      results.push_back(check_boundary(m, cfg));
      results.push_back(check_holes(m, cfg));
      if (depths) results.push_back(check_depth_occlusion(m, (*depths)[i], cfg));
    }
    for (const auto& r : results) {
      if (!r.passed) failed.insert(r.rule);
    }
    report.per_frame.push_back(std::move(results));
  }
  report.reject_reasons.assign(failed.begin(), failed.end());
  report.verdict = failed.empty() ? Verdict::pending : Verdict::auto_reject;
  return report;
}

}  // namespace amodal
