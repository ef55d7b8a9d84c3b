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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace amodal {

enum class Strategy { easy, hard };
enum class Verdict { pending, auto_pass, auto_reject, human_accept, human_reject };
enum class RuleId { depth_occluded, touches_boundary, too_small, too_many_holes };

std::string_view to_string(Strategy s) noexcept;
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(RuleId r) noexcept;
Strategy strategy_from_string(std::string_view s);
Verdict verdict_from_string(std::string_view s);
RuleId rule_from_string(std::string_view s);

/// Sub-pixel position in frame coordinates (origin top-left, y down; pixel
/// (x, y) covers [x, x+1) x [y, y+1)).
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct OccluderTrack {
  std::vector<Point2> positions;
  std::vector<double> scales;

  std::size_t size() const noexcept { return positions.size(); }
  /// Throws unless lengths match and every scale is positive and finite.
  void validate() const;

  friend bool operator==(const OccluderTrack&, const OccluderTrack&) = default;
};

/// Worst value of one amodal-check rule over all frames of a candidate.
struct RuleMeasurement {
  RuleId rule = RuleId::too_small;
  bool passed = true;
  double worst = 0.0;

  friend bool operator==(const RuleMeasurement&, const RuleMeasurement&) = default;
};

struct ClipManifest {
  std::string clip_id;
  Strategy strategy = Strategy::easy;
  std::string occluder_id;
  OccluderTrack track;
  std::vector<double> occlusion_rates;
  int feather_radius = 0;
  std::uint64_t rng_seed = 0;
  Verdict verdict = Verdict::pending;
  std::vector<RuleId> reject_reasons;
  int frame_count = 0;
  std::vector<RuleMeasurement> checks;

  void validate() const;

  friend bool operator==(const ClipManifest&, const ClipManifest&) = default;
};

/// Clip ids covered by one shard, inclusive on both ends, in sorted order.
struct ShardRange {
  int shard_id = 0;
  std::string first_clip_id;
  std::string last_clip_id;
  std::size_t count = 0;

  friend bool operator==(const ShardRange&, const ShardRange&) = default;
};

struct SkippedClip {
  std::string clip_id;
  std::string reason;

  friend bool operator==(const SkippedClip&, const SkippedClip&) = default;
};

inline constexpr std::string_view kManifestVersion = "1.0";

struct DatasetManifest {
  std::string version{kManifestVersion};
  Strategy difficulty = Strategy::easy;
  std::size_t shard_size = 1000;
  std::vector<ClipManifest> clips;
  std::vector<ShardRange> shards;
  std::vector<SkippedClip> skipped;
  /// Effective configuration the manifest was produced with.
  nlohmann::json config = nlohmann::json::object();

  /// Sorts clips by id and recomputes `shards` from `shard_size`.
  void normalize();
  /// Throws on duplicate ids or shards that do not partition the clips.
  void validate() const;

  const ClipManifest* find(std::string_view clip_id) const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// Consecutive chunks of `shard_size` over clips already sorted by id.
std::vector<ShardRange> assign_shards(const std::vector<ClipManifest>& sorted_clips,
                                      std::size_t shard_size);

void to_json(nlohmann::json& j, const Point2& p);
void from_json(const nlohmann::json& j, Point2& p);
void to_json(nlohmann::json& j, const OccluderTrack& t);
void from_json(const nlohmann::json& j, OccluderTrack& t);
void to_json(nlohmann::json& j, const RuleMeasurement& r);
void from_json(const nlohmann::json& j, RuleMeasurement& r);
void to_json(nlohmann::json& j, const ClipManifest& c);
void from_json(const nlohmann::json& j, ClipManifest& c);
void to_json(nlohmann::json& j, const ShardRange& s);
void from_json(const nlohmann::json& j, ShardRange& s);
void to_json(nlohmann::json& j, const SkippedClip& s);
void from_json(const nlohmann::json& j, SkippedClip& s);
void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

/// Pretty-printed, keys sorted, trailing newline. Equal values give equal bytes.
std::string serialize_manifest(const DatasetManifest& m);
std::string serialize_clip_manifest(const ClipManifest& c);
/// Throws MalformedFileError (with byte offset) on syntax errors and Error on
/// schema violations.
DatasetManifest parse_manifest(std::string_view text);
ClipManifest parse_clip_manifest(std::string_view text);

}  // namespace amodal
