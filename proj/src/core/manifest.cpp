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

#include "amodal/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "amodal/error.hpp"

namespace amodal {

using nlohmann::json;

std::string_view to_string(Strategy s) noexcept { return s == Strategy::hard ? "hard" : "easy"; }

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::pending: return "pending";
    case Verdict::auto_pass: return "auto_pass";
    case Verdict::auto_reject: return "auto_reject";
    case Verdict::human_accept: return "human_accept";
    case Verdict::human_reject: return "human_reject";
  }
  return "pending";
}

std::string_view to_string(RuleId r) noexcept {
  switch (r) {
    case RuleId::depth_occluded: return "depth_occluded";
    case RuleId::touches_boundary: return "touches_boundary";
    case RuleId::too_small: return "too_small";
    case RuleId::too_many_holes: return "too_many_holes";
  }
  return "too_small";
}

Strategy strategy_from_string(std::string_view s) {
  if (s == "easy") return Strategy::easy;
  if (s == "hard") return Strategy::hard;
  throw Error(ErrorCode::invalid_argument, "unknown strategy '" + std::string(s) + "'");
}

Verdict verdict_from_string(std::string_view s) {
  for (const auto v : {Verdict::pending, Verdict::auto_pass, Verdict::auto_reject,
                       Verdict::human_accept, Verdict::human_reject}) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::invalid_argument, "unknown verdict '" + std::string(s) + "'");
}

RuleId rule_from_string(std::string_view s) {
  for (const auto r : {RuleId::depth_occluded, RuleId::touches_boundary, RuleId::too_small,
                       RuleId::too_many_holes}) {
    if (to_string(r) == s) return r;
  }
  throw Error(ErrorCode::invalid_argument, "unknown rule id '" + std::string(s) + "'");
}

void OccluderTrack::validate() const {
  if (positions.size() != scales.size()) {
    throw Error(ErrorCode::invalid_argument, "track positions and scales differ in length");
  }
  for (const double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorCode::invalid_argument, "track scales must be positive and finite");
    }
  }
}

void ClipManifest::validate() const {
  if (clip_id.empty()) throw Error(ErrorCode::invalid_argument, "clip manifest without clip_id");
  track.validate();
  if (occlusion_rates.size() != track.size()) {
    throw Error(ErrorCode::invalid_argument,
                "clip '" + clip_id + "': occlusion_rates length differs from track length");
  }
  for (const double r : occlusion_rates) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "clip '" + clip_id + "': occlusion rate outside [0,1]");
    }
  }
}

std::vector<ShardRange> assign_shards(const std::vector<ClipManifest>& sorted_clips,
                                      std::size_t shard_size) {
  if (shard_size == 0) throw Error(ErrorCode::invalid_argument, "shard_size must be >= 1");
  std::vector<ShardRange> out;
  for (std::size_t begin = 0; begin < sorted_clips.size(); begin += shard_size) {
    const std::size_t end = std::min(begin + shard_size, sorted_clips.size());
    out.push_back({static_cast<int>(out.size()), sorted_clips[begin].clip_id,
                   sorted_clips[end - 1].clip_id, end - begin});
  }
  return out;
}

void DatasetManifest::normalize() {
  std::sort(clips.begin(), clips.end(),
            [](const ClipManifest& a, const ClipManifest& b) { return a.clip_id < b.clip_id; });
  std::sort(skipped.begin(), skipped.end(),
            [](const SkippedClip& a, const SkippedClip& b) { return a.clip_id < b.clip_id; });
  shards = assign_shards(clips, shard_size);
}

void DatasetManifest::validate() const {
  std::set<std::string_view> ids;
  for (const auto& c : clips) {
    c.validate();
    if (!ids.insert(c.clip_id).second) {
      throw Error(ErrorCode::invalid_argument, "duplicate clip_id '" + c.clip_id + "'");
    }
  }
  // Shards must walk the id-sorted clip list in order, without gaps.
  std::vector<std::string_view> sorted(ids.begin(), ids.end());
  std::size_t cursor = 0;
  for (const auto& s : shards) {
    if (s.count == 0 || cursor + s.count > sorted.size() || sorted[cursor] != s.first_clip_id ||
        sorted[cursor + s.count - 1] != s.last_clip_id) {
      throw Error(ErrorCode::invalid_argument,
                  "shard " + std::to_string(s.shard_id) + " does not match the sorted clip list");
    }
    cursor += s.count;
  }
  if (cursor != sorted.size()) {
    throw Error(ErrorCode::invalid_argument, "shards do not cover every clip");
  }
}

const ClipManifest* DatasetManifest::find(std::string_view clip_id) const {
  for (const auto& c : clips) {
    if (c.clip_id == clip_id) return &c;
  }
  return nullptr;
}

void to_json(json& j, const Point2& p) { j = json::array({p.x, p.y}); }

void from_json(const json& j, Point2& p) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::invalid_argument, "point must be [x, y]");
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
}

void to_json(json& j, const OccluderTrack& t) {
  j = json{{"positions", t.positions}, {"scales", t.scales}};
}

void from_json(const json& j, OccluderTrack& t) {
  j.at("positions").get_to(t.positions);
  j.at("scales").get_to(t.scales);
}

void to_json(json& j, const RuleMeasurement& r) {
  j = json{{"rule", to_string(r.rule)}, {"passed", r.passed}, {"worst", r.worst}};
}

void from_json(const json& j, RuleMeasurement& r) {
  r.rule = rule_from_string(j.at("rule").get<std::string>());
  r.passed = j.at("passed").get<bool>();
  r.worst = j.at("worst").get<double>();
}

void to_json(json& j, const ClipManifest& c) {
  json reasons = json::array();
  for (const auto r : c.reject_reasons) reasons.push_back(to_string(r));
  j = json{{"clip_id", c.clip_id},
           {"strategy", to_string(c.strategy)},
           {"occluder_id", c.occluder_id},
           {"track", c.track},
           {"occlusion_rates", c.occlusion_rates},
           {"feather_radius", c.feather_radius},
           {"rng_seed", c.rng_seed},
           {"verdict", to_string(c.verdict)},
           {"reject_reasons", reasons},
           {"frame_count", c.frame_count},
           {"checks", c.checks}};
}

void from_json(const json& j, ClipManifest& c) {
  c.clip_id = j.at("clip_id").get<std::string>();
  c.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  c.occluder_id = j.at("occluder_id").get<std::string>();
  j.at("track").get_to(c.track);
  j.at("occlusion_rates").get_to(c.occlusion_rates);
  c.feather_radius = j.at("feather_radius").get<int>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  c.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  c.reject_reasons.clear();
  for (const auto& r : j.at("reject_reasons")) c.reject_reasons.push_back(rule_from_string(r.get<std::string>()));
  c.frame_count = j.value("frame_count", 0);
  c.checks.clear();
  if (j.contains("checks")) j.at("checks").get_to(c.checks);
}

void to_json(json& j, const ShardRange& s) {
  j = json{{"shard_id", s.shard_id},
           {"first_clip_id", s.first_clip_id},
           {"last_clip_id", s.last_clip_id},
           {"count", s.count}};
}

void from_json(const json& j, ShardRange& s) {
  s.shard_id = j.at("shard_id").get<int>();
  s.first_clip_id = j.at("first_clip_id").get<std::string>();
  s.last_clip_id = j.at("last_clip_id").get<std::string>();
  s.count = j.at("count").get<std::size_t>();
}

void to_json(json& j, const SkippedClip& s) { j = json{{"clip_id", s.clip_id}, {"reason", s.reason}}; }

void from_json(const json& j, SkippedClip& s) {
  s.clip_id = j.at("clip_id").get<std::string>();
  s.reason = j.at("reason").get<std::string>();
}

void to_json(json& j, const DatasetManifest& m) {
  j = json{{"version", m.version},
           {"difficulty", to_string(m.difficulty)},
           {"shard_size", m.shard_size},
           {"clips", m.clips},
           {"shards", m.shards},
           {"skipped", m.skipped},
           {"config", m.config}};
}

void from_json(const json& j, DatasetManifest& m) {
  m.version = j.at("version").get<std::string>();
  m.difficulty = strategy_from_string(j.at("difficulty").get<std::string>());
  m.shard_size = j.value("shard_size", std::size_t{1000});
  j.at("clips").get_to(m.clips);
  j.at("shards").get_to(m.shards);
  m.skipped.clear();
  if (j.contains("skipped")) j.at("skipped").get_to(m.skipped);
  m.config = j.value("config", json::object());
}

namespace {

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based position of the offending byte.
    throw MalformedFileError(e.byte > 0 ? e.byte - 1 : 0, std::string("json: ") + e.what());
  }
}

template <typename T>
T from_json_checked(const json& j) {
  try {
    return j.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("manifest schema: ") + e.what());
  }
}

}  // namespace

std::string serialize_manifest(const DatasetManifest& m) { return json(m).dump(2) + "\n"; }

std::string serialize_clip_manifest(const ClipManifest& c) { return json(c).dump(2) + "\n"; }

DatasetManifest parse_manifest(std::string_view text) {
  auto m = from_json_checked<DatasetManifest>(parse_json(text));
  m.validate();
  return m;
}

ClipManifest parse_clip_manifest(std::string_view text) {
  auto c = from_json_checked<ClipManifest>(parse_json(text));
  c.validate();
  return c;
}

}  // namespace amodal
