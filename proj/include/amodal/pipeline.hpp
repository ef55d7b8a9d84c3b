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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "amodal/amodal_check.hpp"
#include "amodal/image.hpp"
#include "amodal/manifest.hpp"
#include "amodal/mask.hpp"
#include "amodal/occluder.hpp"
#include "amodal/overlay.hpp"

namespace amodal {

struct SourceSpec {
  std::filesystem::path path;
  /// Driving footage draws occluders from the driving bank.
  OccluderBank domain = OccluderBank::generic;
};

struct PipelineConfig {
  std::uint64_t root_seed = 0;
  Strategy strategy = Strategy::easy;
  std::vector<SourceSpec> sources;
  std::map<OccluderBank, std::filesystem::path> banks;
  CheckConfig check;
  StrategyConfig overlay = StrategyConfig::defaults(Strategy::easy);
  /// Keys the user set under [overlay]; re-applied when the strategy changes.
  nlohmann::json overlay_overrides = nlohmann::json::object();
  std::size_t shard_size = 1000;
  int worker_count = 1;
  std::filesystem::path output_dir = "out";
  /// Relative paths are resolved against this directory.
  std::filesystem::path base_dir = ".";

  void set_strategy(Strategy s);
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  /// Throws Error(config) on invalid values or missing directories.
  void validate() const;
  /// Everything that influences the output bytes; excludes worker_count and
  /// output_dir so manifests match across machines and worker counts.
  nlohmann::json effective_json() const;
};

/// TOML; see docs/pipeline.md for the keys. Throws Error(config).
PipelineConfig parse_pipeline_config(std::string_view toml_text, std::filesystem::path base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct Candidate {
  std::string clip_id;
  std::filesystem::path dir;
  OccluderBank bank = OccluderBank::generic;
  std::vector<std::filesystem::path> frames;
  std::vector<std::filesystem::path> masks;
  std::vector<std::filesystem::path> depths;  // empty when absent
};

struct IngestResult {
  std::vector<Candidate> candidates;
  std::vector<SkippedClip> skipped;
};

/// Scans `source`/<clip_id>/{frames,masks[,depth]}/*.png. Only PNG headers
/// are read. Clips with missing folders, count or name mismatches, or size
/// disagreement are skipped with a reason. Throws if `source` is unreadable.
IngestResult ingest(const std::filesystem::path& source, OccluderBank bank = OccluderBank::generic);

struct LoadedCandidate {
  VideoClip clip;
  std::vector<Mask> masks;
  std::optional<std::vector<DepthMap>> depths;
};

LoadedCandidate load_candidate(const Candidate& c);

/// Writes occluded/, gt/, gt_masks/, visible_masks/, occluder_masks/ and
/// manifest.json under `dir`, replacing previous contents.
void write_pair(const std::filesystem::path& dir, const SynthPair& pair);

/// Calls fn(i) for i in [0, n) on `workers` threads. The first exception
/// thrown by fn is rethrown after all workers stop.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

/// Ingest, check, synthesize and write <output_dir>/manifest.json atomically.
/// Per-clip problems become skipped entries; systemic ones throw.
DatasetManifest run_pipeline(const PipelineConfig& cfg);

struct StatsReport {
  std::size_t clip_count = 0;
  std::size_t synthesized_count = 0;
  std::size_t frame_count = 0;
  std::size_t skipped_count = 0;
  /// Ten equal bins over [0, 1]; the last bin includes 1.0.
  std::vector<std::size_t> rate_histogram = std::vector<std::size_t>(10, 0);
  std::map<std::string, std::size_t> strategy_counts;
  std::map<std::string, std::size_t> verdict_counts;
  std::map<std::string, std::size_t> reject_reason_counts;
  std::map<std::string, std::size_t> bank_usage;
  std::map<std::string, std::size_t> occluder_usage;
};

StatsReport stats(const DatasetManifest& manifest);
nlohmann::json to_json(const StatsReport& report);

/// One DatasetManifest per shard as shard-NNNNN.json; returns the paths.
std::vector<std::filesystem::path> write_shards(const DatasetManifest& manifest,
                                                const std::filesystem::path& dir);

}  // namespace amodal
