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

#include "amodal/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>
#include <toml.hpp>

#include "amodal/error.hpp"
#include "amodal/png_io.hpp"
#include "amodal/rng.hpp"

namespace amodal {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::set_strategy(Strategy s) {
  strategy = s;
  overlay = StrategyConfig::defaults(s);
  json j = overlay_overrides;
  j.erase("strategy");
  from_json(j, overlay);
}

fs::path PipelineConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

void PipelineConfig::validate() const {
  if (shard_size < 1) throw Error(ErrorCode::config, "shard_size must be >= 1");
  if (worker_count < 1) throw Error(ErrorCode::config, "worker_count must be >= 1");
  if (overlay.strategy != strategy) throw Error(ErrorCode::config, "overlay strategy differs from pipeline strategy");
  check.validate();
  overlay.validate();
  for (const auto& s : sources) {
    if (!fs::is_directory(resolve(s.path))) {
      throw Error(ErrorCode::config, "source directory does not exist: " + resolve(s.path).string());
    }
    if (!banks.contains(s.domain)) {
      throw Error(ErrorCode::config, "no '" + std::string(to_string(s.domain)) + "' occluder bank configured for source " + s.path.string());
    }
  }
  for (const auto& [bank, path] : banks) {
    if (!fs::is_directory(resolve(path))) {
      throw Error(ErrorCode::config, "occluder bank directory does not exist: " + resolve(path).string());
    }
  }
}

json PipelineConfig::effective_json() const {
  json srcs = json::array();
  for (const auto& s : sources) srcs.push_back(json{{"path", s.path.generic_string()}, {"domain", to_string(s.domain)}});
  json bank_json = json::object();
  for (const auto& [bank, path] : banks) bank_json[std::string(to_string(bank))] = path.generic_string();
  return json{{"root_seed", root_seed}, {"strategy", to_string(strategy)}, {"sources", srcs},
              {"banks", bank_json},     {"check", check},                  {"overlay", overlay},
              {"shard_size", shard_size}};
}

namespace {

std::uint64_t parse_seed(const toml::node& node) {
  if (auto v = node.value<std::int64_t>()) {
    if (*v < 0) throw Error(ErrorCode::config, "root_seed must be non-negative");
    return static_cast<std::uint64_t>(*v);
  }
  if (auto s = node.value<std::string>()) {
    std::string_view text = *s;
    int base = 10;
    if (text.starts_with("0x") || text.starts_with("0X")) {
      text.remove_prefix(2);
      base = 16;
    }
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed, base);
    if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return seed;
  }
  throw Error(ErrorCode::config, "root_seed must be an integer or a decimal/hex string");
}

/// Converts a flat TOML table of scalars to JSON for the from_json helpers.
json scalars_to_json(const toml::table& t, std::string_view section) {
  json j = json::object();
  for (const auto& [key, node] : t) {
    const std::string k(key.str());
    if (auto i = node.value_exact<std::int64_t>()) {
      j[k] = *i;
    } else if (auto d = node.value_exact<double>()) {
      j[k] = *d;
    } else if (auto b = node.value_exact<bool>()) {
      j[k] = *b;
    } else if (auto s = node.value_exact<std::string>()) {
      j[k] = *s;
    } else {
      throw Error(ErrorCode::config, "[" + std::string(section) + "] " + k + ": expected a scalar");
    }
  }
  return j;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, std::string_view section) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::config, "[" + std::string(section) + "] unknown key '" + key + "'");
    }
  }
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view toml_text, fs::path base_dir) {
  toml::table doc;
  try {
    doc = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ", column "
        << e.source().begin.column << ": " << e.description();
    throw Error(ErrorCode::config, msg.str());
  }
  PipelineConfig cfg;
  cfg.base_dir = std::move(base_dir);
  try {
    if (const auto* n = doc.get("root_seed")) cfg.root_seed = parse_seed(*n);
    if (auto v = doc["shard_size"].value<std::int64_t>()) {
      if (*v < 1) throw Error(ErrorCode::config, "shard_size must be >= 1");
      cfg.shard_size = static_cast<std::size_t>(*v);
    }
    if (auto v = doc["worker_count"].value<std::int64_t>()) cfg.worker_count = static_cast<int>(*v);
    if (auto v = doc["output_dir"].value<std::string>()) cfg.output_dir = *v;
    if (const auto* arr = doc["sources"].as_array()) {
      for (const auto& elem : *arr) {
        const auto* t = elem.as_table();
        if (t == nullptr) throw Error(ErrorCode::config, "[[sources]] entries must be tables");
        SourceSpec s;
        const auto path = (*t)["path"].value<std::string>();
        if (!path) throw Error(ErrorCode::config, "[[sources]] entry without path");
        s.path = *path;
        s.domain = occluder_bank_from_string((*t)["domain"].value_or(std::string("generic")));
        cfg.sources.push_back(std::move(s));
      }
    }
    if (const auto* t = doc["banks"].as_table()) {
      for (const auto& [key, node] : *t) {
        const auto path = node.value<std::string>();
        if (!path) throw Error(ErrorCode::config, "[banks] values must be paths");
        cfg.banks[occluder_bank_from_string(key.str())] = *path;
      }
    }
    if (const auto* t = doc["check"].as_table()) {
      const json j = scalars_to_json(*t, "check");
      reject_unknown(j, {"boundary_margin", "min_area_fraction", "max_hole_count", "max_hole_area_fraction",
                         "depth_band", "depth_closer_fraction_threshold"}, "check");
      from_json(j, cfg.check);
    }
    if (const auto* t = doc["overlay"].as_table()) {
      cfg.overlay_overrides = scalars_to_json(*t, "overlay");
      reject_unknown(cfg.overlay_overrides, {"rate_lo", "rate_hi", "feather_radius", "placement_budget", "scale_lo", "scale_hi"}, "overlay");
    }
    cfg.set_strategy(strategy_from_string(doc["strategy"].value_or(std::string("easy"))));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    throw Error(ErrorCode::config, e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  return parse_pipeline_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                               path.has_parent_path() ? path.parent_path() : fs::path("."));
}

IngestResult ingest(const fs::path& source, OccluderBank bank) {
  std::error_code ec;
  fs::directory_iterator it(source, ec);
  if (ec) throw Error(ErrorCode::io, "cannot read source directory " + source.string() + ": " + ec.message());
  std::vector<fs::path> dirs;
  for (const auto& entry : it) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());

  IngestResult out;
  for (const auto& dir : dirs) {
    const std::string id = dir.filename().string();
    auto skip = [&](std::string reason) {
      spdlog::warn("skipping clip {}: {}", id, reason);
      out.skipped.push_back({id, std::move(reason)});
    };
    try {
      if (!fs::is_directory(dir / "frames") || !fs::is_directory(dir / "masks")) {
        skip("missing frames/ or masks/ directory");
        continue;
      }
      Candidate c{id, dir, bank, list_pngs(dir / "frames"), list_pngs(dir / "masks"), {}};
      if (fs::is_directory(dir / "depth")) c.depths = list_pngs(dir / "depth");
      if (c.frames.empty()) {
        skip("no frames");
        continue;
      }
      if (c.masks.size() != c.frames.size()) {
        skip("mask count " + std::to_string(c.masks.size()) + " differs from frame count " +
             std::to_string(c.frames.size()));
        continue;
      }
      if (!c.depths.empty() && c.depths.size() != c.frames.size()) {
        skip("depth count differs from frame count");
        continue;
      }
      std::string problem;
      PngInfo first{};
      for (std::size_t i = 0; i < c.frames.size() && problem.empty(); ++i) {
        if (c.frames[i].filename() != c.masks[i].filename()) {
          problem = "frame/mask name mismatch at " + c.frames[i].filename().string();
          break;
        }
        const PngInfo fi = read_png_info(c.frames[i]);
        const PngInfo mi = read_png_info(c.masks[i]);
        if (i == 0) first = fi;
        if (fi.width != first.width || fi.height != first.height) {
          problem = "frame size changes at " + c.frames[i].filename().string();
        } else if (mi.width != fi.width || mi.height != fi.height) {
          problem = "mask/frame dimension mismatch at " + c.masks[i].filename().string();
        } else if (!c.depths.empty()) {
          const PngInfo di = read_png_info(c.depths[i]);
          if (di.width != fi.width || di.height != fi.height) {
            problem = "depth/frame dimension mismatch at " + c.depths[i].filename().string();
          }
        }
      }
      if (!problem.empty()) {
        skip(std::move(problem));
        continue;
      }
      out.candidates.push_back(std::move(c));
    } catch (const Error& e) {
      skip(e.what());
    }
  }
  return out;
}

LoadedCandidate load_candidate(const Candidate& c) {
  LoadedCandidate out;
  for (const auto& p : c.frames) {
    Frame f = read_frame(p);
    f.drop_alpha();
    out.clip.frames.push_back(std::move(f));
  }
  for (const auto& p : c.masks) out.masks.push_back(read_mask(p));
  if (!c.depths.empty()) {
    out.depths.emplace();
    for (const auto& p : c.depths) out.depths->push_back(read_depth(p));
  }
  out.clip.validate();
  return out;
}

void write_pair(const fs::path& dir, const SynthPair& pair) {
  fs::remove_all(dir);
  for (const char* sub : {"occluded", "gt", "gt_masks", "visible_masks", "occluder_masks"}) {
    fs::create_directories(dir / sub);
  }
  for (std::size_t i = 0; i < pair.occluded.size(); ++i) {
    const std::string name = frame_filename(i);
    write_png(dir / "occluded" / name, pair.occluded.frames[i]);
    write_png(dir / "gt" / name, pair.gt.frames[i]);
    write_png(dir / "gt_masks" / name, pair.gt_masks[i]);
    write_png(dir / "visible_masks" / name, pair.visible_masks[i]);
    write_png(dir / "occluder_masks" / name, pair.occluder_masks[i]);
  }
  const std::string text = serialize_clip_manifest(pair.manifest);
  write_file(dir / "manifest.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = n;
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, workers));
  if (count == 1 || n <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(body);
  }
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct ClipOutcome {
  std::optional<ClipManifest> manifest;
  std::optional<SkippedClip> skipped;
};

ClipOutcome process_candidate(const Candidate& c, const PipelineConfig& cfg,
                              const std::map<OccluderBank, std::vector<OccluderAsset>>& banks,
                              const fs::path& clips_dir) {
  ClipOutcome out;
  const std::uint64_t seed = derive_clip_seed(cfg.root_seed, c.clip_id);
  LoadedCandidate loaded;
  try {
    loaded = load_candidate(c);
  } catch (const Error& e) {
    out.skipped = SkippedClip{c.clip_id, std::string("load failed: ") + e.what()};
    return out;
  }
  std::optional<std::span<const DepthMap>> depths;
  if (loaded.depths) depths = std::span<const DepthMap>(*loaded.depths);
  const auto report = run_amodal_check(loaded.masks, depths, cfg.check);

  if (report.verdict == Verdict::auto_reject) {
    ClipManifest m;
    m.clip_id = c.clip_id;
    m.strategy = cfg.strategy;
    m.feather_radius = cfg.overlay.feather_radius;
    m.rng_seed = seed;
    m.verdict = Verdict::auto_reject;
    m.reject_reasons = report.reject_reasons;
    m.frame_count = static_cast<int>(loaded.clip.size());
    m.checks = report.summary();
    out.manifest = std::move(m);
    return out;
  }

  SplitMix64 rng(seed);
  const auto& bank = banks.at(c.bank);
  const OccluderAsset& occluder = bank[rng.below(bank.size())];
  auto result = synthesize_pair(c.clip_id, loaded.clip, loaded.masks, occluder, cfg.overlay, seed, rng);
  if (auto* failure = std::get_if<SynthFailure>(&result)) {
    spdlog::warn("skipping clip {}: {}", c.clip_id, failure->reason);
    out.skipped = SkippedClip{c.clip_id, failure->reason};
    return out;
  }
  auto& pair = std::get<SynthPair>(result);
  pair.manifest.checks = report.summary();
  write_pair(clips_dir / c.clip_id, pair);
  out.manifest = std::move(pair.manifest);
  return out;
}

}  // namespace

DatasetManifest run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  DatasetManifest manifest;
  manifest.difficulty = cfg.strategy;
  manifest.shard_size = cfg.shard_size;
  manifest.config = cfg.effective_json();
  manifest.config["check"] = cfg.check;

  std::vector<Candidate> candidates;
  std::set<std::string> seen;
  for (const auto& source : cfg.sources) {
    auto result = ingest(cfg.resolve(source.path), source.domain);
    for (auto& s : result.skipped) manifest.skipped.push_back(std::move(s));
    for (auto& c : result.candidates) {
      if (!seen.insert(c.clip_id).second) {
        manifest.skipped.push_back({c.clip_id, "duplicate clip id in " + source.path.generic_string()});
        continue;
      }
      candidates.push_back(std::move(c));
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.clip_id < b.clip_id; });

  std::map<OccluderBank, std::vector<OccluderAsset>> banks;
  for (const auto& c : candidates) {
    if (banks.contains(c.bank)) continue;
    auto assets = load_occluder_bank(cfg.resolve(cfg.banks.at(c.bank)), c.bank);
    if (assets.empty()) {
      throw Error(ErrorCode::io, "occluder bank '" + std::string(to_string(c.bank)) + "' is empty");
    }
    banks.emplace(c.bank, std::move(assets));
  }

  const fs::path out_dir = cfg.resolve(cfg.output_dir);
  const fs::path clips_dir = out_dir / "clips";
  fs::create_directories(clips_dir);

  std::vector<ClipOutcome> outcomes(candidates.size());
  parallel_for(candidates.size(), cfg.worker_count, [&](std::size_t i) {
    outcomes[i] = process_candidate(candidates[i], cfg, banks, clips_dir);
    spdlog::debug("processed {}", candidates[i].clip_id);
  });
  for (auto& o : outcomes) {
    if (o.manifest) manifest.clips.push_back(std::move(*o.manifest));
    if (o.skipped) manifest.skipped.push_back(std::move(*o.skipped));
  }
  manifest.normalize();
  manifest.validate();
  const std::string text = serialize_manifest(manifest);
  write_file_atomic(out_dir / "manifest.json",
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  spdlog::info("pipeline: {} clips in manifest, {} skipped", manifest.clips.size(), manifest.skipped.size());
  return manifest;
}

StatsReport stats(const DatasetManifest& manifest) {
  StatsReport r;
  r.clip_count = manifest.clips.size();
  r.skipped_count = manifest.skipped.size();
  for (const auto& c : manifest.clips) {
    ++r.strategy_counts[std::string(to_string(c.strategy))];
    ++r.verdict_counts[std::string(to_string(c.verdict))];
    for (const auto rule : c.reject_reasons) ++r.reject_reason_counts[std::string(to_string(rule))];
    if (c.occluder_id.empty()) continue;
    ++r.synthesized_count;
    ++r.occluder_usage[c.occluder_id];
    const auto slash = c.occluder_id.find('/');
    ++r.bank_usage[slash == std::string::npos ? std::string("unknown") : c.occluder_id.substr(0, slash)];
    for (const double rate : c.occlusion_rates) {
      ++r.frame_count;
      ++r.rate_histogram[std::min<std::size_t>(9, static_cast<std::size_t>(rate * 10.0))];
    }
  }
  return r;
}

json to_json(const StatsReport& r) {
  json bins = json::array();
  for (std::size_t i = 0; i < r.rate_histogram.size(); ++i) {
    bins.push_back(json{{"lo", static_cast<double>(i) / 10.0}, {"hi", static_cast<double>(i + 1) / 10.0},
                        {"count", r.rate_histogram[i]}});
  }
  return json{{"clip_count", r.clip_count},
              {"synthesized_count", r.synthesized_count},
              {"frame_count", r.frame_count},
              {"skipped_count", r.skipped_count},
              {"rate_histogram", bins},
              {"strategy_counts", r.strategy_counts},
              {"verdict_counts", r.verdict_counts},
              {"reject_reason_counts", r.reject_reason_counts},
              {"bank_usage", r.bank_usage},
              {"occluder_usage", r.occluder_usage}};
}

std::vector<fs::path> write_shards(const DatasetManifest& manifest, const fs::path& dir) {
  DatasetManifest sorted = manifest;
  sorted.normalize();
  fs::create_directories(dir);
  std::vector<fs::path> out;
  std::size_t cursor = 0;
  for (const auto& shard : sorted.shards) {
    DatasetManifest part;
    part.version = sorted.version;
    part.difficulty = sorted.difficulty;
    part.shard_size = sorted.shard_size;
    part.config = sorted.config;
    part.clips.assign(sorted.clips.begin() + static_cast<std::ptrdiff_t>(cursor),
                      sorted.clips.begin() + static_cast<std::ptrdiff_t>(cursor + shard.count));
    part.shards = {ShardRange{shard.shard_id, shard.first_clip_id, shard.last_clip_id, shard.count}};
    part.shards.front().shard_id = 0;
    cursor += shard.count;
    char name[32];
    std::snprintf(name, sizeof(name), "shard-%05d.json", shard.shard_id);
    const std::string text = serialize_manifest(part);
    write_file_atomic(dir / name, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    out.push_back(dir / name);
  }
  return out;
}

}  // namespace amodal
