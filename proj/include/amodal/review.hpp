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
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "amodal/image.hpp"
#include "amodal/manifest.hpp"
#include "amodal/mask.hpp"

namespace httplib {
class Server;
}

namespace amodal {

enum class DecisionVerdict { accept, reject };
enum class RejectReason { occluded, bad_mask, other };

std::string_view to_string(DecisionVerdict v) noexcept;
std::string_view to_string(RejectReason r) noexcept;
DecisionVerdict decision_verdict_from_string(std::string_view s);
RejectReason reject_reason_from_string(std::string_view s);

/// One human review decision. `timestamp` is UTC seconds.
struct Decision {
  std::string candidate_id;
  DecisionVerdict verdict = DecisionVerdict::accept;
  std::optional<RejectReason> reason;
  std::string note;
  std::string reviewer;
  std::int64_t timestamp = 0;
  friend bool operator==(const Decision&, const Decision&) = default;
};

void to_json(nlohmann::json& j, const Decision& d);
void from_json(const nlohmann::json& j, Decision& d);

/// Review verdicts folded over a decision sequence; the latest decision per
/// candidate wins.
class ReviewState {
 public:
  struct Entry {
    Decision latest;
    std::uint64_t revision = 0;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  ReviewState() = default;
  explicit ReviewState(DatasetManifest manifest);

  /// Present in the manifest and not auto-rejected.
  bool reviewable(std::string_view clip_id) const;
  /// Throws Error(invalid_argument) for candidates that are not reviewable.
  void apply(const Decision& d);

  Verdict effective_verdict(const ClipManifest& clip) const;
  /// Number of decisions recorded for the candidate; 0 when undecided.
  std::uint64_t revision(std::string_view clip_id) const;
  const Entry* entry(std::string_view clip_id) const;
  std::size_t decision_count() const noexcept { return decision_count_; }
  const DatasetManifest& manifest() const noexcept { return manifest_; }
  const std::map<std::string, Entry, std::less<>>& entries() const noexcept { return entries_; }

  /// Clips whose effective verdict is `verdict`, resharded, skipped list dropped.
  DatasetManifest export_manifest(Verdict verdict) const;
  /// Every clip with its effective verdict.
  DatasetManifest snapshot() const;

  friend bool operator==(const ReviewState& a, const ReviewState& b) {
    return a.entries_ == b.entries_ && a.decision_count_ == b.decision_count_ && a.manifest_ == b.manifest_;
  }

 private:
  DatasetManifest manifest_;
  std::map<std::string, Entry, std::less<>> entries_;
  std::size_t decision_count_ = 0;
};

ReviewState replay(DatasetManifest manifest, std::span<const Decision> decisions);

/// Append-only newline-delimited JSON decision log. Every append is fsynced.
class DecisionLog {
 public:
  struct Contents {
    std::vector<Decision> decisions;
    /// Length of the prefix made of complete lines.
    std::size_t valid_bytes = 0;
    /// A final line without its newline was present and ignored.
    bool torn_tail = false;
  };

  /// Missing file reads as empty. A complete line that is not a decision
  /// throws MalformedFileError.
  static Contents read(const std::filesystem::path& path);

  /// Opens for append, truncating a torn tail left by a crash.
  explicit DecisionLog(std::filesystem::path path);
  ~DecisionLog();
  DecisionLog(const DecisionLog&) = delete;
  DecisionLog& operator=(const DecisionLog&) = delete;

  void append(const Decision& d);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

/// Tints set pixels of `mask` halfway toward red: out = (p + t + 1) / 2.
Frame tint_mask(const Frame& frame, const Mask& mask);

struct ServiceOptions {
  std::filesystem::path log_path;
  /// Directory holding <clip_id>/gt (or frames) and <clip_id>/gt_masks (or masks).
  std::filesystem::path clips_root;
  std::optional<std::filesystem::path> ui_dir;
  std::optional<std::filesystem::path> snapshot_path;
  std::size_t snapshot_every = 50;
  std::function<std::int64_t()> clock;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using Query = std::multimap<std::string, std::string>;

/// Request handling independent of the HTTP transport.
class ReviewService {
 public:
  /// Replays the existing log before accepting new decisions.
  ReviewService(DatasetManifest manifest, ServiceOptions options);

  HttpResponse list_candidates(const Query& query) const;
  HttpResponse frame(std::string_view clip_id, std::string_view index, const Query& query) const;
  HttpResponse decide(std::string_view clip_id, std::string_view body);
  HttpResponse export_manifest(const Query& query) const;

  ReviewState state() const;
  void write_snapshot() const;
  const ServiceOptions& options() const noexcept { return options_; }

 private:
  std::optional<std::filesystem::path> frame_path(std::string_view clip_id, std::size_t index,
                                                  std::string_view kind) const;

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  ReviewState state_;
  DecisionLog log_;
};

/// Registers the /api routes and the optional static UI mount.
void register_routes(httplib::Server& server, ReviewService& service);

}  // namespace amodal
