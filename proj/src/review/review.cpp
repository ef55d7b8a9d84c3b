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

#include "amodal/review.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <chrono>
#include <cstring>
#include <mutex>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "amodal/error.hpp"
#include "amodal/png_io.hpp"

namespace amodal {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(DecisionVerdict v) noexcept {
  return v == DecisionVerdict::accept ? "accept" : "reject";
}

std::string_view to_string(RejectReason r) noexcept {
  switch (r) {
    case RejectReason::occluded: return "occluded";
    case RejectReason::bad_mask: return "bad_mask";
    case RejectReason::other: return "other";
  }
  return "other";
}

DecisionVerdict decision_verdict_from_string(std::string_view s) {
  if (s == "accept") return DecisionVerdict::accept;
  if (s == "reject") return DecisionVerdict::reject;
  throw Error(ErrorCode::invalid_argument, "unknown decision verdict '" + std::string(s) + "'");
}

RejectReason reject_reason_from_string(std::string_view s) {
  if (s == "occluded") return RejectReason::occluded;
  if (s == "bad_mask") return RejectReason::bad_mask;
  if (s == "other") return RejectReason::other;
  throw Error(ErrorCode::invalid_argument, "unknown reject reason '" + std::string(s) + "'");
}

void to_json(json& j, const Decision& d) {
  j = json{{"candidate_id", d.candidate_id},
           {"verdict", to_string(d.verdict)},
           {"reason", d.reason ? json(to_string(*d.reason)) : json(nullptr)},
           {"note", d.note},
           {"reviewer", d.reviewer},
           {"timestamp", d.timestamp}};
}

void from_json(const json& j, Decision& d) {
  d.candidate_id = j.at("candidate_id").get<std::string>();
  d.verdict = decision_verdict_from_string(j.at("verdict").get<std::string>());
  d.reason.reset();
  if (j.contains("reason") && !j.at("reason").is_null()) {
    d.reason = reject_reason_from_string(j.at("reason").get<std::string>());
  }
  d.note = j.value("note", std::string());
  d.reviewer = j.at("reviewer").get<std::string>();
  d.timestamp = j.at("timestamp").get<std::int64_t>();
}

ReviewState::ReviewState(DatasetManifest manifest) : manifest_(std::move(manifest)) { manifest_.normalize(); }

bool ReviewState::reviewable(std::string_view clip_id) const {
  const ClipManifest* c = manifest_.find(clip_id);
  return c != nullptr && c->verdict != Verdict::auto_reject;
}

void ReviewState::apply(const Decision& d) {
  if (!reviewable(d.candidate_id)) {
    throw Error(ErrorCode::invalid_argument, "candidate '" + d.candidate_id + "' is not reviewable");
  }
  auto it = entries_.find(d.candidate_id);
  if (it == entries_.end()) it = entries_.emplace(d.candidate_id, Entry{}).first;
  it->second.latest = d;
  ++it->second.revision;
  ++decision_count_;
}

Verdict ReviewState::effective_verdict(const ClipManifest& clip) const {
  if (clip.verdict == Verdict::auto_reject) return clip.verdict;
  const auto it = entries_.find(clip.clip_id);
  if (it == entries_.end()) return clip.verdict;
  return it->second.latest.verdict == DecisionVerdict::accept ? Verdict::human_accept : Verdict::human_reject;
}

std::uint64_t ReviewState::revision(std::string_view clip_id) const {
  const auto it = entries_.find(clip_id);
  return it == entries_.end() ? 0 : it->second.revision;
}

const ReviewState::Entry* ReviewState::entry(std::string_view clip_id) const {
  const auto it = entries_.find(clip_id);
  return it == entries_.end() ? nullptr : &it->second;
}

DatasetManifest ReviewState::snapshot() const {
  DatasetManifest out = manifest_;
  for (auto& c : out.clips) c.verdict = effective_verdict(c);
  return out;
}

DatasetManifest ReviewState::export_manifest(Verdict verdict) const {
  DatasetManifest out = manifest_;
  out.clips.clear();
  out.skipped.clear();
  for (const auto& c : manifest_.clips) {
    if (effective_verdict(c) != verdict) continue;
    out.clips.push_back(c);
    out.clips.back().verdict = verdict;
  }
  out.normalize();
  return out;
}

ReviewState replay(DatasetManifest manifest, std::span<const Decision> decisions) {
  ReviewState state(std::move(manifest));
  for (const auto& d : decisions) {
    if (state.reviewable(d.candidate_id)) {
      state.apply(d);
    } else {
      spdlog::warn("decision for unknown candidate '{}' ignored", d.candidate_id);
    }
  }
  return state;
}

DecisionLog::Contents DecisionLog::read(const fs::path& path) {
  Contents out;
  if (!fs::exists(path)) return out;
  const auto bytes = read_file(path);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      out.torn_tail = true;
      break;
    }
    const std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty()) {
      try {
        out.decisions.push_back(json::parse(line).get<Decision>());
      } catch (const std::exception& e) {
        throw MalformedFileError(pos, path.string() + ": bad decision line: " + e.what());
      }
    }
    pos = nl + 1;
    out.valid_bytes = pos;
  }
  return out;
}

DecisionLog::DecisionLog(fs::path path) : path_(std::move(path)) {
  const Contents existing = read(path_);
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::io, "cannot open decision log " + path_.string() + ": " + std::strerror(errno));
  if (existing.torn_tail) {
    spdlog::warn("decision log {}: dropping torn final line", path_.string());
    if (::ftruncate(fd_, static_cast<off_t>(existing.valid_bytes)) != 0 || ::fsync(fd_) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::io, "cannot truncate decision log " + path_.string());
    }
  }
}

DecisionLog::~DecisionLog() {
  if (fd_ >= 0) ::close(fd_);
}

void DecisionLog::append(const Decision& d) {
  const std::string line = json(d).dump() + "\n";
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::io, "decision log write failed: " + std::string(std::strerror(errno)));
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd_) != 0) throw Error(ErrorCode::io, "decision log fsync failed: " + std::string(std::strerror(errno)));
}

Frame tint_mask(const Frame& frame, const Mask& mask) {
  if (frame.width() != mask.width() || frame.height() != mask.height()) {
    throw Error(ErrorCode::dimension_mismatch, "tint_mask: mask and frame sizes differ");
  }
  Frame out = frame;
  out.drop_alpha();
  constexpr Rgb tint{255, 0, 0};
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      if (!mask.get(x, y)) continue;
      const Rgb p = frame.at(x, y);
      out.set(x, y, Rgb{static_cast<std::uint8_t>((p.r + tint.r + 1) / 2),
                        static_cast<std::uint8_t>((p.g + tint.g + 1) / 2),
                        static_cast<std::uint8_t>((p.b + tint.b + 1) / 2)});
    }
  }
  return out;
}

namespace {

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump() + "\n"}; }

HttpResponse error_response(int status, std::string message) {
  return json_response(status, json{{"error", std::move(message)}});
}

std::optional<std::string> query_value(const Query& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> parse_index(std::string_view text) {
  std::size_t v = 0;
  if (text.empty()) return std::nullopt;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::int64_t system_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

ReviewService::ReviewService(DatasetManifest manifest, ServiceOptions options)
    : options_(std::move(options)),
      state_(replay(std::move(manifest), DecisionLog::read(options_.log_path).decisions)),
      log_(options_.log_path) {
  if (!options_.clock) options_.clock = system_clock_seconds;
  spdlog::info("review: {} clips, {} decisions replayed", state_.manifest().clips.size(), state_.decision_count());
}

ReviewState ReviewService::state() const {
  std::shared_lock lock(mutex_);
  return state_;
}

void ReviewService::write_snapshot() const {
  if (!options_.snapshot_path) return;
  std::string text;
  {
    std::shared_lock lock(mutex_);
    text = serialize_manifest(state_.snapshot());
  }
  write_file_atomic(*options_.snapshot_path,
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

HttpResponse ReviewService::list_candidates(const Query& query) const {
  const std::string status = query_value(query, "status").value_or("pending");
  std::optional<Verdict> want;
  if (status == "pending") {
    want = Verdict::pending;
  } else if (status == "accepted") {
    want = Verdict::human_accept;
  } else if (status == "rejected") {
    want = Verdict::human_reject;
  } else if (status != "all") {
    return error_response(400, "status must be one of pending, accepted, rejected, all");
  }
  std::size_t limit = 50;
  if (const auto l = query_value(query, "limit")) {
    const auto v = parse_index(*l);
    if (!v || *v < 1 || *v > 1000) return error_response(400, "limit must be an integer in [1, 1000]");
    limit = *v;
  }
  const std::string cursor = query_value(query, "cursor").value_or("");

  std::shared_lock lock(mutex_);
  json items = json::array();
  json next = nullptr;
  for (const auto& c : state_.manifest().clips) {
    if (!cursor.empty() && c.clip_id <= cursor) continue;
    const Verdict v = state_.effective_verdict(c);
    if (v == Verdict::auto_reject || (want && v != *want)) continue;
    if (items.size() == limit) {
      next = items.back()["clip_id"];
      break;
    }
    items.push_back(json{{"clip_id", c.clip_id},
                         {"frame_count", c.frame_count},
                         {"strategy", to_string(c.strategy)},
                         {"verdict", to_string(v)},
                         {"revision", state_.revision(c.clip_id)},
                         {"occluder_id", c.occluder_id},
                         {"occlusion_rates", c.occlusion_rates},
                         {"checks", c.checks},
                         {"thumbnail_url", "/api/candidates/" + c.clip_id + "/frames/0?overlay=mask"}});
  }
  return json_response(200, json{{"items", items}, {"next_cursor", next}});
}

std::optional<fs::path> ReviewService::frame_path(std::string_view clip_id, std::size_t index,
                                                  std::string_view kind) const {
  const fs::path dir = options_.clips_root / std::string(clip_id);
  const char* primary = kind == "frame" ? "gt" : "gt_masks";
  const char* fallback = kind == "frame" ? "frames" : "masks";
  for (const char* sub : {primary, fallback}) {
    const fs::path p = dir / sub / frame_filename(index);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

HttpResponse ReviewService::frame(std::string_view clip_id, std::string_view index, const Query& query) const {
  const std::string overlay = query_value(query, "overlay").value_or("none");
  if (overlay != "none" && overlay != "mask") return error_response(400, "overlay must be none or mask");
  {
    std::shared_lock lock(mutex_);
    if (!state_.reviewable(clip_id)) return error_response(404, "unknown candidate");
  }
  const auto n = parse_index(index);
  if (!n) return error_response(404, "unknown frame");
  const auto fpath = frame_path(clip_id, *n, "frame");
  if (!fpath) return error_response(404, "unknown frame");
  try {
    auto bytes = read_file(*fpath);
    if (overlay == "none") return {200, "image/png", std::string(bytes.begin(), bytes.end())};
    const auto mpath = frame_path(clip_id, *n, "mask");
    if (!mpath) return error_response(404, "mask not found");
    const Frame tinted = tint_mask(decode_frame_png(bytes), read_mask(*mpath));
    const auto png = encode_png(tinted);
    return {200, "image/png", std::string(png.begin(), png.end())};
  } catch (const Error& e) {
    spdlog::error("frame {}/{}: {}", clip_id, index, e.what());
    return error_response(500, e.what());
  }
}

HttpResponse ReviewService::decide(std::string_view clip_id, std::string_view body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_response(400, "body must be a JSON object");
  Decision d;
  d.candidate_id = std::string(clip_id);
  std::optional<std::uint64_t> expected;
  try {
    d.verdict = decision_verdict_from_string(req.at("verdict").get<std::string>());
    if (req.contains("reason") && !req["reason"].is_null()) {
      d.reason = reject_reason_from_string(req["reason"].get<std::string>());
    }
    d.note = req.value("note", std::string());
    d.reviewer = req.at("reviewer").get<std::string>();
    if (req.contains("expected_revision") && !req["expected_revision"].is_null()) {
      expected = req["expected_revision"].get<std::uint64_t>();
    }
  } catch (const std::exception& e) {
    return error_response(400, std::string("invalid decision: ") + e.what());
  }
  if (d.reviewer.empty()) return error_response(400, "reviewer must be non-empty");

  std::size_t count = 0;
  json result;
  {
    std::unique_lock lock(mutex_);
    if (!state_.reviewable(d.candidate_id)) return error_response(404, "unknown candidate");
    const std::uint64_t current = state_.revision(d.candidate_id);
    if (expected && *expected != current) {
      return json_response(409, json{{"error", "revision conflict"}, {"revision", current}});
    }
    d.timestamp = options_.clock();
    log_.append(d);
    state_.apply(d);
    count = state_.decision_count();
    result = json{{"candidate_id", d.candidate_id},
                  {"verdict", to_string(state_.effective_verdict(*state_.manifest().find(d.candidate_id)))},
                  {"revision", state_.revision(d.candidate_id)},
                  {"decision", d}};
  }
  if (options_.snapshot_path && options_.snapshot_every > 0 && count % options_.snapshot_every == 0) {
    try {
      write_snapshot();
    } catch (const Error& e) {
      spdlog::error("snapshot failed: {}", e.what());
    }
  }
  return json_response(200, result);
}

HttpResponse ReviewService::export_manifest(const Query& query) const {
  const std::string verdict = query_value(query, "verdict").value_or("accepted");
  Verdict v{};
  if (verdict == "accepted") {
    v = Verdict::human_accept;
  } else if (verdict == "rejected") {
    v = Verdict::human_reject;
  } else {
    return error_response(400, "verdict must be accepted or rejected");
  }
  std::shared_lock lock(mutex_);
  return {200, "application/json", serialize_manifest(state_.export_manifest(v))};
}

void register_routes(httplib::Server& server, ReviewService& service) {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto query_of = [](const httplib::Request& req) { return Query(req.params.begin(), req.params.end()); };

  server.Get("/api/candidates", [&service, send, query_of](const httplib::Request& req, httplib::Response& res) {
    send(res, service.list_candidates(query_of(req)));
  });
  server.Get(R"(/api/candidates/([^/]+)/frames/([^/]+))",
             [&service, send, query_of](const httplib::Request& req, httplib::Response& res) {
               send(res, service.frame(req.matches[1].str(), req.matches[2].str(), query_of(req)));
             });
  server.Post(R"(/api/candidates/([^/]+)/decision)", [&service, send](const httplib::Request& req, httplib::Response& res) {
    send(res, service.decide(req.matches[1].str(), req.body));
  });
  server.Get("/api/export", [&service, send, query_of](const httplib::Request& req, httplib::Response& res) {
    send(res, service.export_manifest(query_of(req)));
  });
  if (service.options().ui_dir && !server.set_mount_point("/", service.options().ui_dir->string())) {
    throw Error(ErrorCode::config, "cannot mount UI directory " + service.options().ui_dir->string());
  }
}

}  // namespace amodal
