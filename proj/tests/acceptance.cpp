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

// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <variant>

#include "amodal/amodal_check.hpp"
#include "amodal/metrics.hpp"
#include "amodal/overlay.hpp"
#include "amodal/pipeline.hpp"
#include "amodal/procedural.hpp"
#include "amodal/review.hpp"
#include "amodal/stitcher.hpp"
#include "support.hpp"

using namespace amodal;
using namespace amodal::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

/// Collects the first few failure messages of a criterion.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ << (failures_ > 1 ? "; " : "") << what;
  }
  Outcome done(const std::string& summary) const {
    std::ostringstream s;
    s << summary << " (" << checks_ << " checks";
    if (failures_) s << ", " << failures_ << " failed: " << notes_.str();
    s << ")";
    return {failures_ == 0, s.str()};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::ostringstream notes_;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

/// Occluded pixel count over object pixel count, from the emitted masks, as
/// an exact fraction compared against [lo, hi].
bool rate_in(const Mask& gt, const Mask& occ, double lo, double hi) {
  const auto g = gt.to_bytes();
  const auto o = occ.to_bytes();
  std::size_t num = 0, den = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    den += g[i] != 0;
    num += g[i] != 0 && o[i] != 0;
  }
  return den > 0 && static_cast<long double>(num) >= lo * static_cast<long double>(den) &&
         static_cast<long double>(num) <= hi * static_cast<long double>(den);
}

Outcome occlusion_rates() {
  const auto t0 = Clock::now();
  Tally t;
  const auto bank = make_procedural_bank(16, 77);
  int failures = 0;
  for (const Strategy s : {Strategy::easy, Strategy::hard}) {
    const auto cfg = StrategyConfig::defaults(s);
    int made = 0;
    for (std::uint64_t seed = 1; made < 50 && seed < 200; ++seed) {
      const auto src = make_shape_clip(seed * 31 + static_cast<std::uint64_t>(s));
      SplitMix64 rng(seed);
      const auto r = synthesize_pair("c", src.clip, src.masks, bank[rng.below(bank.size())], cfg, seed, rng);
      if (!std::holds_alternative<SynthPair>(r)) {
        ++failures;
        continue;
      }
      ++made;
      const auto& p = std::get<SynthPair>(r);
      t.expect(p.gt_masks.size() == 14 && p.gt.width() == 384 && p.gt.height() == 384, "pair shape");
      if (s == Strategy::easy) {
        t.expect(rate_in(p.gt_masks.front(), p.occluder_masks.front(), 0.3, 0.7), "easy first rate");
        t.expect(rate_in(p.gt_masks.back(), p.occluder_masks.back(), 0.3, 0.7), "easy last rate");
      } else {
        t.expect(rate_in(p.gt_masks.front(), p.occluder_masks.front(), 0.4, 0.8), "hard first rate");
      }
      // Visible mask is the object minus the footprint.
      const auto g = p.gt_masks.front().to_bytes();
      const auto o = p.occluder_masks.front().to_bytes();
      const auto v = p.visible_masks.front().to_bytes();
      bool same = true;
      for (std::size_t i = 0; i < g.size(); ++i) same = same && (v[i] != 0) == (g[i] != 0 && o[i] == 0);
      t.expect(same, "visible mask");
    }
    t.expect(made == 50, std::string(to_string(s)) + ": only " + std::to_string(made) + " pairs");
  }
  const double secs = seconds_since(t0);
  t.expect(secs < 60.0, "runtime " + std::to_string(secs) + " s");
  char buf[96];
  std::snprintf(buf, sizeof buf, "50 easy + 50 hard pairs in %.1f s, %d placement retries", secs, failures);
  return t.done(buf);
}

Outcome track_laws() {
  Tally t;
  SplitMix64 rng(11);
  for (int c = 0; c < 1000; ++c) {
    const Point2 a{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const Point2 b{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const double sa = rng.uniform(0.01, 5), sb = rng.uniform(0.01, 5);
    const int n = 2 + static_cast<int>(rng.below(60));
    const auto tr = interpolate_track_easy(a, sa, b, sb, n);
    t.expect(tr.positions.front() == a && tr.positions.back() == b && tr.scales.front() == sa && tr.scales.back() == sb,
             "easy endpoints");
    for (int i = 1; i + 1 < n; ++i) {
      const auto& p = tr.positions;
      const double d = std::max({std::abs(p[i + 1].x - 2 * p[i].x + p[i - 1].x), std::abs(p[i + 1].y - 2 * p[i].y + p[i - 1].y),
                                 std::abs(tr.scales[i + 1] - 2 * tr.scales[i] + tr.scales[i - 1])});
      t.expect(d <= 1e-9, "easy second difference");
    }
  }
  for (int c = 0; c < 1000; ++c) {
    const int n = 1 + static_cast<int>(rng.below(30));
    std::vector<BBox> boxes;
    for (int i = 0; i < n; ++i) {
      const int x = static_cast<int>(rng.below(300)), y = static_cast<int>(rng.below(300));
      boxes.push_back({x, y, x + 1 + static_cast<int>(rng.below(200)), y + 1 + static_cast<int>(rng.below(200))});
    }
    const double s = rng.uniform(0.05, 4);
    const auto tr = track_hard({rng.uniform(0, 384), rng.uniform(0, 384)}, s, boxes);
    for (int i = 0; i < n; ++i) {
      const double want = std::max(static_cast<double>(boxes[i].height()) / boxes[0].height(),
                                   static_cast<double>(boxes[i].width()) / boxes[0].width());
      const double got = std::pow(tr.scales[i], 3.0) / std::pow(s, 3.0);
      t.expect(std::abs(got - want) <= 1e-9 * want, "hard cube law");
    }
  }
  return t.done("1000 easy + 1000 hard tracks");
}

Outcome blend_properties() {
  Tally t;
  SplitMix64 rng(12);
  // 10,000 pixels as a 100x100 frame, several mask patterns.
  const Frame v = random_frame(rng, 100, 100);
  const Frame o = random_frame(rng, 100, 100);
  t.expect(blend(v, o, Mask(100, 100, true)) == o, "full mask gives o");
  t.expect(blend(v, o, Mask(100, 100)) == v, "empty mask gives v");
  for (int rep = 0; rep < 5; ++rep) {
    const auto mb = random_bytes(rng, 100 * 100, rng.uniform01());
    const Mask m = mask_of(mb, 100, 100);
    const Frame b = blend(v, o, m);
    t.expect(blend(b, o, m) == b, "idempotent");
    for (int y = 0; y < 100; ++y) {
      for (int x = 0; x < 100; ++x) {
        const Rgb want = mb[static_cast<std::size_t>(y) * 100 + static_cast<std::size_t>(x)] ? o.at(x, y) : v.at(x, y);
        t.expect(b.at(x, y) == want, "per-pixel oracle");
      }
    }
  }
  return t.done("10000 pixels x 5 masks");
}

Outcome window_planning() {
  Tally t;
  const StitchConfig cfg{14, 5};
  auto spans = [&](std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& w : plan_windows(n, cfg)) out.emplace_back(w.start, w.end);
    return out;
  };
  using V = std::vector<std::pair<std::size_t, std::size_t>>;
  for (std::size_t n = 1; n <= 14; ++n) t.expect(spans(n) == V{{0, n}}, "N=" + std::to_string(n));
  t.expect(spans(23) == V{{0, 14}, {9, 23}}, "N=23");
  t.expect(spans(30) == V{{0, 14}, {9, 23}, {16, 30}}, "N=30");
  t.expect(spans(100) == V{{0, 14}, {9, 23}, {18, 32}, {27, 41}, {36, 50}, {45, 59}, {54, 68}, {63, 77}, {72, 86},
                           {81, 95}, {86, 100}},
           "N=100");
  SplitMix64 rng(13);
  for (int c = 0; c < 1000; ++c) {
    const int k = 2 + static_cast<int>(rng.below(40));
    const int m = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k - 1)));
    const std::size_t n = 1 + rng.below(400);
    std::vector<Window> w;
    for (const auto& s : plan_windows(n, {k, m})) w.push_back({s.start, s.end});
    const auto err = check_window_plan(w, n, static_cast<std::size_t>(k), static_cast<std::size_t>(m));
    t.expect(err.empty(), "N=" + std::to_string(n) + " k=" + std::to_string(k) + " m=" + std::to_string(m) + ": " + err);
  }
  return t.done("enumerated N plus 1000 random triples");
}

Outcome stitcher_oracle() {
  Tally t;
  const auto bank = make_procedural_bank(8, 14);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto src = make_shape_clip(seed, {128, 128, 30});
    SplitMix64 rng(seed);
    const auto r = synthesize_pair("s", src.clip, src.masks, bank[rng.below(bank.size())],
                                   StrategyConfig::defaults(Strategy::hard), seed, rng);
    if (!std::holds_alternative<SynthPair>(r)) {
      t.expect(false, "placement failed for clip " + std::to_string(seed));
      continue;
    }
    const auto& p = std::get<SynthPair>(r);
    // The oracle completer isolates the object from the held-out source clip.
    auto oracle = [&](const VideoClip&, std::span<const Mask>, const WindowSpan& span) {
      VideoClip out;
      for (std::size_t i = span.start; i < span.end; ++i) out.frames.push_back(isolate_on_white(src.clip.frames[i], src.masks[i]));
      return out;
    };
    const VideoClip got = stitch(p.occluded, p.visible_masks, oracle, {});
    t.expect(got.size() == 30, "length");
    for (std::size_t i = 0; i < got.size(); ++i) {
      t.expect(got.frames[i] == isolate_on_white(src.clip.frames[i], src.masks[i]), "frame " + std::to_string(i));
    }
  }
  return t.done("10 clips x 30 frames");
}

Outcome metric_oracles() {
  Tally t;
  SplitMix64 rng(15);
  const BBox all{0, 0, 64, 64};
  double worst_psnr = 0, worst_ssim = 0;
  for (int c = 0; c < 100; ++c) {
    const Frame a = random_frame(rng, 64, 64);
    Frame b = a;
    const int amp = 1 + static_cast<int>(rng.below(128));
    for (auto& v : b.pixels()) v = static_cast<std::uint8_t>(std::clamp<int>(v + static_cast<int>(rng.below(2 * amp + 1)) - amp, 0, 255));
    worst_psnr = std::max(worst_psnr, std::abs(psnr(a, b, all) - oracle_psnr(a, b, all)));
    worst_ssim = std::max(worst_ssim, std::abs(ssim(a, b, all) - oracle_ssim(a, b, all)));
    const auto x = random_bytes(rng, 64 * 64, rng.uniform01());
    const auto y = random_bytes(rng, 64 * 64, rng.uniform01());
    t.expect(iou(mask_of(x, 64, 64), mask_of(y, 64, 64)) == oracle_iou(x, y), "iou");
  }
  t.expect(worst_psnr <= 1e-9, "psnr error " + std::to_string(worst_psnr));
  t.expect(worst_ssim <= 1e-6, "ssim error " + std::to_string(worst_ssim));
  const Frame f = random_frame(rng, 64, 64);
  const Mask m = mask_of(random_bytes(rng, 64 * 64), 64, 64);
  t.expect(psnr(f, f, all) == 99.0, "identical psnr");
  t.expect(ssim(f, f, all) == 1.0, "identical ssim");
  t.expect(iou(m, m) == 1.0, "identical iou");
  t.expect(psnr(Frame(64, 64, kBlack), Frame(64, 64, kWhite), all) == 0.0, "0 vs 255 psnr");
  char buf[96];
  std::snprintf(buf, sizeof buf, "100 pairs, max |dPSNR| %.2e dB, max |dSSIM| %.2e", worst_psnr, worst_ssim);
  return t.done(buf);
}

Outcome check_oracles() {
  Tally t;
  SplitMix64 rng(16);
  CheckConfig cfg;
  for (int c = 0; c < 200; ++c) {
    const int w = 20 + static_cast<int>(rng.below(60));
    const int h = 20 + static_cast<int>(rng.below(60));
    const auto b = random_blob_bytes(rng, w, h, rng.uniform(0, 0.3));
    const Mask m = mask_of(b, w, h);
    const auto o = oracle_holes(b, w, h);
    const auto got = find_holes(m);
    t.expect(got.count == o.count && got.area == o.area, "holes");
    const std::size_t area = oracle_area(b);
    t.expect(check_area(m, cfg).measured == static_cast<double>(area) / (static_cast<double>(w) * h), "area");
    if (area > 0) {
      const int d = oracle_boundary_distance(b, w, h);
      const auto r = check_boundary(m, cfg);
      t.expect(r.measured == d && r.passed == (d >= cfg.boundary_margin), "boundary");
    }
  }
  Mask solid(30, 30), donut(30, 30);
  for (int y = 5; y < 25; ++y) {
    for (int x = 5; x < 25; ++x) {
      solid.set(x, y);
      if (x < 10 || x >= 20 || y < 10 || y >= 20) donut.set(x, y);
    }
  }
  t.expect(find_holes(donut).count == 1, "donut");
  t.expect(find_holes(solid).count == 0, "solid");
  return t.done("200 random masks plus donut/solid");
}

PipelineConfig procedural_config(const fs::path& root, std::size_t clips, std::uint64_t seed) {
  write_procedural_source(root / "source", clips, seed);
  write_procedural_bank(root / "bank", 16, seed + 1);
  PipelineConfig cfg;
  cfg.root_seed = seed;
  cfg.sources.push_back({root / "source", OccluderBank::generic});
  cfg.banks[OccluderBank::generic] = root / "bank";
  cfg.output_dir = root / "out";
  return cfg;
}

Outcome determinism() {
  Tally t;
  TempDir dir;
  auto cfg = procedural_config(dir.path(), 12, 2024);
  std::map<std::string, std::string> first;
  std::size_t files = 0;
  for (const int workers : {1, 1, 8, 8}) {
    fs::remove_all(dir / "out");
    cfg.worker_count = workers;
    run_pipeline(cfg);
    auto bytes = tree_bytes(dir / "out");
    if (first.empty()) {
      first = std::move(bytes);
      files = first.size();
      t.expect(first.count("manifest.json") == 1, "manifest written");
    } else {
      t.expect(bytes == first, "outputs differ at " + std::to_string(workers) + " workers");
    }
  }
  return t.done("4 runs (workers 1,1,8,8), " + std::to_string(files) + " files compared byte for byte");
}

Outcome throughput() {
  Tally t;
  TempDir dir;
  auto cfg = procedural_config(dir.path(), 100, 7);
  cfg.worker_count = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto t0 = Clock::now();
  const auto m = run_pipeline(cfg);
  const double secs = seconds_since(t0);
  std::size_t synthesized = 0;
  for (const auto& c : m.clips) synthesized += c.verdict != Verdict::auto_reject;
  t.expect(m.clips.size() + m.skipped.size() == 100, "clip count");
  t.expect(secs < 120.0, "runtime " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "100 clips x 14 x 384^2 in %.1f s on %d worker(s), %zu synthesized", secs,
                cfg.worker_count, synthesized);
  return t.done(buf);
}

ClipManifest review_clip(const std::string& id, Verdict v) {
  ClipManifest c;
  c.clip_id = id;
  c.occluder_id = "generic/occ_000";
  c.track.positions = {{1, 1}};
  c.track.scales = {1};
  c.occlusion_rates = {0.5};
  c.frame_count = 1;
  c.verdict = v;
  return c;
}

Outcome review_service() {
  Tally t;
  TempDir dir;
  DatasetManifest manifest;
  for (int i = 0; i < 8; ++i) {
    manifest.clips.push_back(review_clip("c" + std::to_string(i), i == 6 ? Verdict::auto_reject : Verdict::pending));
  }
  manifest.normalize();
  const std::vector<std::string> ids = {"c0", "c1", "c2", "c3", "c4", "c5", "c7"};

  SplitMix64 rng(17);
  std::vector<Decision> trace;
  for (int i = 0; i < 20; ++i) {
    Decision d;
    d.candidate_id = ids[rng.below(ids.size())];
    d.verdict = rng.below(2) ? DecisionVerdict::accept : DecisionVerdict::reject;
    d.reviewer = "r";
    d.timestamp = 1000 + i;
    trace.push_back(d);
  }
  const fs::path full = dir / "full.ndjson";
  {
    DecisionLog log(full);
    for (const auto& d : trace) log.append(d);
  }
  const std::string bytes = slurp(full);

  // Oracle: latest verdict and decision count per candidate.
  auto fold = [](std::span<const Decision> ds) {
    std::map<std::string, std::pair<DecisionVerdict, std::uint64_t>> out;
    for (const auto& d : ds) {
      out[d.candidate_id].first = d.verdict;
      ++out[d.candidate_id].second;
    }
    return out;
  };
  const fs::path cut = dir / "cut.ndjson";
  for (std::size_t p = 0; p <= bytes.size(); ++p) {
    std::ofstream(cut, std::ios::binary | std::ios::trunc) << bytes.substr(0, p);
    const auto k = static_cast<std::size_t>(std::count(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(p), '\n'));
    const auto want = fold(std::span(trace).first(k));
    const auto state = replay(manifest, DecisionLog::read(cut).decisions);
    bool ok = state.decision_count() == k && state.entries().size() == want.size();
    for (const auto& [id, e] : want) {
      const auto* got = state.entry(id);
      ok = ok && got && got->revision == e.second && got->latest.verdict == e.first;
    }
    t.expect(ok, "replay at byte " + std::to_string(p));
  }

  // Restart on the full log, then drive the service over HTTP.
  ServiceOptions opts;
  opts.log_path = full;
  opts.clips_root = dir / "clips";
  ReviewService service(manifest, opts);
  httplib::Server server;
  register_routes(server, service);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client cli("127.0.0.1", port);
  const auto res = cli.Post("/api/candidates/c7/decision", R"({"verdict":"accept","reviewer":"http"})", "application/json");
  t.expect(res && res->status == 200, "decision over HTTP");
  trace.push_back(Decision{"c7", DecisionVerdict::accept, std::nullopt, "", "http", 0});
  const auto want = fold(trace);
  for (const auto& [name, dv] : {std::pair{"accepted", DecisionVerdict::accept}, std::pair{"rejected", DecisionVerdict::reject}}) {
    const auto r = cli.Get(std::string("/api/export?verdict=") + name);
    if (!r || r->status != 200) {
      t.expect(false, std::string("export ") + name);
      continue;
    }
    std::vector<std::string> got, expect;
    for (const auto& c : parse_manifest(r->body).clips) got.push_back(c.clip_id);
    for (const auto& c : manifest.clips) {
      const auto it = want.find(c.clip_id);
      if (c.verdict != Verdict::auto_reject && it != want.end() && it->second.first == dv) expect.push_back(c.clip_id);
    }
    t.expect(got == expect, std::string("export ") + name + " differs from filter oracle");
  }
  server.stop();
  th.join();
  return t.done(std::to_string(bytes.size() + 1) + " crash positions, export over HTTP");
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::off);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"occlusion-rate contract", occlusion_rates},
      {"track laws", track_laws},
      {"blend properties", blend_properties},
      {"window planning", window_planning},
      {"stitcher oracle", stitcher_oracle},
      {"metric oracles", metric_oracles},
      {"amodal-check oracles", check_oracles},
      {"determinism", determinism},
      {"throughput", throughput},
      {"review service", review_service},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
