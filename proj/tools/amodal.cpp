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

// amodal: command-line front end for dataset synthesis, evaluation and review.

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "amodal/amodal_check.hpp"
#include "amodal/error.hpp"
#include "amodal/image2video.hpp"
#include "amodal/metrics.hpp"
#include "amodal/overlay.hpp"
#include "amodal/pipeline.hpp"
#include "amodal/png_io.hpp"
#include "amodal/procedural.hpp"
#include "amodal/review.hpp"
#include "amodal/rng.hpp"
#include "amodal/stitcher.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace amodal;

namespace {

constexpr int kExitSystemic = 1;
constexpr int kExitConfig = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("amodal");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("AMODAL_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

std::string read_text(const fs::path& p) {
  const auto bytes = read_file(p);
  return std::string(bytes.begin(), bytes.end());
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(p, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

/// Reads <dir>/<frames_sub> and <dir>/<masks_sub> (plus depth/ when present).
LoadedCandidate load_clip_dir(const fs::path& dir, const char* frames_sub = "frames", const char* masks_sub = "masks") {
  if (!fs::is_directory(dir / frames_sub) || !fs::is_directory(dir / masks_sub)) {
    throw Error(ErrorCode::invalid_argument,
                dir.string() + " must contain " + frames_sub + "/ and " + masks_sub + "/");
  }
  Candidate c{dir.filename().string(), dir, OccluderBank::generic, list_pngs(dir / frames_sub),
              list_pngs(dir / masks_sub), {}};
  if (fs::is_directory(dir / "depth")) c.depths = list_pngs(dir / "depth");
  if (c.frames.size() != c.masks.size()) throw Error(ErrorCode::invalid_argument, "frame and mask counts differ in " + dir.string());
  return load_candidate(c);
}

void write_sequence(const fs::path& dir, const VideoClip& clip, std::span<const Mask> masks) {
  fs::create_directories(dir / "frames");
  for (std::size_t i = 0; i < clip.size(); ++i) write_png(dir / "frames" / frame_filename(i), clip.frames[i]);
  if (masks.empty()) return;
  fs::create_directories(dir / "masks");
  for (std::size_t i = 0; i < masks.size(); ++i) write_png(dir / "masks" / frame_filename(i), masks[i]);
}

CheckConfig check_config_from(const std::string& config_path) {
  if (config_path.empty()) return {};
  return load_pipeline_config(config_path).check;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Synthetic amodal video dataset toolkit"};
  app.require_subcommand(1);

  // check
  std::string check_clip, check_config;
  std::optional<int> ck_margin, ck_max_holes, ck_band;
  std::optional<double> ck_min_area, ck_hole_area, ck_closer;
  auto* check = app.add_subcommand("check", "Run the amodal check on one clip directory");
  check->add_option("--clip,--in", check_clip, "Directory with frames/, masks/ and optional depth/")->required();
  check->add_option("--config", check_config, "Pipeline TOML; only [check] is used");
  check->add_option("--boundary-margin", ck_margin);
  check->add_option("--min-area-fraction", ck_min_area);
  check->add_option("--max-hole-count", ck_max_holes);
  check->add_option("--max-hole-area-fraction", ck_hole_area);
  check->add_option("--depth-band", ck_band);
  check->add_option("--depth-closer-fraction", ck_closer);

  // synth
  std::string synth_clip, synth_occluder, synth_bank_dir, synth_out, synth_strategy = "easy", synth_bank = "generic";
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Synthesize one occluded/ground-truth pair");
  synth->add_option("--in,--clip", synth_clip, "Directory with frames/ and masks/")->required();
  auto* synth_occ_opt = synth->add_option("--occluder", synth_occluder, "RGBA occluder PNG");
  auto* synth_bank_opt = synth->add_option("--occluder-bank", synth_bank_dir, "Directory of RGBA occluder PNGs");
  synth_occ_opt->excludes(synth_bank_opt);
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--strategy", synth_strategy, "easy or hard")->check(CLI::IsMember({"easy", "hard"}));
  synth->add_option("--bank", synth_bank, "Occluder bank label")->check(CLI::IsMember({"generic", "driving"}));
  synth->add_option("--seed", synth_seed, "Root seed");

  // img2vid
  std::string i2v_image, i2v_mask, i2v_out, i2v_motion = "zoom";
  int i2v_frames = 14;
  double i2v_zoom = 0.8, i2v_dx = 0.0, i2v_dy = 0.0;
  std::vector<double> i2v_h;
  bool i2v_random = false;
  std::uint64_t i2v_seed = 0;
  auto* img2vid = app.add_subcommand("img2vid", "Turn a still image and mask into a short clip");
  img2vid->add_option("--image", i2v_image)->required();
  img2vid->add_option("--mask", i2v_mask)->required();
  img2vid->add_option("--out", i2v_out)->required();
  img2vid->add_option("--kind,--motion", i2v_motion)->check(CLI::IsMember({"zoom", "move", "parallel_move", "warp"}));
  img2vid->add_option("--frames", i2v_frames)->check(CLI::PositiveNumber);
  img2vid->add_option("--zoom-end", i2v_zoom, "Last-frame crop fraction");
  img2vid->add_option("--dx", i2v_dx);
  img2vid->add_option("--dy", i2v_dy);
  img2vid->add_option("--homography", i2v_h, "Nine row-major entries of the last-frame homography")->expected(9);
  img2vid->add_flag("--randomize", i2v_random, "Draw motion parameters from --seed");
  img2vid->add_option("--seed", i2v_seed);

  // stitch
  std::string st_clip, st_completer, st_out, st_work;
  int st_k = 14, st_m = 5;
  auto* stitch_cmd = app.add_subcommand("stitch", "Complete a long clip window by window");
  stitch_cmd->add_option("--clip", st_clip, "Directory with frames/ and visible masks/")->required();
  stitch_cmd->add_option("--completer", st_completer, "cmd://<executable>")->required();
  stitch_cmd->add_option("--out", st_out)->required();
  stitch_cmd->add_option("--work", st_work, "Scratch directory for window exchange");
  stitch_cmd->add_option("--k", st_k);
  stitch_cmd->add_option("--m", st_m);

  // eval
  std::string ev_pred, ev_gt, ev_format = "json", ev_out;
  int ev_dilation = 7;
  std::optional<int> ev_resize;
  auto* eval = app.add_subcommand("eval", "Score predicted completions against ground truth");
  eval->add_option("--pred", ev_pred, "Directory with frames/ and optional masks/, or a flat directory of frames")->required();
  eval->add_option("--gt", ev_gt, "Directory with frames/ and masks/ (or a synthesized pair directory)")->required();
  eval->add_option("--dilation", ev_dilation)->check(CLI::NonNegativeNumber);
  eval->add_option("--resize", ev_resize, "Resize to a square side before scoring");
  eval->add_option("--format", ev_format)->check(CLI::IsMember({"json", "csv"}));
  eval->add_option("--output", ev_out);

  // pipeline
  std::string pl_config, pl_output, pl_strategy;
  std::optional<std::uint64_t> pl_seed;
  std::optional<int> pl_workers;
  std::optional<std::size_t> pl_shard;
  auto* pipeline = app.add_subcommand("pipeline", "Run the full curation pipeline");
  pipeline->add_option("--config", pl_config)->required();
  pipeline->add_option("--root-seed", pl_seed);
  pipeline->add_option("--strategy", pl_strategy)->check(CLI::IsMember({"easy", "hard"}));
  pipeline->add_option("--workers", pl_workers);
  pipeline->add_option("--shard-size", pl_shard);
  pipeline->add_option("--output", pl_output);

  // stats
  std::string stats_manifest, stats_out;
  auto* stats_cmd = app.add_subcommand("stats", "Summarize a dataset manifest");
  stats_cmd->add_option("--manifest", stats_manifest)->required();
  stats_cmd->add_option("--output", stats_out);

  // shard
  std::string shard_manifest, shard_out;
  std::optional<std::size_t> shard_size;
  auto* shard = app.add_subcommand("shard", "Split a manifest into shard files");
  shard->add_option("--manifest", shard_manifest)->required();
  shard->add_option("--out", shard_out)->required();
  shard->add_option("--shard-size", shard_size);

  // serve
  std::string sv_manifest, sv_log, sv_clips, sv_ui, sv_snapshot, sv_host = "127.0.0.1";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the review service");
  serve->add_option("--manifest", sv_manifest)->required();
  serve->add_option("--log", sv_log, "Decision log (NDJSON)")->required();
  serve->add_option("--port", sv_port);
  serve->add_option("--host", sv_host);
  serve->add_option("--clips", sv_clips, "Directory of clip folders; defaults to <manifest dir>/clips");
  serve->add_option("--ui", sv_ui, "Static review UI bundle");
  serve->add_option("--snapshot", sv_snapshot, "Manifest snapshot written every 50 decisions and on exit");

  // generate
  std::string gen_out;
  std::size_t gen_clips = 20, gen_occluders = 8;
  std::uint64_t gen_seed = 1;
  int gen_frames = 14, gen_size = 384;
  bool gen_depth = false;
  auto* generate = app.add_subcommand("generate", "Write procedural demo clips and an occluder bank");
  generate->add_option("--out", gen_out)->required();
  generate->add_option("--clips", gen_clips);
  generate->add_option("--occluders", gen_occluders);
  generate->add_option("--seed", gen_seed);
  generate->add_option("--frames", gen_frames)->check(CLI::PositiveNumber);
  generate->add_option("--size", gen_size)->check(CLI::Range(16, 4096));
  generate->add_flag("--depth", gen_depth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*check) {
      const auto clip = load_clip_dir(check_clip);
      std::optional<std::span<const DepthMap>> depths;
      if (clip.depths) depths = std::span<const DepthMap>(*clip.depths);
      CheckConfig cfg = check_config_from(check_config);
      if (ck_margin) cfg.boundary_margin = *ck_margin;
      if (ck_min_area) cfg.min_area_fraction = *ck_min_area;
      if (ck_max_holes) cfg.max_hole_count = *ck_max_holes;
      if (ck_hole_area) cfg.max_hole_area_fraction = *ck_hole_area;
      if (ck_band) cfg.depth_band = *ck_band;
      if (ck_closer) cfg.depth_closer_fraction_threshold = *ck_closer;
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::config, e.what());
      }
      const auto report = run_amodal_check(clip.masks, depths, cfg);
      json reasons = json::array();
      for (const auto r : report.reject_reasons) reasons.push_back(to_string(r));
      std::cout << json{{"clip_id", fs::path(check_clip).filename().string()},
                        {"verdict", to_string(report.verdict)},
                        {"reject_reasons", reasons},
                        {"checks", report.summary()}}
                       .dump(2)
                << "\n";
    } else if (*synth) {
      if (synth_occluder.empty() == synth_bank_dir.empty()) {
        throw Error(ErrorCode::config, "synth needs exactly one of --occluder or --occluder-bank");
      }
      const auto clip = load_clip_dir(synth_clip);
      const auto bank = occluder_bank_from_string(synth_bank);
      const std::string clip_id = fs::path(synth_clip).filename().string();
      const std::uint64_t seed = derive_clip_seed(synth_seed, clip_id);
      SplitMix64 rng(seed);
      OccluderAsset occ;
      if (synth_bank_dir.empty()) {
        occ = make_occluder(std::string(to_string(bank)) + "/" + fs::path(synth_occluder).stem().string(),
                            read_frame(synth_occluder), bank);
      } else {
        auto assets = load_occluder_bank(synth_bank_dir, bank);
        if (assets.empty()) throw Error(ErrorCode::config, "occluder bank " + synth_bank_dir + " is empty");
        occ = std::move(assets[rng.below(assets.size())]);
      }
      auto result = synthesize_pair(clip_id, clip.clip, clip.masks, occ,
                                    StrategyConfig::defaults(strategy_from_string(synth_strategy)), seed, rng);
      if (auto* f = std::get_if<SynthFailure>(&result)) {
        spdlog::error("synthesis failed for {}: {}", f->clip_id, f->reason);
        return kExitSystemic;
      }
      write_pair(synth_out, std::get<SynthPair>(result));
      std::cout << serialize_clip_manifest(std::get<SynthPair>(result).manifest);
    } else if (*img2vid) {
      const Frame img = read_frame(i2v_image);
      const Mask mask = read_mask(i2v_mask);
      const MotionKind kind = i2v_motion == "zoom"            ? MotionKind::zoom
                              : i2v_motion != "warp"           ? MotionKind::parallel_move
                                                              : MotionKind::warp;
      MotionSpec spec;
      if (i2v_random) {
        SplitMix64 rng(i2v_seed);
        spec = random_motion(kind, i2v_frames, img.width(), img.height(), rng);
      } else {
        spec.kind = kind;
        spec.frames = i2v_frames;
        spec.zoom_end = i2v_zoom;
        spec.dx = i2v_dx;
        spec.dy = i2v_dy;
        if (!i2v_h.empty()) std::copy(i2v_h.begin(), i2v_h.end(), spec.homography_end.begin());
      }
      const auto seq = make_sequence(img, mask, spec);
      write_sequence(i2v_out, seq.clip, seq.masks);
    } else if (*stitch_cmd) {
      if (!st_completer.starts_with("cmd://")) {
        throw Error(ErrorCode::config, "--completer must have the form cmd://<executable>");
      }
      const auto clip = load_clip_dir(st_clip);
      const fs::path work = st_work.empty() ? fs::path(st_out) / ".work" : fs::path(st_work);
      StitchConfig cfg{st_k, st_m};
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::config, e.what());
      }
      const auto completed = stitch(clip.clip, clip.masks, make_subprocess_completer(st_completer.substr(6), work), cfg);
      write_sequence(st_out, completed, {});
      if (st_work.empty()) fs::remove_all(work);
    } else if (*eval) {
      LoadedCandidate pred;
      if (fs::is_directory(fs::path(ev_pred) / "masks")) {
        pred = load_clip_dir(ev_pred);
      } else {
        const fs::path frames_dir = fs::is_directory(fs::path(ev_pred) / "frames") ? fs::path(ev_pred) / "frames" : fs::path(ev_pred);
        for (const auto& p : list_pngs(frames_dir)) {
          Frame f = read_frame(p);
          f.drop_alpha();
          pred.masks.push_back(derive_M(f, StitchConfig{}));
          pred.clip.frames.push_back(std::move(f));
        }
      }
      const bool pair_dir = fs::is_directory(fs::path(ev_gt) / "gt");
      const auto gt = pair_dir ? load_clip_dir(ev_gt, "gt", "gt_masks") : load_clip_dir(ev_gt);
      EvalOptions opts{ev_dilation, ev_resize};
      const auto report = evaluate_clip(pred.clip, gt.clip, gt.masks, pred.masks, opts);
      if (ev_format == "json") {
        emit(to_json(report).dump(2) + "\n", ev_out);
      } else {
        std::ostringstream csv;
        csv.precision(17);
        csv << "clip,frames_evaluated,psnr,ssim,iou\n"
            << fs::path(ev_gt).filename().string() << ',' << report.frames_evaluated << ',' << report.mean_psnr
            << ',' << report.mean_ssim << ',' << report.mean_iou << '\n';
        emit(csv.str(), ev_out);
      }
    } else if (*pipeline) {
      PipelineConfig cfg = load_pipeline_config(pl_config);
      if (pl_seed) cfg.root_seed = *pl_seed;
      if (!pl_strategy.empty()) cfg.set_strategy(strategy_from_string(pl_strategy));
      if (pl_workers) cfg.worker_count = *pl_workers;
      if (pl_shard) cfg.shard_size = *pl_shard;
      if (!pl_output.empty()) cfg.output_dir = fs::absolute(pl_output);
      try {
        cfg.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::config, e.what());
      }
      const auto manifest = run_pipeline(cfg);
      std::cout << cfg.resolve(cfg.output_dir / "manifest.json").string() << "\n";
      (void)manifest;
    } else if (*stats_cmd) {
      const auto manifest = parse_manifest(read_text(stats_manifest));
      emit(to_json(stats(manifest)).dump(2) + "\n", stats_out);
    } else if (*shard) {
      auto manifest = parse_manifest(read_text(shard_manifest));
      if (shard_size) {
        if (*shard_size < 1) throw Error(ErrorCode::config, "--shard-size must be >= 1");
        manifest.shard_size = *shard_size;
      }
      for (const auto& p : write_shards(manifest, shard_out)) std::cout << p.string() << "\n";
    } else if (*serve) {
      const auto manifest = parse_manifest(read_text(sv_manifest));
      ServiceOptions opts;
      opts.log_path = sv_log;
      opts.clips_root = sv_clips.empty() ? fs::path(sv_manifest).parent_path() / "clips" : fs::path(sv_clips);
      if (!sv_ui.empty()) opts.ui_dir = sv_ui;
      if (!sv_snapshot.empty()) opts.snapshot_path = sv_snapshot;
      ReviewService service(manifest, opts);
      httplib::Server server;
      register_routes(server, service);
      if (!server.bind_to_port(sv_host, sv_port)) {
        throw Error(ErrorCode::config, "cannot bind " + sv_host + ":" + std::to_string(sv_port));
      }
      sigset_t stop_signals;
      sigemptyset(&stop_signals);
      sigaddset(&stop_signals, SIGINT);
      sigaddset(&stop_signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&stop_signals, &sig);
        spdlog::info("signal {}, shutting down", sig);
        server.stop();
      });
      spdlog::info("review service listening on http://{}:{}", sv_host, sv_port);
      server.listen_after_bind();
      // Wakes the waiter if the server stopped on its own.
      if (waiter.joinable()) {
        pthread_kill(waiter.native_handle(), SIGTERM);
        waiter.join();
      }
      service.write_snapshot();
    } else if (*generate) {
      const ProceduralClipOptions opts{gen_size, gen_size, gen_frames};
      write_procedural_source(fs::path(gen_out) / "source", gen_clips, gen_seed, opts, gen_depth);
      write_procedural_bank(fs::path(gen_out) / "occluders", gen_occluders, mix64(gen_seed));
      spdlog::info("wrote {} clips and {} occluders under {}", gen_clips, gen_occluders, gen_out);
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.code() == ErrorCode::config ? kExitConfig : kExitSystemic;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitSystemic;
  }
  return 0;
}
