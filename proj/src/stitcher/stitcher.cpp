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

#include "amodal/stitcher.hpp"

#include <algorithm>

#include <spawn.h>
#include <sys/wait.h>

#include <json.hpp>

#include "amodal/error.hpp"
#include "amodal/png_io.hpp"

extern char** environ;

namespace amodal {

void StitchConfig::validate() const {
  if (m < 1 || m >= k) throw Error(ErrorCode::config, "stitch config must satisfy 1 <= m < k");
}

Frame blend(const Frame& v_frame, const Frame& o_frame, const Mask& M) {
  if (!v_frame.same_size(o_frame) || v_frame.width() != M.width() || v_frame.height() != M.height()) {
    throw Error(ErrorCode::dimension_mismatch, "blend: frame and mask sizes differ");
  }
  Frame out(v_frame.width(), v_frame.height());
  auto dst = out.pixels();
  const auto v = v_frame.pixels();
  const auto o = o_frame.pixels();
  for (int y = 0; y < v_frame.height(); ++y) {
    for (int x = 0; x < v_frame.width(); ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(v_frame.width()) +
                             static_cast<std::size_t>(x)) * 3;
      const auto& from = M.get(x, y) ? o : v;
      dst[i] = from[i];
      dst[i + 1] = from[i + 1];
      dst[i + 2] = from[i + 2];
    }
  }
  return out;
}

Mask derive_M(const Frame& o_frame, const StitchConfig& cfg) {
  Mask m(o_frame.width(), o_frame.height());
  const auto px = o_frame.pixels();
  for (int y = 0; y < o_frame.height(); ++y) {
    for (int x = 0; x < o_frame.width(); ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(o_frame.width()) +
                             static_cast<std::size_t>(x)) * 3;
      if (std::min({px[i], px[i + 1], px[i + 2]}) < cfg.mask_threshold) m.set(x, y);
    }
  }
  return m;
}

std::vector<WindowSpan> plan_windows(std::size_t n, const StitchConfig& cfg) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.k);
  const auto m = static_cast<std::size_t>(cfg.m);
  std::vector<WindowSpan> out;
  if (n == 0) return out;
  if (n <= k) {
    out.push_back({0, 0, n});
    return out;
  }
  out.push_back({0, 0, k});
  while (out.back().end < n) {
    std::size_t start = out.back().end - m;
    if (start + k > n) start = n - k;
    out.push_back({out.size(), start, start + k});
  }
  return out;
}

VideoClip stitch(const VideoClip& clip, std::span<const Mask> masks, const Completer& completer,
                 const StitchConfig& cfg) {
  clip.validate();
  cfg.validate();
  if (masks.size() != clip.size()) {
    throw Error(ErrorCode::dimension_mismatch, "stitch: mask count differs from frame count");
  }
  const std::size_t n = clip.size();
  std::vector<Frame> blended = clip.frames;
  std::vector<Mask> visible(masks.begin(), masks.end());
  VideoClip result;
  result.fps = clip.fps;
  result.frames.resize(n);

  for (const auto& span : plan_windows(n, cfg)) {
    VideoClip input;
    input.fps = clip.fps;
    std::vector<Mask> input_masks;
    for (std::size_t t = span.start; t < span.end; ++t) {
      input.frames.push_back(blended[t]);
      input_masks.push_back(visible[t]);
    }
    VideoClip output;
    try {
      output = completer(input, input_masks, span);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::completer_failed,
                  "completer failed on window " + std::to_string(span.index) + ": " + e.what());
    }
    if (output.size() != span.size()) {
      throw Error(ErrorCode::completer_failed,
                  "completer returned " + std::to_string(output.size()) + " frames for window " +
                      std::to_string(span.index) + " of " + std::to_string(span.size()));
    }
    for (std::size_t j = 0; j < output.size(); ++j) {
      if (!output.frames[j].same_size(clip.frames.front())) {
        throw Error(ErrorCode::completer_failed,
                    "completer output size mismatch in window " + std::to_string(span.index));
      }
    }
    for (std::size_t t = span.start; t < span.end; ++t) {
      Frame& o = output.frames[t - span.start];
      o.drop_alpha();
      const Mask M = derive_M(o, cfg);
      blended[t] = blend(clip.frames[t], o, M);
      // Later windows see completed frames with their derived masks.
      visible[t] = M;
      result.frames[t] = std::move(o);
    }
  }
  return result;
}

namespace {

int run_process(const std::filesystem::path& exe, const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::string exe_str = exe.string();
  argv.push_back(exe_str.data());
  std::vector<std::string> copies = args;
  for (auto& a : copies) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe_str.c_str(), nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw Error(ErrorCode::completer_failed, "cannot spawn " + exe_str);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw Error(ErrorCode::completer_failed, "waitpid failed for " + exe_str);
  }
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
}

}  // namespace

Completer make_subprocess_completer(std::filesystem::path executable, std::filesystem::path work_dir) {
  return [exe = std::move(executable), work = std::move(work_dir)](
             const VideoClip& window, std::span<const Mask> visible, const WindowSpan& span) {
    namespace fs = std::filesystem;
    const fs::path base = work / ("window_" + std::to_string(span.index));
    const fs::path in = base / "in";
    const fs::path out = base / "out";
    fs::remove_all(base);
    fs::create_directories(in / "frames");
    fs::create_directories(in / "masks");
    fs::create_directories(out);
    for (std::size_t i = 0; i < window.size(); ++i) {
      write_png(in / "frames" / frame_filename(i), window.frames[i]);
      write_png(in / "masks" / frame_filename(i), visible[i]);
    }
    const nlohmann::json meta{{"index", span.index}, {"start", span.start}, {"end", span.end},
                              {"frames", window.size()}};
    const std::string text = meta.dump(2) + "\n";
    write_file(in / "window.json", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));

    const int rc = run_process(exe, {in.string(), out.string()});
    if (rc != 0) {
      throw Error(ErrorCode::completer_failed, exe.string() + " exited with status " + std::to_string(rc));
    }
    VideoClip result;
    result.fps = window.fps;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const fs::path p = out / frame_filename(i);
      if (!fs::exists(p)) throw Error(ErrorCode::completer_failed, "completer did not write " + p.string());
      result.frames.push_back(read_frame(p));
    }
    fs::remove_all(base);
    return result;
  };
}

}  // namespace amodal
