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
#include <span>
#include <string>
#include <vector>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"

namespace amodal {

struct StitchConfig {
  int k = 14;  // window length
  int m = 5;   // overlap carried into the next window
  /// A completed pixel belongs to the object when any channel is below this.
  std::uint8_t mask_threshold = 250;

  void validate() const;
};

/// Half-open frame range [start, end).
struct WindowSpan {
  std::size_t index = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  friend bool operator==(const WindowSpan&, const WindowSpan&) = default;
};

/// Takes the window frames and their visible masks and returns the completed
/// object on white, same length and size. The span tells which frames of
/// the full clip the window covers.
using Completer =
    std::function<VideoClip(const VideoClip& window, std::span<const Mask> visible, const WindowSpan& span)>;

/// Per pixel: o where M is set, v elsewhere.
Frame blend(const Frame& v_frame, const Frame& o_frame, const Mask& M);

/// Object mask of an object-on-white frame.
Mask derive_M(const Frame& o_frame, const StitchConfig& cfg);

/// Window 0 is [0, k); each next window starts m frames before the previous
/// end and spans k frames; the final one is right-aligned to end at N.
/// N <= k gives the single window [0, N).
std::vector<WindowSpan> plan_windows(std::size_t n, const StitchConfig& cfg);

/// Runs the completer window by window, blending each result back into the
/// clip before the next window reads its overlap frames. Returns the
/// completed object video; frames in an overlap come from the later window.
VideoClip stitch(const VideoClip& clip, std::span<const Mask> masks, const Completer& completer,
                 const StitchConfig& cfg);

/// Completer backed by an external executable, invoked as
///   <exe> <input_dir> <output_dir>
/// with input_dir/frames/NNNN.png, input_dir/masks/NNNN.png and
/// input_dir/window.json; it must write output_dir/NNNN.png for every input
/// frame and exit 0. Files live under `work_dir` and are removed afterwards.
Completer make_subprocess_completer(std::filesystem::path executable, std::filesystem::path work_dir);

}  // namespace amodal
