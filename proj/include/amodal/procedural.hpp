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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"
#include "amodal/occluder.hpp"

namespace amodal {

/// Procedurally drawn moving shapes for demos, tests and benchmarks.
struct ProceduralClipOptions {
  int width = 384;
  int height = 384;
  int frames = 14;
};

struct ProceduralClip {
  VideoClip clip;
  std::vector<Mask> masks;
  /// Background far, object near; same size as the frames.
  std::vector<DepthMap> depths;
};

/// A random polygon or ellipse moving over a textured background. The object
/// stays clear of the frame border and has no holes.
ProceduralClip make_shape_clip(std::uint64_t seed, const ProceduralClipOptions& options = {});

/// Random striped rectangle, ellipse or polygon with antialiased alpha.
OccluderAsset make_procedural_occluder(std::string id, std::uint64_t seed,
                                       OccluderBank bank = OccluderBank::generic);

/// `count` occluders with ids "<bank>/occ_NNN".
std::vector<OccluderAsset> make_procedural_bank(std::size_t count, std::uint64_t seed,
                                                OccluderBank bank = OccluderBank::generic);

/// Writes <dir>/clip_NNNNN/{frames,masks[,depth]}/NNNN.png.
void write_procedural_source(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed,
                             const ProceduralClipOptions& options = {}, bool with_depth = false);

/// Writes <dir>/occ_NNN.png (RGBA).
void write_procedural_bank(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed);

}  // namespace amodal
