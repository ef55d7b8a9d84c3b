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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "amodal/image.hpp"

namespace amodal {

enum class OccluderBank { generic, driving };

std::string_view to_string(OccluderBank bank) noexcept;
OccluderBank occluder_bank_from_string(std::string_view s);

/// Segmented occluder image. The RGBA frame is trimmed so nonzero alpha
/// touches all four sides.
struct OccluderAsset {
  std::string id;
  Frame rgba;
  OccluderBank source_bank = OccluderBank::generic;
  std::size_t native_area = 0;  // pixels with nonzero alpha

  int width() const noexcept { return rgba.width(); }
  int height() const noexcept { return rgba.height(); }
};

/// Validates and trims. Throws if the frame has no alpha or alpha is zero
/// everywhere.
OccluderAsset make_occluder(std::string id, const Frame& rgba, OccluderBank bank);

/// Loads every PNG in `dir`, sorted by filename; ids are "<bank>/<stem>".
/// Files without a usable alpha channel are rejected with an error.
std::vector<OccluderAsset> load_occluder_bank(const std::filesystem::path& dir, OccluderBank bank);

}  // namespace amodal
