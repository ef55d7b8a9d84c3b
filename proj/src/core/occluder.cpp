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

#include "amodal/occluder.hpp"

#include <algorithm>

#include "amodal/error.hpp"
#include "amodal/png_io.hpp"

namespace amodal {

std::string_view to_string(OccluderBank bank) noexcept {
  return bank == OccluderBank::driving ? "driving" : "generic";
}

OccluderBank occluder_bank_from_string(std::string_view s) {
  if (s == "generic") return OccluderBank::generic;
  if (s == "driving") return OccluderBank::driving;
  throw Error(ErrorCode::invalid_argument, "unknown occluder bank '" + std::string(s) + "'");
}

OccluderAsset make_occluder(std::string id, const Frame& rgba, OccluderBank bank) {
  if (!rgba.has_alpha()) {
    throw Error(ErrorCode::invalid_argument, "occluder '" + id + "' has no alpha channel");
  }
  const auto alpha = rgba.alpha();
  const int w = rgba.width();
  const int h = rgba.height();
  int x0 = w;
  int y0 = h;
  int x1 = -1;
  int y1 = -1;
  std::size_t area = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (alpha[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] == 0) continue;
      ++area;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (area == 0) {
    throw Error(ErrorCode::invalid_argument, "occluder '" + id + "' is fully transparent");
  }
  const int tw = x1 - x0 + 1;
  const int th = y1 - y0 + 1;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(tw) * static_cast<std::size_t>(th) * 3);
  std::vector<std::uint8_t> a(static_cast<std::size_t>(tw) * static_cast<std::size_t>(th));
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      const std::size_t dst = static_cast<std::size_t>(y) * static_cast<std::size_t>(tw) + static_cast<std::size_t>(x);
      const Rgb c = rgba.at(x0 + x, y0 + y);
      rgb[dst * 3] = c.r;
      rgb[dst * 3 + 1] = c.g;
      rgb[dst * 3 + 2] = c.b;
      a[dst] = alpha[static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x0 + x)];
    }
  }
  return OccluderAsset{std::move(id), Frame(tw, th, std::move(rgb), std::move(a)), bank, area};
}

std::vector<OccluderAsset> load_occluder_bank(const std::filesystem::path& dir, OccluderBank bank) {
  std::vector<OccluderAsset> out;
  for (const auto& path : list_pngs(dir)) {
    out.push_back(make_occluder(std::string(to_string(bank)) + "/" + path.stem().string(),
                                read_frame(path), bank));
  }
  return out;
}

}  // namespace amodal
