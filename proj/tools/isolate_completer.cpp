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

// Baseline completer for `amodal stitch`: returns the visible object on white.
// Usage: amodal-isolate-completer <input_dir> <output_dir>

#include <cstdio>
#include <exception>
#include <filesystem>

#include "amodal/overlay.hpp"
#include "amodal/png_io.hpp"

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <input_dir> <output_dir>\n", argv[0]);
    return 2;
  }
  try {
    const fs::path in = argv[1];
    const fs::path out = argv[2];
    fs::create_directories(out);
    const auto frames = amodal::list_pngs(in / "frames");
    for (const auto& f : frames) {
      amodal::Frame frame = amodal::read_frame(f);
      frame.drop_alpha();
      const amodal::Mask mask = amodal::read_mask(in / "masks" / f.filename());
      amodal::write_png(out / f.filename(), amodal::isolate_on_white(frame, mask));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
