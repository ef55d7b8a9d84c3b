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

#include <doctest.h>

#include "amodal/error.hpp"
#include "amodal/metrics.hpp"
#include "support.hpp"

using namespace amodal;
using namespace amodal::testing;

namespace {

Mask rect(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.set(x, y);
  }
  return m;
}

}  // namespace

TEST_CASE("iou") {
  const Mask a = rect(30, 30, 0, 0, 10, 10);
  CHECK(iou(a, a) == 1.0);
  CHECK(iou(a, rect(30, 30, 15, 15, 20, 20)) == 0.0);
  CHECK(iou(a, rect(30, 30, 5, 0, 15, 10)) == 50.0 / 150.0);
  CHECK(iou(Mask(4, 4), Mask(4, 4)) == 1.0);
  CHECK_THROWS_AS(iou(a, Mask(3, 3)), Error);
  SplitMix64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_bytes(rng, 64 * 64, rng.uniform01());
    const auto y = random_bytes(rng, 64 * 64, rng.uniform01());
    const double v = iou(mask_of(x, 64, 64), mask_of(y, 64, 64));
    CHECK(v == oracle_iou(x, y));
    CHECK(v == iou(mask_of(y, 64, 64), mask_of(x, 64, 64)));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("dilated bbox") {
  const Mask m = rect(40, 40, 10, 12, 20, 25);
  CHECK(dilated_bbox(m, 0) == BBox{10, 12, 20, 25});
  CHECK(dilated_bbox(m, 7) == BBox{3, 5, 27, 32});
  CHECK(dilated_bbox(rect(40, 40, 0, 0, 3, 3), 100) == BBox{0, 0, 40, 40});
  CHECK_THROWS_AS(dilated_bbox(Mask(5, 5), 1), Error);
  SplitMix64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto b = random_bytes(rng, 50 * 40, 0.002);
    const auto o = oracle_bbox(b, 50, 40);
    if (o.empty) continue;
    CHECK(dilated_bbox(mask_of(b, 50, 40), 7) ==
          BBox{std::max(0, o.x0 - 7), std::max(0, o.y0 - 7), std::min(50, o.x1 + 7), std::min(40, o.y1 + 7)});
  }
}

TEST_CASE("psnr") {
  const BBox all{0, 0, 64, 64};
  SplitMix64 rng(3);
  const Frame f = random_frame(rng, 64, 64);
  CHECK(psnr(f, f, all) == 99.0);
  CHECK(psnr(Frame(64, 64, kBlack), Frame(64, 64, kWhite), all) == 0.0);
  for (int t = 0; t < 100; ++t) {
    const Frame a = random_frame(rng, 64, 64);
    Frame b = a;
    auto px = b.pixels();
    const int amp = 1 + static_cast<int>(rng.below(255));
    for (auto& v : px) v = static_cast<std::uint8_t>(std::clamp<int>(v + static_cast<int>(rng.below(2 * amp + 1)) - amp, 0, 255));
    const BBox r{static_cast<int>(rng.below(20)), static_cast<int>(rng.below(20)), 40 + static_cast<int>(rng.below(25)),
                 40 + static_cast<int>(rng.below(25))};
    const double p = psnr(a, b, r);
    CHECK(std::abs(p - oracle_psnr(a, b, r)) <= 1e-9);
    CHECK(p == psnr(b, a, r));
  }
  // Uniform error: doubling it costs 20*log10(2) dB.
  const Frame base(32, 32, Rgb{100, 100, 100});
  const double p5 = psnr(base, Frame(32, 32, Rgb{105, 105, 105}), {0, 0, 32, 32});
  const double p10 = psnr(base, Frame(32, 32, Rgb{110, 110, 110}), {0, 0, 32, 32});
  CHECK(std::abs((p5 - p10) - 20.0 * std::log10(2.0)) <= 1e-6);
  CHECK_THROWS_AS(psnr(base, Frame(31, 32), {0, 0, 8, 8}), Error);
  CHECK_THROWS_AS(psnr(base, base, {0, 0, 33, 8}), Error);
  CHECK_THROWS_AS(psnr(base, base, {4, 4, 4, 8}), Error);
}

TEST_CASE("ssim") {
  const BBox all{0, 0, 64, 64};
  SplitMix64 rng(4);
  const Frame f = random_frame(rng, 64, 64);
  CHECK(ssim(f, f, all) == 1.0);
  const double c1 = (0.01 * 255) * (0.01 * 255);
  CHECK(ssim(Frame(20, 20, kBlack), Frame(20, 20, kWhite), {0, 0, 20, 20}) ==
        doctest::Approx(c1 / (255.0 * 255.0 + c1)).epsilon(1e-12));
  for (int t = 0; t < 100; ++t) {
    const Frame a = random_frame(rng, 64, 64);
    Frame b = a;
    for (auto& v : b.pixels()) v = static_cast<std::uint8_t>(std::clamp<int>(v + static_cast<int>(rng.below(61)) - 30, 0, 255));
    const BBox r{static_cast<int>(rng.below(10)), static_cast<int>(rng.below(10)), 30 + static_cast<int>(rng.below(35)),
                 30 + static_cast<int>(rng.below(35))};
    CHECK(std::abs(ssim(a, b, r) - oracle_ssim(a, b, r)) <= 1e-6);
  }
  const auto taps = ssim_gaussian_taps();
  REQUIRE(taps.size() == 11);
  double sum = 0;
  for (double v : taps) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(ssim(f, f, {0, 0, 10, 30}), Error);
}

TEST_CASE("ssim is translation invariant within the region") {
  SplitMix64 rng(5);
  const Frame a = random_frame(rng, 40, 40);
  Frame b = a;
  for (auto& v : b.pixels()) v = static_cast<std::uint8_t>(255 - v);
  Frame a2(60, 60), b2(60, 60);
  for (int y = 0; y < 40; ++y) {
    for (int x = 0; x < 40; ++x) {
      a2.set(x + 13, y + 7, a.at(x, y));
      b2.set(x + 13, y + 7, b.at(x, y));
    }
  }
  CHECK(ssim(a, b, {0, 0, 40, 40}) == doctest::Approx(ssim(a2, b2, {13, 7, 53, 47})).epsilon(1e-12));
}

TEST_CASE("evaluate_clip") {
  SplitMix64 rng(6);
  VideoClip gt;
  std::vector<Mask> masks;
  for (int i = 0; i < 4; ++i) {
    gt.frames.push_back(random_frame(rng, 48, 48));
    masks.push_back(rect(48, 48, 10 + i, 10, 30 + i, 30));
  }
  auto rep = evaluate_clip(gt, gt, masks, masks);
  CHECK(rep.mean_psnr == 99.0);
  CHECK(rep.mean_ssim == 1.0);
  CHECK(rep.mean_iou == 1.0);
  CHECK(rep.frames_evaluated == 4);
  CHECK(rep.frames[0].crop_region == BBox{3, 3, 37, 37});

  std::vector<Mask> none(4, Mask(48, 48));
  CHECK(evaluate_clip(gt, gt, masks, none).mean_iou == 0.0);

  std::vector<Mask> half;
  double want = 0;
  for (int i = 0; i < 4; ++i) {
    half.push_back(rect(48, 48, 10 + i, 10, 20 + i + i, 30));
    want += oracle_iou(Bytes(masks[static_cast<std::size_t>(i)].to_bytes()), Bytes(half.back().to_bytes()));
  }
  rep = evaluate_clip(gt, gt, masks, half);
  CHECK(rep.mean_iou == doctest::Approx(want / 4).epsilon(1e-15));

  auto gaps = masks;
  gaps[2] = Mask(48, 48);
  rep = evaluate_clip(gt, gt, gaps, masks);
  CHECK(rep.frames_evaluated == 3);
  CHECK_FALSE(rep.frames[2].psnr.has_value());

  // Aggregates are recomputable from the per-frame values.
  VideoClip noisy = gt;
  for (auto& f : noisy.frames) {
    for (auto& v : f.pixels()) v = static_cast<std::uint8_t>(v ^ (rng.below(2) ? 3 : 0));
  }
  rep = evaluate_clip(noisy, gt, masks, half);
  double ps = 0, ss = 0;
  for (const auto& fm : rep.frames) {
    ps += *fm.psnr;
    ss += *fm.ssim;
  }
  CHECK(rep.mean_psnr == ps / 4);
  CHECK(rep.mean_ssim == ss / 4);

  std::vector<Mask> dot(4, rect(48, 48, 0, 0, 1, 1));
  rep = evaluate_clip(noisy, gt, dot, dot, {0, std::nullopt});
  CHECK(rep.frames[0].crop_region == BBox{0, 0, 11, 11});
  CHECK(rep.frames[0].ssim.has_value());

  rep = evaluate_clip(gt, gt, masks, masks, {7, 32});
  CHECK(rep.resized_to == 32);
  CHECK(rep.mean_psnr == 99.0);

  const auto j = to_json(rep);
  CHECK(j["lpips"].is_null());
  CHECK(j["fvd"].is_null());
  CHECK(j["clip_t"].is_null());
  CHECK(j["psnr_cap_db"] == 99.0);
  CHECK(j["frames"].size() == 4);

  std::vector<Mask> three(3, masks[0]);
  CHECK_THROWS_AS(evaluate_clip(gt, gt, three, masks), Error);
}
