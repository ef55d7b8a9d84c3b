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

#include "amodal/metrics.hpp"

#include <cmath>

#include "amodal/error.hpp"
#include "amodal/resample.hpp"

namespace amodal {

double iou(const Mask& a, const Mask& b) {
  if (!a.same_size(b)) throw Error(ErrorCode::dimension_mismatch, "iou: mask sizes differ");
  const std::size_t inter = intersection_area(a, b);
  const std::size_t uni = a.area() + b.area() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

BBox dilated_bbox(const Mask& gt_amodal, int dilation) {
  const auto box = mask_bbox(gt_amodal);
  if (!box) throw Error(ErrorCode::empty_mask, "dilated_bbox: mask is empty");
  if (dilation < 0) throw Error(ErrorCode::invalid_argument, "dilated_bbox: dilation must be >= 0");
  return box->expanded(dilation).clamped(gt_amodal.width(), gt_amodal.height());
}

namespace {

void require_region(const Frame& pred, const Frame& gt, const BBox& region) {
  if (!pred.same_size(gt)) throw Error(ErrorCode::dimension_mismatch, "metric: frame sizes differ");
  if (region.degenerate()) throw Error(ErrorCode::invalid_argument, "metric: empty region");
  if (region.x_min < 0 || region.y_min < 0 || region.x_max > gt.width() || region.y_max > gt.height()) {
    throw Error(ErrorCode::invalid_argument, "metric: region outside the image");
  }
}

}  // namespace

double psnr(const Frame& pred, const Frame& gt, const BBox& region) {
  require_region(pred, gt, region);
  const auto a = pred.pixels();
  const auto b = gt.pixels();
  double sum = 0.0;
  for (int y = region.y_min; y < region.y_max; ++y) {
    for (int x = region.x_min; x < region.x_max; ++x) {
      const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(gt.width()) + static_cast<std::size_t>(x)) * 3;
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = static_cast<double>(a[i + c]) - static_cast<double>(b[i + c]);
        sum += d * d;
      }
    }
  }
  const double mse = sum / (static_cast<double>(region.area()) * 3.0);
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(255.0 * 255.0 / mse));
}

std::vector<double> ssim_gaussian_taps() {
  std::vector<double> taps(kSsimWindow);
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * kSsimSigma * kSsimSigma));
    total += taps[static_cast<std::size_t>(i)];
  }
  for (auto& t : taps) t /= total;
  return taps;
}

namespace {

/// Valid-mode separable filtering of a rw x rh plane.
std::vector<double> filter_valid(const std::vector<double>& plane, int rw, int rh,
                                 const std::vector<double>& taps) {
  const int k = static_cast<int>(taps.size());
  const int ow = rw - k + 1;
  const int oh = rh - k + 1;
  std::vector<double> horiz(static_cast<std::size_t>(ow) * static_cast<std::size_t>(rh));
  for (int y = 0; y < rh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += taps[static_cast<std::size_t>(t)] * plane[static_cast<std::size_t>(y) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(x + t)];
      horiz[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int t = 0; t < k; ++t) s += taps[static_cast<std::size_t>(t)] * horiz[static_cast<std::size_t>(y + t) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)];
      out[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = s;
    }
  }
  return out;
}

}  // namespace

double ssim(const Frame& pred, const Frame& gt, const BBox& region) {
  require_region(pred, gt, region);
  const int rw = region.width();
  const int rh = region.height();
  if (rw < kSsimWindow || rh < kSsimWindow) {
    throw Error(ErrorCode::invalid_argument, "ssim: region smaller than 11x11");
  }
  constexpr double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  const auto taps = ssim_gaussian_taps();
  const std::size_t n = static_cast<std::size_t>(rw) * static_cast<std::size_t>(rh);
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  double total = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    for (int ry = 0; ry < rh; ++ry) {
      for (int rx = 0; rx < rw; ++rx) {
        const std::size_t src = (static_cast<std::size_t>(region.y_min + ry) * static_cast<std::size_t>(gt.width()) +
                                 static_cast<std::size_t>(region.x_min + rx)) * 3 + c;
        const std::size_t i = static_cast<std::size_t>(ry) * static_cast<std::size_t>(rw) + static_cast<std::size_t>(rx);
        x[i] = pred.pixels()[src];
        y[i] = gt.pixels()[src];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
    }
    const auto mu_x = filter_valid(x, rw, rh, taps);
    const auto mu_y = filter_valid(y, rw, rh, taps);
    const auto e_xx = filter_valid(xx, rw, rh, taps);
    const auto e_yy = filter_valid(yy, rw, rh, taps);
    const auto e_xy = filter_valid(xy, rw, rh, taps);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_x.size(); ++i) {
      const double mx = mu_x[i];
      const double my = mu_y[i];
      const double vx = e_xx[i] - mx * mx;
      const double vy = e_yy[i] - my * my;
      const double cov = e_xy[i] - mx * my;
      sum += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
    }
    total += sum / static_cast<double>(mu_x.size());
  }
  return total / 3.0;
}

void MetricReport::aggregate() {
  double p = 0.0;
  double s = 0.0;
  double u = 0.0;
  std::size_t n = 0;
  std::size_t ns = 0;
  for (const auto& f : frames) {
    if (!f.psnr) continue;
    p += *f.psnr;
    u += f.iou;
    ++n;
    if (f.ssim) {
      s += *f.ssim;
      ++ns;
    }
  }
  frames_evaluated = n;
  mean_psnr = n ? p / static_cast<double>(n) : 0.0;
  mean_ssim = ns ? s / static_cast<double>(ns) : 0.0;
  mean_iou = n ? u / static_cast<double>(n) : 0.0;
}

namespace {

/// Widens each side of the crop to the SSIM window where the frame allows.
BBox at_least_window(BBox b, int width, int height) {
  auto grow = [](int& lo, int& hi, int limit) {
    const int need = kSsimWindow - (hi - lo);
    if (need <= 0 || limit < kSsimWindow) return;
    lo -= need / 2;
    hi += need - need / 2;
    if (lo < 0) {
      hi -= lo;
      lo = 0;
    }
    if (hi > limit) {
      lo -= hi - limit;
      hi = limit;
    }
  };
  grow(b.x_min, b.x_max, width);
  grow(b.y_min, b.y_max, height);
  return b;
}

}  // namespace

MetricReport evaluate_clip(const VideoClip& pred, const VideoClip& gt,
                           std::span<const Mask> gt_amodal_masks, std::span<const Mask> pred_masks,
                           const EvalOptions& options) {
  pred.validate();
  gt.validate();
  if (pred.size() != gt.size() || gt_amodal_masks.size() != gt.size() || pred_masks.size() != gt.size()) {
    throw Error(ErrorCode::dimension_mismatch, "evaluate_clip: clip and mask counts differ");
  }
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw Error(ErrorCode::dimension_mismatch, "evaluate_clip: clip sizes differ");
  }
  MetricReport report;
  report.dilation = options.dilation;
  report.resized_to = options.resize_to;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    Frame p = pred.frames[i];
    Frame g = gt.frames[i];
    Mask gm = gt_amodal_masks[i];
    Mask pm = pred_masks[i];
    if (options.resize_to) {
      const int s = *options.resize_to;
      p = resize_bilinear(p, s, s);
      g = resize_bilinear(g, s, s);
      gm = resize_nearest(gm, s, s);
      pm = resize_nearest(pm, s, s);
    }
    FrameMetrics fm;
    fm.iou = iou(gm, pm);
    if (!gm.empty()) {
      const BBox crop = at_least_window(dilated_bbox(gm, options.dilation), g.width(), g.height());
      fm.crop_region = crop;
      fm.psnr = psnr(p, g, crop);
      if (crop.width() >= kSsimWindow && crop.height() >= kSsimWindow) fm.ssim = ssim(p, g, crop);
    }
    report.frames.push_back(fm);
  }
  report.aggregate();
  return report;
}

nlohmann::json to_json(const MetricReport& report) {
  using nlohmann::json;
  json frames = json::array();
  for (const auto& f : report.frames) {
    json crop = nullptr;
    if (f.crop_region) {
      crop = json::array({f.crop_region->x_min, f.crop_region->y_min, f.crop_region->x_max, f.crop_region->y_max});
    }
    frames.push_back(json{{"psnr", f.psnr ? json(*f.psnr) : json(nullptr)},
                          {"ssim", f.ssim ? json(*f.ssim) : json(nullptr)},
                          {"iou", f.iou},
                          {"crop_region", crop}});
  }
  return json{{"frames", frames},
              {"mean_psnr", report.mean_psnr},
              {"mean_ssim", report.mean_ssim},
              {"mean_iou", report.mean_iou},
              {"frames_evaluated", report.frames_evaluated},
              {"dilation", report.dilation},
              {"resized_to", report.resized_to ? json(*report.resized_to) : json(nullptr)},
              {"psnr_cap_db", kPsnrCapDb},
              {"lpips", nullptr},
              {"clip_t", nullptr},
              {"fvd", nullptr}};
}

}  // namespace amodal
