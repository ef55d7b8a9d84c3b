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

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "amodal/image.hpp"
#include "amodal/mask.hpp"

namespace amodal {

inline constexpr double kPsnrCapDb = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// |a AND b| / |a OR b|; 1.0 when both are empty.
double iou(const Mask& a, const Mask& b);

/// mask_bbox grown by `dilation` on every side, clamped to the image.
BBox dilated_bbox(const Mask& gt_amodal, int dilation);

/// 10 log10(255^2 / MSE) over the region, all channels; at most kPsnrCapDb.
double psnr(const Frame& pred, const Frame& gt, const BBox& region);

/// Mean single-scale SSIM over all fully contained 11x11 Gaussian windows
/// (sigma 1.5) of the region, per channel, averaged over channels.
double ssim(const Frame& pred, const Frame& gt, const BBox& region);

/// Normalized 1-D Gaussian taps used by ssim().
std::vector<double> ssim_gaussian_taps();

struct FrameMetrics {
  /// Absent for frames whose GT mask is empty. ssim is also absent when the
  /// frame is smaller than the SSIM window.
  std::optional<double> psnr;
  std::optional<double> ssim;
  std::optional<BBox> crop_region;
  double iou = 0.0;
};

struct MetricReport {
  std::vector<FrameMetrics> frames;
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;
  double mean_iou = 0.0;
  std::size_t frames_evaluated = 0;
  int dilation = 7;
  std::optional<int> resized_to;

  /// Recomputes the means from the per-frame values.
  void aggregate();
};

struct EvalOptions {
  int dilation = 7;
  /// When set, frames and masks are resized (bilinear / nearest) to this
  /// square size before cropping.
  std::optional<int> resize_to;
};

/// Per frame: crop by dilated_bbox(gt mask), widened to the SSIM window where
/// the frame allows, psnr/ssim inside the crop, iou on full masks. Only frames
/// with a non-empty GT mask enter the means.
MetricReport evaluate_clip(const VideoClip& pred, const VideoClip& gt,
                           std::span<const Mask> gt_amodal_masks, std::span<const Mask> pred_masks,
                           const EvalOptions& options = {});

/// Includes "lpips", "clip_t" and "fvd" as null so neural scores can be merged in later.
nlohmann::json to_json(const MetricReport& report);

}  // namespace amodal
