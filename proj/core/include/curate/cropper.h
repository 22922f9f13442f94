// Copyright 2026 The Curate Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Importance-driven cropping to a fixed output size.
//
// The source is scaled so it just covers the target, an importance map is
// built from spectral-residual saliency, optional face boxes and a centre
// prior, and the crop window with the best border-penalized response is
// cut out.

#ifndef CURATE_CROPPER_H_
#define CURATE_CROPPER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "curate/image.h"

namespace curate {

inline constexpr int kCropWidth = 1024;
inline constexpr int kCropHeight = 768;
inline constexpr int kCropBorder = 10;

struct FaceBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

struct Size {
  int width = 0;
  int height = 0;
};

// Output size for a uniform scale of max(tw / w, th / h), each side rounded
// and never below the target. Throws InvalidInput when the scale exceeds 1
// and upscaling is not allowed.
Size ResizeDims(int width, int height, int target_width, int target_height,
                bool allow_upscale = false);

RgbImage ResizeForCrop(const RgbImage& image, int target_width = kCropWidth,
                       int target_height = kCropHeight, bool allow_upscale = false);

struct SaliencyOptions {
  int working_width = 64;
  double blur_sigma = 2.5;  // in working-resolution pixels
};

// Spectral residual saliency of the luminance, returned at full resolution
// and scaled so the maximum is 1. Constant images give an all-zero map.
// Minimum side is 16.
GrayMap SpectralResidualSaliency(const GrayMap& luminance, const SaliencyOptions& options = {});
GrayMap SpectralResidualSaliency(const RgbImage& image, const SaliencyOptions& options = {});

struct ImportanceWeights {
  double saliency = 1.0;
  double face = 2.0;
  double center = 0.5;
};

struct ImportanceMap {
  GrayMap combined;  // in [0,1]
  GrayMap saliency;
  GrayMap face;
  GrayMap center;
  std::vector<std::string> warnings;
};

// Isotropic Gaussian on the pixel centres, sigma a quarter of the diagonal,
// scaled to a maximum of 1.
GrayMap CenterPrior(int width, int height);

// Weighted sum of the max-normalized components, then max-normalized again.
// Face boxes are filled with 1 after clipping to the map; clipped boxes add
// a warning. Weights must be non-negative and not all zero.
ImportanceMap CombineImportance(const GrayMap& saliency, std::span<const FaceBox> faces,
                                const ImportanceWeights& weights = {});

// Importance on the fixed-point grid used for scoring: round(v * 2^16).
inline constexpr double kImportanceScale = 65536.0;
Grid<std::int64_t> QuantizeImportance(const GrayMap& importance);

struct CropResult {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  std::int64_t response = 0;  // fixed-point kernel response
  double score = 0.0;         // response / 2^16
};

// Kernel response of the window at (x, y): sum over the interior minus sum
// over the border ring, on the quantized map.
std::int64_t KernelResponse(const Grid<std::int64_t>& quantized, int x, int y, int width,
                            int height, int border);

// Exhaustive argmax of the kernel response over every origin, computed with
// integral images. Ties: smallest squared distance between crop centre and
// image centre, then smallest y, then smallest x.
CropResult BestCrop(const Grid<std::int64_t>& quantized, int width = kCropWidth,
                    int height = kCropHeight, int border = kCropBorder);
CropResult BestCrop(const GrayMap& importance, int width = kCropWidth,
                    int height = kCropHeight, int border = kCropBorder);

struct SmartCropOptions {
  int width = kCropWidth;
  int height = kCropHeight;
  int border = kCropBorder;
  bool allow_upscale = false;
  ImportanceWeights weights;
  SaliencyOptions saliency;
};

struct SmartCropResult {
  RgbImage image;
  Size resized;
  double scale = 1.0;
  CropResult crop;  // in resized coordinates
  std::vector<std::string> warnings;
};

// Full chain: resize, saliency, combination, crop. Face boxes are given in
// source coordinates.
SmartCropResult SmartCrop(const RgbImage& source, std::span<const FaceBox> faces,
                          const SmartCropOptions& options = {});

}  // namespace curate

#endif  // CURATE_CROPPER_H_
