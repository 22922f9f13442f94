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

#include "curate/cropper.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>

#include "curate/errors.h"

namespace curate {

namespace {

// In-place 2-D complex transform of a row-major buffer. Plans are cached per
// shape and direction; planning is not thread-safe, execution is.
void Fft2d(std::vector<std::complex<double>>& buf, int width, int height, int sign) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  auto* data = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(mutex);
    fftw_plan& slot = plans[{width, height, sign}];
    if (slot == nullptr) {
      std::vector<std::complex<double>> scratch(buf.size());
      auto* s = reinterpret_cast<fftw_complex*>(scratch.data());
      slot = fftw_plan_dft_2d(height, width, s, s, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    plan = slot;
  }
  fftw_execute_dft(plan, data, data);
}

void NormalizeByMax(GrayMap& map) {
  double hi = 0.0;
  for (double v : map.data) hi = std::max(hi, v);
  if (hi <= 0.0) {
    std::fill(map.data.begin(), map.data.end(), 0.0);
    return;
  }
  for (double& v : map.data) v /= hi;
}

}  // namespace

Size ResizeDims(int width, int height, int target_width, int target_height,
                bool allow_upscale) {
  if (width < 1 || height < 1 || target_width < 1 || target_height < 1) {
    throw InvalidInput("resize dimensions must be positive");
  }
  const double scale = std::max(static_cast<double>(target_width) / width,
                                static_cast<double>(target_height) / height);
  if (scale > 1.0 && !allow_upscale) {
    throw InvalidInput("source " + std::to_string(width) + "x" + std::to_string(height) +
                       " would need upscaling to cover " + std::to_string(target_width) +
                       "x" + std::to_string(target_height));
  }
  Size out;
  out.width = std::max(target_width, static_cast<int>(std::lround(width * scale)));
  out.height = std::max(target_height, static_cast<int>(std::lround(height * scale)));
  return out;
}

RgbImage ResizeForCrop(const RgbImage& image, int target_width, int target_height,
                       bool allow_upscale) {
  const Size s = ResizeDims(image.width, image.height, target_width, target_height,
                            allow_upscale);
  if (s.width == image.width && s.height == image.height) return image;
  return ResizeBilinear(image, s.width, s.height);
}

GrayMap SpectralResidualSaliency(const GrayMap& luminance, const SaliencyOptions& options) {
  if (std::min(luminance.width, luminance.height) < 16) {
    throw InvalidInput("saliency needs a minimum side of 16");
  }
  const auto [lo, hi] = std::minmax_element(luminance.data.begin(), luminance.data.end());
  if (*lo == *hi) return GrayMap(luminance.width, luminance.height, 0.0);

  const int ww = std::min(options.working_width, luminance.width);
  const int wh = std::clamp(
      static_cast<int>(std::lround(static_cast<double>(luminance.height) * ww / luminance.width)),
      1, luminance.height);
  const GrayMap small = ResizeArea(luminance, ww, wh);

  std::vector<std::complex<double>> spec(small.data.begin(), small.data.end());
  Fft2d(spec, ww, wh, FFTW_FORWARD);

  GrayMap log_amp(ww, wh);
  for (std::size_t i = 0; i < spec.size(); ++i) log_amp.data[i] = std::log1p(std::abs(spec[i]));
  // 3x3 mean with wrap-around; the spectrum is periodic.
  GrayMap residual(ww, wh);
  for (int y = 0; y < wh; ++y) {
    for (int x = 0; x < ww; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          s += log_amp.at((x + dx + ww) % ww, (y + dy + wh) % wh);
        }
      }
      residual.at(x, y) = log_amp.at(x, y) - s / 9.0;
    }
  }
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double phase = std::arg(spec[i]);
    spec[i] = std::polar(std::exp(residual.data[i]), phase);
  }
  Fft2d(spec, ww, wh, FFTW_BACKWARD);

  GrayMap sal(ww, wh);
  for (std::size_t i = 0; i < spec.size(); ++i) sal.data[i] = std::norm(spec[i]);
  if (options.blur_sigma > 0.0) sal = GaussianBlur(sal, options.blur_sigma);
  GrayMap full = ResizeBilinear(sal, luminance.width, luminance.height);
  for (double& v : full.data) v = std::max(v, 0.0);
  NormalizeByMax(full);
  return full;
}

GrayMap SpectralResidualSaliency(const RgbImage& image, const SaliencyOptions& options) {
  return SpectralResidualSaliency(Luminance(image), options);
}

GrayMap CenterPrior(int width, int height) {
  GrayMap map(width, height);
  const double sigma = std::hypot(width, height) / 4.0;
  // Separable: exp(-(dx^2 + dy^2) / 2s^2) = gx(x) * gy(y).
  auto axis = [sigma](int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
      const double d = i + 0.5 - n / 2.0;
      g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    return g;
  };
  const auto gx = axis(width);
  const auto gy = axis(height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) map.at(x, y) = gx[x] * gy[y];
  }
  NormalizeByMax(map);
  return map;
}

ImportanceMap CombineImportance(const GrayMap& saliency, std::span<const FaceBox> faces,
                                const ImportanceWeights& weights) {
  if (weights.saliency < 0 || weights.face < 0 || weights.center < 0) {
    throw InvalidInput("importance weights must be non-negative");
  }
  if (weights.saliency + weights.face + weights.center <= 0) {
    throw InvalidInput("importance weights must not all be zero");
  }
  const int w = saliency.width;
  const int h = saliency.height;
  ImportanceMap out;
  out.saliency = saliency;
  for (double v : out.saliency.data) {
    if (!std::isfinite(v) || v < 0) throw InvalidInput("saliency must be finite and >= 0");
  }
  NormalizeByMax(out.saliency);

  out.face = GrayMap(w, h, 0.0);
  for (const FaceBox& f : faces) {
    const int x0 = std::max(0, f.x);
    const int y0 = std::max(0, f.y);
    const int x1 = std::min(w, f.x + f.width);
    const int y1 = std::min(h, f.y + f.height);
    if (x0 != f.x || y0 != f.y || x1 != f.x + f.width || y1 != f.y + f.height) {
      out.warnings.push_back("face box " + std::to_string(f.x) + "," + std::to_string(f.y) +
                             "," + std::to_string(f.width) + "," + std::to_string(f.height) +
                             " clipped to the image");
    }
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) out.face.at(x, y) = 1.0;
    }
  }
  out.center = CenterPrior(w, h);

  out.combined = GrayMap(w, h, 0.0);
  for (std::size_t i = 0; i < out.combined.size(); ++i) {
    out.combined.data[i] = weights.saliency * out.saliency.data[i] +
                           weights.face * out.face.data[i] +
                           weights.center * out.center.data[i];
  }
  NormalizeByMax(out.combined);
  return out;
}

Grid<std::int64_t> QuantizeImportance(const GrayMap& importance) {
  Grid<std::int64_t> q(importance.width, importance.height);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double v = importance.data[i];
    if (!std::isfinite(v) || v < 0) throw InvalidInput("importance must be finite and >= 0");
    q.data[i] = std::llround(v * kImportanceScale);
  }
  return q;
}

std::int64_t KernelResponse(const Grid<std::int64_t>& quantized, int x, int y, int width,
                            int height, int border) {
  if (x < 0 || y < 0 || x + width > quantized.width || y + height > quantized.height) {
    throw InvalidInput("crop window outside the map");
  }
  std::int64_t response = 0;
  for (int yy = y; yy < y + height; ++yy) {
    for (int xx = x; xx < x + width; ++xx) {
      const bool interior = xx >= x + border && xx < x + width - border &&
                            yy >= y + border && yy < y + height - border;
      response += interior ? quantized.at(xx, yy) : -quantized.at(xx, yy);
    }
  }
  return response;
}

CropResult BestCrop(const Grid<std::int64_t>& q, int width, int height, int border) {
  if (width < 1 || height < 1 || border < 0) throw InvalidInput("invalid crop geometry");
  if (q.width < width || q.height < height) {
    throw InvalidInput("image " + std::to_string(q.width) + "x" + std::to_string(q.height) +
                       " is smaller than the crop");
  }
  const int W = q.width;
  const int H = q.height;
  const std::size_t stride = static_cast<std::size_t>(W) + 1;
  std::vector<std::int64_t> integral(stride * (H + 1), 0);
  for (int y = 0; y < H; ++y) {
    std::int64_t row = 0;
    for (int x = 0; x < W; ++x) {
      row += q.at(x, y);
      integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
    }
  }
  auto rect = [&](int x0, int y0, int x1, int y1) {  // [x0,x1) x [y0,y1)
    if (x1 <= x0 || y1 <= y0) return std::int64_t{0};
    return integral[y1 * stride + x1] - integral[y0 * stride + x1] -
           integral[y1 * stride + x0] + integral[y0 * stride + x0];
  };

  CropResult best;
  best.width = width;
  best.height = height;
  std::int64_t best_dist = std::numeric_limits<std::int64_t>::max();
  bool have = false;
  for (int y = 0; y + height <= H; ++y) {
    for (int x = 0; x + width <= W; ++x) {
      const std::int64_t full = rect(x, y, x + width, y + height);
      const std::int64_t inner =
          rect(x + border, y + border, x + width - border, y + height - border);
      const std::int64_t r = 2 * inner - full;
      const std::int64_t dx = 2 * static_cast<std::int64_t>(x) + width - W;
      const std::int64_t dy = 2 * static_cast<std::int64_t>(y) + height - H;
      const std::int64_t dist = dx * dx + dy * dy;
      // Scan order is (y, x) ascending, so strict comparisons keep the
      // lexicographic tie-break.
      if (!have || r > best.response || (r == best.response && dist < best_dist)) {
        best.x = x;
        best.y = y;
        best.response = r;
        best_dist = dist;
        have = true;
      }
    }
  }
  best.score = static_cast<double>(best.response) / kImportanceScale;
  return best;
}

CropResult BestCrop(const GrayMap& importance, int width, int height, int border) {
  return BestCrop(QuantizeImportance(importance), width, height, border);
}

SmartCropResult SmartCrop(const RgbImage& source, std::span<const FaceBox> faces,
                          const SmartCropOptions& options) {
  SmartCropResult out;
  out.resized = ResizeDims(source.width, source.height, options.width, options.height,
                           options.allow_upscale);
  out.scale = std::max(static_cast<double>(options.width) / source.width,
                       static_cast<double>(options.height) / source.height);
  const RgbImage resized = ResizeForCrop(source, options.width, options.height,
                                         options.allow_upscale);
  std::vector<FaceBox> scaled;
  for (const FaceBox& f : faces) {
    const int x0 = static_cast<int>(std::floor(f.x * out.scale));
    const int y0 = static_cast<int>(std::floor(f.y * out.scale));
    const int x1 = static_cast<int>(std::ceil((f.x + f.width) * out.scale));
    const int y1 = static_cast<int>(std::ceil((f.y + f.height) * out.scale));
    scaled.push_back({x0, y0, x1 - x0, y1 - y0});
  }
  const GrayMap saliency = SpectralResidualSaliency(resized, options.saliency);
  ImportanceMap importance = CombineImportance(saliency, scaled, options.weights);
  out.warnings = std::move(importance.warnings);
  out.crop = BestCrop(importance.combined, options.width, options.height, options.border);
  out.image = CropImage(resized, out.crop.x, out.crop.y, options.width, options.height);
  return out;
}

}  // namespace curate
