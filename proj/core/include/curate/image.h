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

// Pixel containers and the handful of raster operations shared by the
// indicator and cropping code: decode/encode, luminance, bilinear and area
// resampling, separable Gaussian blur.

#ifndef CURATE_IMAGE_H_
#define CURATE_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace curate {

// Row-major 2-D grid.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  bool empty() const { return data.empty(); }
  std::size_t size() const { return data.size(); }

  T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

struct Rgb {
  float r = 0.f;
  float g = 0.f;
  float b = 0.f;
};

// Channels in [0,1]. Decoded files hold exact multiples of 1/255.
using RgbImage = Grid<Rgb>;
using GrayMap = Grid<double>;

enum class FileFormat { kJpeg, kPng, kUnknown };

FileFormat SniffFormat(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);

// Decodes JPEG or PNG to 8-bit RGB. Grayscale sources are expanded to three
// equal channels. Throws DecodeError.
RgbImage DecodeImage(std::span<const std::uint8_t> bytes);
RgbImage LoadImage(const std::filesystem::path& path);

std::vector<std::uint8_t> EncodeJpeg(const RgbImage& image, int quality);
std::vector<std::uint8_t> EncodePng(const RgbImage& image);
void WriteFileAtomically(const std::filesystem::path& path,
                         std::span<const std::uint8_t> bytes);
void WriteFileAtomically(const std::filesystem::path& path, const std::string& text);

// Luminance 0.299 R + 0.587 G + 0.114 B.
double Luma(const Rgb& p);
GrayMap Luminance(const RgbImage& image);

// Bilinear resampling with pixel-centre alignment and clamped borders.
RgbImage ResizeBilinear(const RgbImage& image, int width, int height);
GrayMap ResizeBilinear(const GrayMap& map, int width, int height);

// Box-filter (area) downsampling; every source pixel contributes with its
// overlap fraction. Requires width <= source width and height <= source
// height.
GrayMap ResizeArea(const GrayMap& map, int width, int height);

// Separable Gaussian with a 3-sigma radius and mirrored borders.
GrayMap GaussianBlur(const GrayMap& map, double sigma);
RgbImage GaussianBlur(const RgbImage& image, double sigma);

RgbImage CropImage(const RgbImage& image, int x, int y, int width, int height);

}  // namespace curate

#endif  // CURATE_IMAGE_H_
