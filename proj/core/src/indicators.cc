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

#include "curate/indicators.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "curate/errors.h"

namespace curate {

namespace {

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
};

// Two-pass population moments. A constant sequence reports exactly zero
// spread.
template <typename Fn>
Moments PopulationMoments(std::size_t n, Fn value) {
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = value(i);
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Moments m;
  m.mean = sum / static_cast<double>(n);
  if (lo == hi) {
    m.mean = lo;
    return m;
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = value(i) - m.mean;
    sq += d * d;
  }
  m.stddev = std::sqrt(sq / static_cast<double>(n));
  return m;
}

void RequireNonEmpty(const RgbImage& image) {
  if (image.empty() || image.width < 1 || image.height < 1) {
    throw InvalidInput("indicator on empty image");
  }
}

// Annex K luminance table, natural (row-major) order.
constexpr std::array<int, 64> kStdLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

// Zigzag position -> natural index.
constexpr std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

}  // namespace

void ValidateRecord(const ImageRecord& record) {
  if (record.id.empty()) throw InvalidInput("record with empty id");
  if (record.width < 1 || record.height < 1) {
    throw InvalidInput("record " + record.id + ": non-positive dimensions");
  }
  if (record.byte_size < 1) throw InvalidInput("record " + record.id + ": byte_size < 1");
  for (const auto& t : record.tags) {
    if (t.tag.empty()) throw InvalidInput("record " + record.id + ": empty tag");
    if (!(t.confidence >= 0.0 && t.confidence <= 1.0)) {
      throw InvalidInput("record " + record.id + ": tag confidence outside [0,1]");
    }
  }
}

std::optional<double> IndicatorVector::Get(Indicator which) const {
  switch (which) {
    case Indicator::kBrightness:
      return brightness;
    case Indicator::kColorfulness:
      return colorfulness;
    case Indicator::kRmsContrast:
      return rms_contrast;
    case Indicator::kSharpness:
      return sharpness;
    case Indicator::kBitrate:
      return bitrate;
    case Indicator::kResolution:
      return static_cast<double>(resolution);
    case Indicator::kJpegQuality:
      if (jpeg_quality) return static_cast<double>(*jpeg_quality);
      return std::nullopt;
  }
  return std::nullopt;
}

double Brightness(const RgbImage& image) {
  RequireNonEmpty(image);
  return PopulationMoments(image.size(), [&](std::size_t i) { return Luma(image.data[i]); })
      .mean;
}

double Colorfulness(const RgbImage& image) {
  RequireNonEmpty(image);
  const auto rg = PopulationMoments(image.size(), [&](std::size_t i) {
    const Rgb& p = image.data[i];
    return 255.0 * p.r - 255.0 * p.g;
  });
  const auto yb = PopulationMoments(image.size(), [&](std::size_t i) {
    const Rgb& p = image.data[i];
    return 0.5 * (255.0 * p.r + 255.0 * p.g) - 255.0 * p.b;
  });
  return std::sqrt(rg.stddev * rg.stddev + yb.stddev * yb.stddev) +
         0.3 * std::sqrt(rg.mean * rg.mean + yb.mean * yb.mean);
}

double RmsContrast(const RgbImage& image) {
  RequireNonEmpty(image);
  return PopulationMoments(image.size(), [&](std::size_t i) { return Luma(image.data[i]); })
      .stddev;
}

double Sharpness(const GrayMap& lum) {
  if (lum.width < 8 || lum.height < 8) {
    throw InvalidInput("sharpness needs an image of at least 8x8");
  }
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(lum.width - 2) * (lum.height - 2));
  for (int y = 1; y < lum.height - 1; ++y) {
    for (int x = 1; x < lum.width - 1; ++x) {
      const double gx = (lum.at(x + 1, y - 1) + 2 * lum.at(x + 1, y) + lum.at(x + 1, y + 1)) -
                        (lum.at(x - 1, y - 1) + 2 * lum.at(x - 1, y) + lum.at(x - 1, y + 1));
      const double gy = (lum.at(x - 1, y + 1) + 2 * lum.at(x, y + 1) + lum.at(x + 1, y + 1)) -
                        (lum.at(x - 1, y - 1) + 2 * lum.at(x, y - 1) + lum.at(x + 1, y - 1));
      mags.push_back(std::sqrt(gx * gx + gy * gy));
    }
  }
  const std::size_t top = std::max<std::size_t>(1, mags.size() / 10);
  // Exact top-k sum in scan order: everything above the k-th largest value,
  // then as many copies of that value as are still needed.
  std::vector<double> scratch = mags;
  std::nth_element(scratch.begin(), scratch.begin() + (top - 1), scratch.end(), std::greater<>());
  const double kth = scratch[top - 1];
  double sum = 0.0;
  std::size_t taken = 0;
  for (double m : mags) {
    if (m > kth) {
      sum += m;
      ++taken;
    }
  }
  sum += static_cast<double>(top - taken) * kth;
  return sum / static_cast<double>(top) / (4.0 * std::sqrt(2.0));
}

double Sharpness(const RgbImage& image) {
  RequireNonEmpty(image);
  return Sharpness(Luminance(image));
}

std::optional<std::array<std::uint16_t, 64>> ReadLumaQuantTable(
    std::span<const std::uint8_t> bytes) {
  if (SniffFormat(bytes) != FileFormat::kJpeg) return std::nullopt;
  std::size_t pos = 2;
  std::optional<std::array<std::uint16_t, 64>> first;
  while (pos + 4 <= bytes.size()) {
    if (bytes[pos] != 0xFF) throw DecodeError("jpeg: marker expected");
    const std::uint8_t marker = bytes[pos + 1];
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    if (marker == 0xD9 || marker == 0xDA) break;  // EOI / SOS
    const std::size_t len = (static_cast<std::size_t>(bytes[pos + 2]) << 8) | bytes[pos + 3];
    if (len < 2 || pos + 2 + len > bytes.size()) throw DecodeError("jpeg: truncated segment");
    if (marker == 0xDB) {
      std::size_t p = pos + 4;
      const std::size_t end = pos + 2 + len;
      while (p < end) {
        const int precision = bytes[p] >> 4;
        const int table_id = bytes[p] & 0x0F;
        ++p;
        const std::size_t need = precision ? 128 : 64;
        if (p + need > end) throw DecodeError("jpeg: truncated quantization table");
        std::array<std::uint16_t, 64> table{};
        for (int i = 0; i < 64; ++i) {
          const std::uint16_t v =
              precision ? static_cast<std::uint16_t>((bytes[p + 2 * i] << 8) | bytes[p + 2 * i + 1])
                        : bytes[p + i];
          table[kZigzag[i]] = v;
        }
        p += need;
        if (table_id == 0) return table;
        if (!first) first = table;
      }
    }
    pos += 2 + len;
  }
  if (first) return first;
  throw DecodeError("jpeg: no quantization table");
}

int EstimateJpegQuality(std::span<const std::uint16_t> luma_table) {
  if (luma_table.size() != 64) throw InvalidInput("quantization table must have 64 entries");
  const bool baseline = *std::max_element(luma_table.begin(), luma_table.end()) <= 255;
  const long cap = baseline ? 255 : 32767;
  int best_quality = 1;
  long best_dist = std::numeric_limits<long>::max();
  for (int q = 1; q <= 100; ++q) {
    const long scale = q < 50 ? 5000 / q : 200 - 2 * q;
    long dist = 0;
    for (int i = 0; i < 64; ++i) {
      const long v = std::clamp((kStdLumaTable[i] * scale + 50) / 100, 1L, cap);
      dist += std::labs(v - static_cast<long>(luma_table[i]));
    }
    if (dist < best_dist) {  // strict: ties keep the lower quality
      best_dist = dist;
      best_quality = q;
    }
  }
  return best_quality;
}

FileIndicators ComputeFileIndicators(const ImageRecord& record,
                                     std::span<const std::uint8_t> bytes) {
  ValidateRecord(record);
  FileIndicators out;
  out.resolution = static_cast<std::int64_t>(record.width) * record.height;
  out.bitrate = static_cast<double>(record.byte_size) * 8.0 / static_cast<double>(out.resolution);
  if (auto table = ReadLumaQuantTable(bytes)) {
    out.jpeg_quality = EstimateJpegQuality(*table);
  }
  return out;
}

IndicatorVector ComputeIndicators(const ImageRecord& record, const RgbImage& pixels,
                                  std::span<const std::uint8_t> file_bytes) {
  IndicatorVector v;
  v.id = record.id;
  const GrayMap lum = Luminance(pixels);
  v.brightness = Brightness(pixels);
  v.colorfulness = Colorfulness(pixels);
  v.rms_contrast = RmsContrast(pixels);
  v.sharpness = Sharpness(lum);
  const auto file = ComputeFileIndicators(record, file_bytes);
  v.bitrate = file.bitrate;
  v.resolution = file.resolution;
  v.jpeg_quality = file.jpeg_quality;
  return v;
}

IndicatorStats ComputeIndicatorStats(std::span<const IndicatorVector> vectors) {
  IndicatorStats stats;
  for (int k = 0; k < kNumIndicators; ++k) {
    std::vector<double> values;
    values.reserve(vectors.size());
    for (const auto& v : vectors) {
      if (auto x = v.Get(static_cast<Indicator>(k))) values.push_back(*x);
    }
    stats.count[k] = values.size();
    if (values.empty()) continue;
    const auto m = PopulationMoments(values.size(), [&](std::size_t i) { return values[i]; });
    stats.mean[k] = m.mean;
    stats.stddev[k] = m.stddev;
  }
  return stats;
}

TrimResult ZscoreTrimWith(std::span<const IndicatorVector> vectors,
                          const IndicatorStats& stats, double threshold) {
  TrimResult result;
  result.stats = stats;
  for (const auto& v : vectors) {
    bool outlier = false;
    for (int k = 0; k < kNumIndicators && !outlier; ++k) {
      if (stats.stddev[k] <= 0.0) continue;
      const auto x = v.Get(static_cast<Indicator>(k));
      if (!x) continue;
      const double z = (*x - stats.mean[k]) / stats.stddev[k];
      if (!std::isfinite(*x) || std::abs(z) > threshold) outlier = true;
    }
    (outlier ? result.removed : result.kept).push_back(v.id);
  }
  return result;
}

TrimResult ZscoreTrim(std::span<const IndicatorVector> vectors, double threshold) {
  if (vectors.size() < 2) throw InvalidInput("z-score trimming needs at least 2 vectors");
  return ZscoreTrimWith(vectors, ComputeIndicatorStats(vectors), threshold);
}

}  // namespace curate
