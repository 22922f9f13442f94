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

// Seven scalar quality indicators per image plus z-score trimming of the
// indicator population.

#ifndef CURATE_INDICATORS_H_
#define CURATE_INDICATORS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curate/image.h"

namespace curate {

struct TagAssignment {
  std::string tag;
  double confidence = 0.0;  // in [0,1]
};

struct ImageRecord {
  std::string id;
  std::string path;
  int width = 0;
  int height = 0;
  std::int64_t byte_size = 0;
  std::vector<TagAssignment> tags;
  std::string license;
  bool license_ok = true;
};

// Throws InvalidInput when the record breaks its invariants.
void ValidateRecord(const ImageRecord& record);

// Indicator order used for tables, trimming and binning.
enum class Indicator : int {
  kBrightness = 0,
  kColorfulness,
  kRmsContrast,
  kSharpness,
  kBitrate,
  kResolution,
  kJpegQuality,
};
inline constexpr int kNumIndicators = 7;
inline constexpr std::array<std::string_view, kNumIndicators> kIndicatorNames = {
    "brightness", "colorfulness", "rms_contrast", "sharpness",
    "bitrate",    "resolution",   "jpeg_quality"};

struct IndicatorVector {
  std::string id;
  double brightness = 0.0;
  double colorfulness = 0.0;
  double rms_contrast = 0.0;
  double sharpness = 0.0;
  double bitrate = 0.0;
  std::int64_t resolution = 0;
  std::optional<int> jpeg_quality;
  std::optional<int> cluster_id;

  // Value of one indicator; nullopt only for an unset jpeg_quality.
  std::optional<double> Get(Indicator which) const;
};

// Mean BT.601 luminance.
double Brightness(const RgbImage& image);

// Hasler-Suesstrunk colorfulness on channels scaled to [0,255].
double Colorfulness(const RgbImage& image);

// Population standard deviation of luminance.
double RmsContrast(const RgbImage& image);

// Mean of the top 10% Sobel gradient magnitudes on luminance, divided by the
// largest magnitude a [0,1] image can produce (4 * sqrt(2)). Only interior
// pixels are evaluated. Minimum side is 8.
double Sharpness(const RgbImage& image);
double Sharpness(const GrayMap& luminance);

struct FileIndicators {
  double bitrate = 0.0;
  std::int64_t resolution = 0;
  std::optional<int> jpeg_quality;
};

// Bits per pixel and pixel count come from the record; JPEG quality is
// estimated from the file's luminance quantization table. Non-JPEG bytes
// leave the quality unset. Corrupt JPEG headers throw DecodeError.
FileIndicators ComputeFileIndicators(const ImageRecord& record,
                                     std::span<const std::uint8_t> bytes);

// Nearest match of a 64-entry luminance table (natural order) against the
// IJG scaling of the standard table, minimizing the summed absolute
// difference; ties go to the lower quality.
int EstimateJpegQuality(std::span<const std::uint16_t> luma_table);

// Reads the first quantization table of a JPEG stream, natural order.
std::optional<std::array<std::uint16_t, 64>> ReadLumaQuantTable(
    std::span<const std::uint8_t> bytes);

// Pixel indicators of `pixels` combined with the file indicators.
IndicatorVector ComputeIndicators(const ImageRecord& record, const RgbImage& pixels,
                                  std::span<const std::uint8_t> file_bytes);

struct IndicatorStats {
  std::array<double, kNumIndicators> mean{};
  std::array<double, kNumIndicators> stddev{};
  std::array<std::size_t, kNumIndicators> count{};
};

struct TrimResult {
  std::vector<std::string> kept;
  std::vector<std::string> removed;
  IndicatorStats stats;
};

// Population statistics per indicator. Unset JPEG qualities are skipped.
IndicatorStats ComputeIndicatorStats(std::span<const IndicatorVector> vectors);

// Removes every vector with |z| > threshold on any indicator. Statistics
// come from the full input; a zero-std indicator trims nothing. Requires at
// least two vectors.
TrimResult ZscoreTrim(std::span<const IndicatorVector> vectors, double threshold = 3.0);

// Same rule against externally supplied statistics.
TrimResult ZscoreTrimWith(std::span<const IndicatorVector> vectors,
                          const IndicatorStats& stats, double threshold = 3.0);

}  // namespace curate

#endif  // CURATE_INDICATORS_H_
