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

#include "curate/image.h"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

// jpeglib.h needs size_t and FILE declared first.
#include <jpeglib.h>

#include "curate/errors.h"

namespace curate {

namespace {

struct JpegErrorManager {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void JpegErrorExit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void JpegSilence(j_common_ptr, int) {}

constexpr float kInv255 = 1.0f / 255.0f;

RgbImage DecodeJpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = JpegErrorExit;
  jerr.pub.emit_message = JpegSilence;
  // Only trivially destructible state lives between setjmp and longjmp; the
  // output buffer is a raw allocation released on both paths.
  std::uint8_t* volatile buffer = nullptr;
  int width = 0;
  int height = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::free(buffer);
    throw DecodeError(std::string("jpeg: ") + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  const std::size_t stride = static_cast<std::size_t>(width) * 3;
  buffer = static_cast<std::uint8_t*>(std::malloc(stride * height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(buffer) + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  RgbImage image(width, height);
  for (std::size_t i = 0; i < image.size(); ++i) {
    image.data[i] = {buffer[3 * i] * kInv255, buffer[3 * i + 1] * kInv255,
                     buffer[3 * i + 2] * kInv255};
  }
  std::free(buffer);
  return image;
}

RgbImage DecodePng(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw DecodeError(std::string("png: ") + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw DecodeError(std::string("png: ") + png.message);
  }
  RgbImage image(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < image.size(); ++i) {
    image.data[i] = {buffer[3 * i] * kInv255, buffer[3 * i + 1] * kInv255,
                     buffer[3 * i + 2] * kInv255};
  }
  return image;
}

std::uint8_t ToByte(float v) {
  const float s = v * 255.0f;
  if (!(s > 0.0f)) return 0;
  if (s >= 255.0f) return 255;
  return static_cast<std::uint8_t>(s + 0.5f);
}

std::vector<std::uint8_t> ToBytes(const RgbImage& image) {
  std::vector<std::uint8_t> out(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[3 * i] = ToByte(image.data[i].r);
    out[3 * i + 1] = ToByte(image.data[i].g);
    out[3 * i + 2] = ToByte(image.data[i].b);
  }
  return out;
}

int Mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> GaussianKernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Bilinear sample positions for one axis.
struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> BilinearTaps(int src, int dst) {
  std::vector<Tap> taps(dst);
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    double s = (i + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int lo = static_cast<int>(std::floor(s));
    const int hi = std::min(lo + 1, src - 1);
    taps[i] = {lo, hi, s - lo};
  }
  return taps;
}

template <typename T, typename Lerp>
Grid<T> ResizeBilinearImpl(const Grid<T>& src, int width, int height, Lerp lerp) {
  if (src.empty() || width < 1 || height < 1) {
    throw InvalidInput("resize: empty source or non-positive target");
  }
  const auto xs = BilinearTaps(src.width, width);
  const auto ys = BilinearTaps(src.height, height);
  Grid<T> out(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap& ty = ys[y];
    for (int x = 0; x < width; ++x) {
      const Tap& tx = xs[x];
      const T top = lerp(src.at(tx.lo, ty.lo), src.at(tx.hi, ty.lo), tx.frac);
      const T bot = lerp(src.at(tx.lo, ty.hi), src.at(tx.hi, ty.hi), tx.frac);
      out.at(x, y) = lerp(top, bot, ty.frac);
    }
  }
  return out;
}

}  // namespace

FileFormat SniffFormat(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return FileFormat::kJpeg;
  }
  static constexpr std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::equal(kPngMagic, kPngMagic + 8, bytes.begin())) {
    return FileFormat::kPng;
  }
  return FileFormat::kUnknown;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RgbImage DecodeImage(std::span<const std::uint8_t> bytes) {
  switch (SniffFormat(bytes)) {
    case FileFormat::kJpeg:
      return DecodeJpeg(bytes);
    case FileFormat::kPng:
      return DecodePng(bytes);
    case FileFormat::kUnknown:
      break;
  }
  throw DecodeError("unrecognized image format");
}

RgbImage LoadImage(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeImage(bytes);
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> EncodeJpeg(const RgbImage& image, int quality) {
  if (image.empty()) throw InvalidInput("encode: empty image");
  const auto pixels = ToBytes(image);
  jpeg_compress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = JpegErrorExit;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(out);
    throw DecodeError(std::string("jpeg encode: ") + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, std::clamp(quality, 1, 100), TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<std::uint8_t*>(pixels.data()) + stride * cinfo.next_scanline;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<std::uint8_t> result(out, out + out_size);
  std::free(out);
  return result;
}

namespace {

void PngAppend(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void PngError(png_structp png, png_const_charp message) {
  *static_cast<std::string*>(png_get_error_ptr(png)) = message;
  png_longjmp(png, 1);
}

void PngWarning(png_structp, png_const_charp) {}

}  // namespace

// Low-level writer so the deflate level can be set; fast compression keeps
// crop output from dominating the pipeline.
std::vector<std::uint8_t> EncodePng(const RgbImage& image) {
  if (image.empty()) throw InvalidInput("encode: empty image");
  const auto pixels = ToBytes(image);
  std::vector<std::uint8_t> out;
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, PngError, PngWarning);
  if (png == nullptr) throw DecodeError("png encode: out of memory");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DecodeError("png encode: " + error);
  }
  png_set_write_fn(png, &out, PngAppend, nullptr);
  png_set_compression_level(png, 1);
  png_set_filter(png, 0, PNG_FILTER_SUB);
  png_set_compression_strategy(png, Z_HUFFMAN_ONLY);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * 3;
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + stride * static_cast<std::size_t>(y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void WriteFileAtomically(const std::filesystem::path& path,
                         std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteFileAtomically(const std::filesystem::path& path, const std::string& text) {
  WriteFileAtomically(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                      text.size()));
}

double Luma(const Rgb& p) {
  return 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
}

GrayMap Luminance(const RgbImage& image) {
  GrayMap out(image.width, image.height);
  for (std::size_t i = 0; i < image.size(); ++i) out.data[i] = Luma(image.data[i]);
  return out;
}

RgbImage ResizeBilinear(const RgbImage& image, int width, int height) {
  return ResizeBilinearImpl(image, width, height, [](const Rgb& a, const Rgb& b, double t) {
    const auto f = static_cast<float>(t);
    return Rgb{a.r + (b.r - a.r) * f, a.g + (b.g - a.g) * f, a.b + (b.b - a.b) * f};
  });
}

GrayMap ResizeBilinear(const GrayMap& map, int width, int height) {
  return ResizeBilinearImpl(map, width, height,
                            [](double a, double b, double t) { return a + (b - a) * t; });
}

GrayMap ResizeArea(const GrayMap& map, int width, int height) {
  if (map.empty() || width < 1 || height < 1 || width > map.width || height > map.height) {
    throw InvalidInput("area resize only shrinks");
  }
  // Per-axis overlap weights: weights[i] lists (source index, fraction).
  auto axis = [](int src, int dst) {
    std::vector<std::vector<std::pair<int, double>>> w(dst);
    const double scale = static_cast<double>(src) / dst;
    for (int i = 0; i < dst; ++i) {
      const double lo = i * scale;
      const double hi = (i + 1) * scale;
      for (int s = static_cast<int>(std::floor(lo)); s < src && s < hi; ++s) {
        const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
        if (overlap > 0) w[i].emplace_back(s, overlap / scale);
      }
    }
    return w;
  };
  const auto wx = axis(map.width, width);
  const auto wy = axis(map.height, height);
  GrayMap rows(width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& [s, f] : wx[x]) acc += f * map.at(s, y);
      rows.at(x, y) = acc;
    }
  }
  GrayMap out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& [s, f] : wy[y]) acc += f * rows.at(x, s);
      out.at(x, y) = acc;
    }
  }
  return out;
}

GrayMap GaussianBlur(const GrayMap& map, double sigma) {
  if (sigma <= 0 || map.empty()) return map;
  const auto k = GaussianKernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  GrayMap tmp(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * map.at(Mirror(x + i, map.width), y);
      tmp.at(x, y) = acc;
    }
  }
  GrayMap out(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.at(x, Mirror(y + i, map.height));
      out.at(x, y) = acc;
    }
  }
  return out;
}

RgbImage GaussianBlur(const RgbImage& image, double sigma) {
  if (sigma <= 0 || image.empty()) return image;
  GrayMap channel[3];
  for (auto& c : channel) c = GrayMap(image.width, image.height);
  for (std::size_t i = 0; i < image.size(); ++i) {
    channel[0].data[i] = image.data[i].r;
    channel[1].data[i] = image.data[i].g;
    channel[2].data[i] = image.data[i].b;
  }
  for (auto& c : channel) c = GaussianBlur(c, sigma);
  RgbImage out(image.width, image.height);
  for (std::size_t i = 0; i < image.size(); ++i) {
    out.data[i] = {static_cast<float>(channel[0].data[i]), static_cast<float>(channel[1].data[i]),
                   static_cast<float>(channel[2].data[i])};
  }
  return out;
}

RgbImage CropImage(const RgbImage& image, int x, int y, int width, int height) {
  if (x < 0 || y < 0 || width < 1 || height < 1 || x + width > image.width ||
      y + height > image.height) {
    throw InvalidInput("crop rectangle outside image");
  }
  RgbImage out(width, height);
  for (int row = 0; row < height; ++row) {
    std::copy_n(&image.at(x, y + row), width, &out.at(0, row));
  }
  return out;
}

}  // namespace curate
