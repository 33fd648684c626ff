// Copyright 2026 The GMV Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gmv/image.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "gmv/error.h"

namespace gmv {
namespace {

constexpr double kKr = 0.299;
constexpr double kKg = 0.587;
constexpr double kKb = 0.114;
constexpr double kCbScale = 0.564;
constexpr double kCrScale = 0.713;

float Clamp01(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

// Source coordinate and blend weight for half-pixel-center resampling.
struct Tap {
  int lo;
  int hi;
  double frac;
};

std::vector<Tap> ComputeTaps(int src, int dst) {
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

}  // namespace

Plane::Plane(int height, int width, float fill)
    : height_(height),
      width_(width),
      data_(static_cast<size_t>(height) * width, fill) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "plane dimensions must be positive");
  }
}

RgbImage::RgbImage(int height, int width, float fill)
    : height_(height),
      width_(width),
      data_(static_cast<size_t>(height) * width * kChannels, fill) {
  if (height <= 0 || width <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
}

void RgbImage::Clamp() {
  for (float& v : data_) v = std::clamp(v, 0.0f, 1.0f);
}

void CheckRgbInvariants(const RgbImage& img) {
  if (img.height() < kMinImageSide || img.width() < kMinImageSide) {
    throw Error(ErrorCode::kInvalidArgument,
                "image smaller than " + std::to_string(kMinImageSide) + "x" +
                    std::to_string(kMinImageSide));
  }
  for (float v : img.data()) {
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f) {
      throw Error(ErrorCode::kInvalidArgument,
                  "image value outside [0,1] or non-finite");
    }
  }
}

YccImage RgbToYcc(const RgbImage& img) {
  const int h = img.height();
  const int w = img.width();
  YccImage out{Plane(h, w), Plane(h, w), Plane(h, w)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = img.at(y, x, 0);
      const double g = img.at(y, x, 1);
      const double b = img.at(y, x, 2);
      const double luma = kKr * r + kKg * g + kKb * b;
      out.y.at(y, x) = static_cast<float>(luma);
      out.cb.at(y, x) = static_cast<float>(kCbScale * (b - luma));
      out.cr.at(y, x) = static_cast<float>(kCrScale * (r - luma));
    }
  }
  return out;
}

RgbImage YccToRgb(const YccImage& img) {
  const int h = img.height();
  const int w = img.width();
  if (img.cb.height() != h || img.cb.width() != w || img.cr.height() != h ||
      img.cr.width() != w) {
    throw Error(ErrorCode::kShapeMismatch, "ycc planes differ in shape");
  }
  RgbImage out(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double luma = img.y.at(y, x);
      const double r = luma + img.cr.at(y, x) / kCrScale;
      const double b = luma + img.cb.at(y, x) / kCbScale;
      const double g = (luma - kKr * r - kKb * b) / kKg;
      out.at(y, x, 0) = Clamp01(r);
      out.at(y, x, 1) = Clamp01(g);
      out.at(y, x, 2) = Clamp01(b);
    }
  }
  return out;
}

Plane Luma(const RgbImage& img) {
  Plane out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out.at(y, x) = static_cast<float>(kKr * img.at(y, x, 0) +
                                        kKg * img.at(y, x, 1) +
                                        kKb * img.at(y, x, 2));
    }
  }
  return out;
}

RgbImage ResizeBilinear(const RgbImage& img, int new_height, int new_width) {
  if (new_height < 1 || new_width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize target must be positive");
  }
  if (new_height == img.height() && new_width == img.width()) return img;
  const std::vector<Tap> ty = ComputeTaps(img.height(), new_height);
  const std::vector<Tap> tx = ComputeTaps(img.width(), new_width);
  RgbImage out(new_height, new_width);
  for (int y = 0; y < new_height; ++y) {
    const Tap& vy = ty[y];
    for (int x = 0; x < new_width; ++x) {
      const Tap& vx = tx[x];
      for (int c = 0; c < RgbImage::kChannels; ++c) {
        const double top = img.at(vy.lo, vx.lo, c) * (1.0 - vx.frac) +
                           img.at(vy.lo, vx.hi, c) * vx.frac;
        const double bottom = img.at(vy.hi, vx.lo, c) * (1.0 - vx.frac) +
                              img.at(vy.hi, vx.hi, c) * vx.frac;
        out.at(y, x, c) = Clamp01(top * (1.0 - vy.frac) + bottom * vy.frac);
      }
    }
  }
  return out;
}

RgbImage PadReplicate(const RgbImage& img, int height, int width) {
  if (height < img.height() || width < img.width()) {
    throw Error(ErrorCode::kInvalidArgument, "pad target smaller than image");
  }
  RgbImage out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(y, img.height() - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(x, img.width() - 1);
      for (int c = 0; c < RgbImage::kChannels; ++c) {
        out.at(y, x, c) = img.at(sy, sx, c);
      }
    }
  }
  return out;
}

RgbImage Crop(const RgbImage& img, int height, int width) {
  if (height > img.height() || width > img.width()) {
    throw Error(ErrorCode::kInvalidArgument, "crop larger than image");
  }
  if (height == img.height() && width == img.width()) return img;
  RgbImage out(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < RgbImage::kChannels; ++c) {
        out.at(y, x, c) = img.at(y, x, c);
      }
    }
  }
  return out;
}

RgbImage LoadImage(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kNotFound, "file not found: " + path.string());
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kFormatError,
                "unreadable image " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::kFormatError,
                "unreadable image " + path.string() + ": " + image.message);
  }
  RgbImage out(static_cast<int>(image.height), static_cast<int>(image.width));
  std::span<float> dst = out.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = buffer[i] / 255.0f;
  return out;
}

void SaveImage(const RgbImage& img, const std::filesystem::path& path) {
  std::vector<uint8_t> buffer(img.data().size());
  std::span<const float> src = img.data();
  for (size_t i = 0; i < src.size(); ++i) {
    const double q = std::round(static_cast<double>(src[i]) * 255.0);
    buffer[i] = static_cast<uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer.data(), 0,
                               nullptr)) {
    throw Error(ErrorCode::kIoError,
                "cannot write " + path.string() + ": " + image.message);
  }
}

double MaxAbsDiff(const RgbImage& a, const RgbImage& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::kShapeMismatch, "image dimensions differ");
  }
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
  }
  return m;
}

}  // namespace gmv
