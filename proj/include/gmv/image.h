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

#ifndef GMV_IMAGE_H_
#define GMV_IMAGE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace gmv {

// Single-channel float plane, row-major.
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  float& at(int y, int x) { return data_[static_cast<size_t>(y) * width_ + x]; }
  float at(int y, int x) const {
    return data_[static_cast<size_t>(y) * width_ + x];
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Interleaved RGB image with values nominally in [0, 1].
class RgbImage {
 public:
  static constexpr int kChannels = 3;

  RgbImage() = default;
  RgbImage(int height, int width, float fill = 0.0f);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  size_t num_pixels() const {
    return static_cast<size_t>(height_) * static_cast<size_t>(width_);
  }

  float& at(int y, int x, int c) {
    return data_[(static_cast<size_t>(y) * width_ + x) * kChannels + c];
  }
  float at(int y, int x, int c) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * kChannels + c];
  }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  void Clamp();

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// BT.601 full-range luma/chroma planes. Y in [0,1], Cb/Cr in [-0.5,0.5].
struct YccImage {
  Plane y;
  Plane cb;
  Plane cr;

  int height() const { return y.height(); }
  int width() const { return y.width(); }
};

inline constexpr int kMinImageSide = 8;

// Throws kInvalidArgument unless every value is finite and in [0,1] and
// both sides are at least kMinImageSide.
void CheckRgbInvariants(const RgbImage& img);

YccImage RgbToYcc(const RgbImage& img);

// Exact inverse of RgbToYcc followed by a clamp to [0,1].
RgbImage YccToRgb(const YccImage& img);

// Luma only; same coefficients as RgbToYcc.
Plane Luma(const RgbImage& img);

// Separable bilinear resampling, half-pixel-center alignment, edge clamp.
RgbImage ResizeBilinear(const RgbImage& img, int new_height, int new_width);

// Grows the image to (height, width) by replicating the last row/column.
RgbImage PadReplicate(const RgbImage& img, int height, int width);

// Top-left crop.
RgbImage Crop(const RgbImage& img, int height, int width);

// Lossless 8-bit RGB PNG. Values decode as v/255; encode as round(v*255).
RgbImage LoadImage(const std::filesystem::path& path);
void SaveImage(const RgbImage& img, const std::filesystem::path& path);

double MaxAbsDiff(const RgbImage& a, const RgbImage& b);

}  // namespace gmv

#endif  // GMV_IMAGE_H_
