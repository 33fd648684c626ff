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

// Machine-oriented codec: object contours plus a coarse color base.
//
// The bitstream carries a binary contour map (Sobel threshold on luma,
// context-coded) and a block-averaged, quantized RGB base. Decoding
// upsamples the base and darkens contour pixels, which keeps object
// position, size and color while discarding texture.
//
// Bitstream layout (big-endian):
//   "GMVB" | version u8 | width u16 | height u16 | edge_threshold f32 |
//   color_downsample u8 | quant_bits u8 | edge_render_weight f32 |
//   edge_len u32 | edge payload | color_len u32 | color payload
// width/height are the unpadded image dimensions.

#ifndef GMV_ICM_CODEC_H_
#define GMV_ICM_CODEC_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gmv/image.h"

namespace gmv {

struct CodecConfig {
  float edge_threshold = 2.0f;  // Sobel magnitude, unnormalized kernel
  int color_downsample = 8;
  int quant_bits = 4;
  float edge_render_weight = 0.7f;

  // Throws kInvalidArgument if any field is out of range.
  void Validate() const;

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;
};

struct EdgeMap {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> bits;  // row-major, 1 marks a contour pixel

  uint8_t at(int y, int x) const {
    return bits[static_cast<size_t>(y) * width + x];
  }
  size_t count() const;
};

struct MachineBitstream {
  static constexpr uint8_t kVersion = 1;
  // Bytes before the edge payload length prefix.
  static constexpr size_t kHeaderBytes = 19;

  uint8_t version = kVersion;
  uint16_t width = 0;
  uint16_t height = 0;
  CodecConfig config;
  std::vector<uint8_t> edge_payload;
  std::vector<uint8_t> color_payload;

  size_t total_bytes() const {
    return kHeaderBytes + 4 + edge_payload.size() + 4 + color_payload.size();
  }

  std::vector<uint8_t> Serialize() const;
  // Throws kFormatError on a bad magic/version/config and kTruncated when the
  // buffer ends early.
  static MachineBitstream Parse(std::span<const uint8_t> bytes);

  friend bool operator==(const MachineBitstream&,
                         const MachineBitstream&) = default;
};

EdgeMap ComputeEdgeMap(const RgbImage& img, double threshold);

// Causal context of pixel (y, x): left + 2*up + 4*up-left, zero outside.
int EdgeContext(const EdgeMap& map, int y, int x);
inline constexpr int kEdgeContexts = 8;

MachineBitstream EncodeMachine(const RgbImage& img, const CodecConfig& cfg);
RgbImage DecodeMachine(const MachineBitstream& bs);

// Bits per pixel of the whole bitstream over the unpadded pixel count.
double RateBpp(const MachineBitstream& bs);
double RateBpp(size_t total_bytes, int width, int height);

// Mean squared 4-neighbour Laplacian of the luma plane (replicate border).
double LaplacianEnergy(const RgbImage& img);

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);

}  // namespace gmv

#endif  // GMV_ICM_CODEC_H_
