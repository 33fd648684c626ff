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

#include "gmv/icm_codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gmv/error.h"
#include "gmv/range_coder.h"

namespace gmv {
namespace {

constexpr char kMagic[4] = {'G', 'M', 'V', 'B'};

int RoundUp(int v, int k) { return (v + k - 1) / k * k; }

class ByteWriter {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) {
    out_.push_back(static_cast<uint8_t>(v >> 8));
    out_.push_back(static_cast<uint8_t>(v));
  }
  void U32(uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<uint8_t>(v >> s));
  }
  void F32(float v) { U32(std::bit_cast<uint32_t>(v)); }
  void Bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t U8() { return Need(1)[0]; }
  uint16_t U16() {
    auto b = Need(2);
    return static_cast<uint16_t>((b[0] << 8) | b[1]);
  }
  uint32_t U32() {
    auto b = Need(4);
    return (uint32_t{b[0]} << 24) | (uint32_t{b[1]} << 16) |
           (uint32_t{b[2]} << 8) | b[3];
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::vector<uint8_t> Bytes(size_t n) {
    auto b = Need(n);
    return {b.begin(), b.end()};
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const uint8_t> Need(size_t n) {
    if (remaining() < n) {
      throw Error(ErrorCode::kTruncated, "bitstream payload underrun");
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

int MaxLevel(int bits) { return (1 << bits) - 1; }

}  // namespace

void CodecConfig::Validate() const {
  if (!std::isfinite(edge_threshold) || edge_threshold <= 0.0f) {
    throw Error(ErrorCode::kInvalidArgument, "edge_threshold must be > 0");
  }
  if (color_downsample < 2 || color_downsample > 255) {
    throw Error(ErrorCode::kInvalidArgument,
                "color_downsample must be in [2,255]");
  }
  if (quant_bits < 2 || quant_bits > 8) {
    throw Error(ErrorCode::kInvalidArgument, "quant_bits must be in [2,8]");
  }
  if (!(edge_render_weight >= 0.0f && edge_render_weight <= 1.0f)) {
    throw Error(ErrorCode::kInvalidArgument,
                "edge_render_weight must be in [0,1]");
  }
}

size_t EdgeMap::count() const {
  return static_cast<size_t>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

std::vector<uint8_t> MachineBitstream::Serialize() const {
  ByteWriter w;
  for (char c : kMagic) w.U8(static_cast<uint8_t>(c));
  w.U8(version);
  w.U16(width);
  w.U16(height);
  w.F32(config.edge_threshold);
  w.U8(static_cast<uint8_t>(config.color_downsample));
  w.U8(static_cast<uint8_t>(config.quant_bits));
  w.F32(config.edge_render_weight);
  w.U32(static_cast<uint32_t>(edge_payload.size()));
  w.Bytes(edge_payload);
  w.U32(static_cast<uint32_t>(color_payload.size()));
  w.Bytes(color_payload);
  return w.Take();
}

MachineBitstream MachineBitstream::Parse(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "bitstream shorter than header");
  }
  for (char c : kMagic) {
    if (r.U8() != static_cast<uint8_t>(c)) {
      throw Error(ErrorCode::kFormatError, "bad bitstream magic");
    }
  }
  MachineBitstream bs;
  bs.version = r.U8();
  if (bs.version != kVersion) {
    throw Error(ErrorCode::kFormatError,
                "unsupported bitstream version " + std::to_string(bs.version));
  }
  bs.width = r.U16();
  bs.height = r.U16();
  bs.config.edge_threshold = r.F32();
  bs.config.color_downsample = r.U8();
  bs.config.quant_bits = r.U8();
  bs.config.edge_render_weight = r.F32();
  try {
    bs.config.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kFormatError,
                std::string("corrupt bitstream header: ") + e.what());
  }
  if (bs.width == 0 || bs.height == 0) {
    throw Error(ErrorCode::kFormatError, "corrupt bitstream header: zero size");
  }
  bs.edge_payload = r.Bytes(r.U32());
  bs.color_payload = r.Bytes(r.U32());
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kFormatError, "trailing bytes after bitstream");
  }
  return bs;
}

EdgeMap ComputeEdgeMap(const RgbImage& img, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "edge threshold must be > 0");
  }
  const Plane luma = Luma(img);
  const int h = img.height();
  const int w = img.width();
  auto px = [&](int y, int x) -> double {
    return luma.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
  };
  EdgeMap map{h, w, std::vector<uint8_t>(static_cast<size_t>(h) * w, 0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (px(y - 1, x + 1) + 2.0 * px(y, x + 1) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y, x - 1) + px(y + 1, x - 1));
      const double gy = (px(y + 1, x - 1) + 2.0 * px(y + 1, x) + px(y + 1, x + 1)) -
                        (px(y - 1, x - 1) + 2.0 * px(y - 1, x) + px(y - 1, x + 1));
      if (std::sqrt(gx * gx + gy * gy) > threshold) {
        map.bits[static_cast<size_t>(y) * w + x] = 1;
      }
    }
  }
  return map;
}

int EdgeContext(const EdgeMap& map, int y, int x) {
  const int left = x > 0 ? map.at(y, x - 1) : 0;
  const int up = y > 0 ? map.at(y - 1, x) : 0;
  const int up_left = (x > 0 && y > 0) ? map.at(y - 1, x - 1) : 0;
  return left + 2 * up + 4 * up_left;
}

MachineBitstream EncodeMachine(const RgbImage& img, const CodecConfig& cfg) {
  cfg.Validate();
  if (img.height() > 65535 || img.width() > 65535) {
    throw Error(ErrorCode::kOutOfRange, "image dimension exceeds 65535");
  }
  const int k = cfg.color_downsample;
  const int ph = RoundUp(img.height(), k);
  const int pw = RoundUp(img.width(), k);
  if (ph > 65535 || pw > 65535) {
    throw Error(ErrorCode::kOutOfRange, "padded dimension exceeds 65535");
  }
  const RgbImage padded = PadReplicate(img, ph, pw);

  MachineBitstream bs;
  bs.width = static_cast<uint16_t>(img.width());
  bs.height = static_cast<uint16_t>(img.height());
  bs.config = cfg;

  const EdgeMap edges = ComputeEdgeMap(padded, cfg.edge_threshold);
  {
    std::vector<BitModel> models(kEdgeContexts);
    RangeEncoder enc;
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        enc.Encode(edges.at(y, x), models[EdgeContext(edges, y, x)]);
      }
    }
    bs.edge_payload = enc.Finish();
  }

  {
    const int bits = cfg.quant_bits;
    const int levels = MaxLevel(bits);
    std::vector<BitModel> models(static_cast<size_t>(RgbImage::kChannels) * bits);
    RangeEncoder enc;
    const double inv_area = 1.0 / (static_cast<double>(k) * k);
    for (int by = 0; by < ph / k; ++by) {
      for (int bx = 0; bx < pw / k; ++bx) {
        for (int c = 0; c < RgbImage::kChannels; ++c) {
          double sum = 0.0;
          for (int y = by * k; y < (by + 1) * k; ++y) {
            for (int x = bx * k; x < (bx + 1) * k; ++x) sum += padded.at(y, x, c);
          }
          const double v = sum * inv_area;
          const int q = std::clamp(static_cast<int>(std::floor(v * levels + 0.5)),
                                   0, levels);
          for (int b = 0; b < bits; ++b) {
            enc.Encode((q >> (bits - 1 - b)) & 1, models[c * bits + b]);
          }
        }
      }
    }
    bs.color_payload = enc.Finish();
  }
  return bs;
}

RgbImage DecodeMachine(const MachineBitstream& bs) {
  const CodecConfig& cfg = bs.config;
  cfg.Validate();
  if (bs.width == 0 || bs.height == 0) {
    throw Error(ErrorCode::kFormatError, "bitstream has zero dimensions");
  }
  const int k = cfg.color_downsample;
  const int ph = RoundUp(bs.height, k);
  const int pw = RoundUp(bs.width, k);

  EdgeMap edges{ph, pw, std::vector<uint8_t>(static_cast<size_t>(ph) * pw, 0)};
  {
    std::vector<BitModel> models(kEdgeContexts);
    RangeDecoder dec(bs.edge_payload);
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        const int ctx = EdgeContext(edges, y, x);
        edges.bits[static_cast<size_t>(y) * pw + x] =
            static_cast<uint8_t>(dec.Decode(models[ctx]));
      }
    }
  }

  RgbImage base(ph / k, pw / k);
  {
    const int bits = cfg.quant_bits;
    const int levels = MaxLevel(bits);
    std::vector<BitModel> models(static_cast<size_t>(RgbImage::kChannels) * bits);
    RangeDecoder dec(bs.color_payload);
    for (int by = 0; by < base.height(); ++by) {
      for (int bx = 0; bx < base.width(); ++bx) {
        for (int c = 0; c < RgbImage::kChannels; ++c) {
          int q = 0;
          for (int b = 0; b < bits; ++b) q = (q << 1) | dec.Decode(models[c * bits + b]);
          base.at(by, bx, c) = static_cast<float>(static_cast<double>(q) / levels);
        }
      }
    }
  }

  RgbImage out = ResizeBilinear(base, ph, pw);
  // Scaling Y by (1 - w) with chroma fixed shifts every RGB channel by -w*Y.
  const double weight = cfg.edge_render_weight;
  if (weight > 0.0) {
    for (int y = 0; y < ph; ++y) {
      for (int x = 0; x < pw; ++x) {
        if (!edges.at(y, x)) continue;
        const double luma = 0.299 * out.at(y, x, 0) + 0.587 * out.at(y, x, 1) +
                            0.114 * out.at(y, x, 2);
        for (int c = 0; c < RgbImage::kChannels; ++c) {
          out.at(y, x, c) = static_cast<float>(
              std::clamp(out.at(y, x, c) - weight * luma, 0.0, 1.0));
        }
      }
    }
  }
  return Crop(out, bs.height, bs.width);
}

double RateBpp(size_t total_bytes, int width, int height) {
  return static_cast<double>(total_bytes) * 8.0 /
         (static_cast<double>(width) * height);
}

double RateBpp(const MachineBitstream& bs) {
  return RateBpp(bs.total_bytes(), bs.width, bs.height);
}

double LaplacianEnergy(const RgbImage& img) {
  const Plane luma = Luma(img);
  const int h = img.height();
  const int w = img.width();
  auto px = [&](int y, int x) -> double {
    return luma.at(std::clamp(y, 0, h - 1), std::clamp(x, 0, w - 1));
  };
  double sum = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double lap = px(y - 1, x) + px(y + 1, x) + px(y, x - 1) +
                         px(y, x + 1) - 4.0 * px(y, x);
      sum += lap * lap;
    }
  }
  return sum / (static_cast<double>(h) * w);
}

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kNotFound, "file not found: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

}  // namespace gmv
