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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gmv/dataset.h"
#include "gmv/error.h"
#include "gmv/rng.h"

namespace gmv {
namespace {

std::vector<RgbImage> Corpus(int n, int size) {
  std::vector<RgbImage> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(GenerateProceduralImage({size, 2, 5}, ProceduralImageSeed(77, i)));
  }
  return out;
}

RgbImage Step(int h, int w, int step_col) {
  RgbImage img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = step_col; x < w; ++x) {
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 1.0f;
    }
  }
  return img;
}

TEST(EdgeMap, ConstantImageHasNoEdges) {
  for (double t : {0.01, 1.0, 5.0}) {
    EXPECT_EQ(ComputeEdgeMap(RgbImage(16, 16, 0.3f), t).count(), 0u);
  }
}

TEST(EdgeMap, VerticalUnitStep) {
  const EdgeMap map = ComputeEdgeMap(Step(10, 12, 6), 2.0);
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 12; ++x) {
      EXPECT_EQ(map.at(y, x), (x == 5 || x == 6) ? 1 : 0) << y << "," << x;
    }
  }
}

TEST(EdgeMap, ThresholdAboveMaxMagnitude) {
  // The step's gradient magnitude is exactly 4.
  EXPECT_EQ(ComputeEdgeMap(Step(10, 12, 6), 4.0).count(), 0u);
  EXPECT_EQ(ComputeEdgeMap(Step(10, 12, 6), 3.999).count(), 20u);
}

TEST(EdgeMap, CausalContext) {
  EdgeMap map{2, 2, {1, 1, 1, 0}};
  EXPECT_EQ(EdgeContext(map, 0, 0), 0);
  EXPECT_EQ(EdgeContext(map, 0, 1), 1);
  EXPECT_EQ(EdgeContext(map, 1, 0), 2);
  EXPECT_EQ(EdgeContext(map, 1, 1), 1 + 2 + 4);
}

TEST(RateBpp, Arithmetic) {
  EXPECT_NEAR(RateBpp(1000, 256, 256), 0.1221, 5e-5);
  EXPECT_DOUBLE_EQ(RateBpp(1000, 256, 256), 8000.0 / 65536.0);
  EXPECT_NEAR(RateBpp(23, 256, 256), 0.002808, 5e-7);
  // Doubling the payload doubles its contribution.
  const double header = RateBpp(27, 64, 64);
  EXPECT_DOUBLE_EQ(RateBpp(27 + 200, 64, 64) - header,
                   0.5 * (RateBpp(27 + 400, 64, 64) - header));
}

TEST(RateBpp, UsesUnpaddedSize) {
  const RgbImage img = GenerateProceduralImage({37, 2, 5}, 3);
  const MachineBitstream bs = EncodeMachine(img, CodecConfig{});
  EXPECT_DOUBLE_EQ(RateBpp(bs), bs.total_bytes() * 8.0 / (37.0 * 37.0));
  EXPECT_EQ(bs.Serialize().size(), bs.total_bytes());
}

TEST(Codec, DeterministicAndShapePreserving) {
  const RgbImage img = ResizeBilinear(GenerateProceduralImage({64, 2, 5}, 9), 37, 50);
  const CodecConfig cfg;
  const std::vector<uint8_t> a = EncodeMachine(img, cfg).Serialize();
  const std::vector<uint8_t> b = EncodeMachine(img, cfg).Serialize();
  EXPECT_EQ(a, b);
  const RgbImage d1 = DecodeMachine(MachineBitstream::Parse(a));
  const RgbImage d2 = DecodeMachine(MachineBitstream::Parse(b));
  EXPECT_EQ(d1, d2);
  EXPECT_EQ(d1.height(), 37);
  EXPECT_EQ(d1.width(), 50);
  CheckRgbInvariants(d1);
}

TEST(Codec, HeaderRoundTrip) {
  CodecConfig cfg{1.25f, 4, 6, 0.5f};
  const MachineBitstream bs = EncodeMachine(GenerateProceduralImage({32, 2, 5}, 4), cfg);
  const std::vector<uint8_t> bytes = bs.Serialize();
  ASSERT_GE(bytes.size(), MachineBitstream::kHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "GMVB");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);   // width, big-endian
  EXPECT_EQ(bytes[6], 32);
  const MachineBitstream back = MachineBitstream::Parse(bytes);
  EXPECT_EQ(back, bs);
  EXPECT_EQ(back.config, cfg);
}

TEST(Codec, ParseErrors) {
  const std::vector<uint8_t> good =
      EncodeMachine(GenerateProceduralImage({16, 2, 5}, 4), CodecConfig{2.0f, 4, 4, 0.7f})
          .Serialize();
  auto code_of = [](std::vector<uint8_t> bytes) {
    try {
      MachineBitstream::Parse(bytes);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kNumerical;  // no error
  };
  std::vector<uint8_t> bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of(bad_magic), ErrorCode::kFormatError);
  std::vector<uint8_t> bad_version = good;
  bad_version[4] = 9;
  EXPECT_EQ(code_of(bad_version), ErrorCode::kFormatError);
  EXPECT_EQ(code_of({good.begin(), good.begin() + 10}), ErrorCode::kTruncated);
  EXPECT_EQ(code_of({good.begin(), good.end() - 1}), ErrorCode::kTruncated);
  std::vector<uint8_t> trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(code_of(trailing), ErrorCode::kFormatError);
}

TEST(Codec, ConstantImageRecoveredWithinQuantizerStep) {
  for (int bits : {2, 4, 8}) {
    CodecConfig cfg{2.0f, 8, bits, 0.7f};
    RgbImage img(40, 24);
    for (int y = 0; y < 40; ++y) {
      for (int x = 0; x < 24; ++x) {
        img.at(y, x, 0) = 0.3f;
        img.at(y, x, 1) = 0.62f;
        img.at(y, x, 2) = 0.11f;
      }
    }
    const MachineBitstream bs = EncodeMachine(img, cfg);
    const RgbImage out = DecodeMachine(bs);
    const double bound = 1.0 / ((1 << bits) - 1) / 2.0;
    EXPECT_LE(MaxAbsDiff(out, img), bound + 1e-6) << bits;
  }
}

TEST(Codec, ZeroRenderWeightIsUpsampledColorBase) {
  const RgbImage img = GenerateProceduralImage({32, 2, 5}, 12);
  const CodecConfig cfg{1.0f, 4, 5, 0.0f};
  const RgbImage out = DecodeMachine(EncodeMachine(img, cfg));

  // Independent reconstruction of the dequantized block means.
  const int k = 4;
  const int levels = (1 << 5) - 1;
  RgbImage base(32 / k, 32 / k);
  for (int by = 0; by < 32 / k; ++by) {
    for (int bx = 0; bx < 32 / k; ++bx) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int y = 0; y < k; ++y) {
          for (int x = 0; x < k; ++x) sum += img.at(by * k + y, bx * k + x, c);
        }
        const double q = std::floor(sum / (k * k) * levels + 0.5);
        base.at(by, bx, c) = static_cast<float>(q / levels);
      }
    }
  }
  EXPECT_LE(MaxAbsDiff(out, ResizeBilinear(base, 32, 32)), 1e-6);
  const RgbImage no_edges = DecodeMachine(EncodeMachine(img, {1e9f, 4, 5, 0.0f}));
  EXPECT_EQ(out, no_edges);
}

TEST(Codec, EdgesDarkenLumaOnly) {
  const RgbImage img = Step(16, 16, 8);
  const CodecConfig cfg{2.0f, 2, 8, 0.7f};
  const RgbImage plain = DecodeMachine(EncodeMachine(img, {2.0f, 2, 8, 0.0f}));
  const RgbImage dark = DecodeMachine(EncodeMachine(img, cfg));
  const YccImage a = RgbToYcc(plain);
  const YccImage b = RgbToYcc(dark);
  const EdgeMap edges = ComputeEdgeMap(img, 2.0);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      const float expected = edges.at(y, x) ? 0.3f * a.y.at(y, x) : a.y.at(y, x);
      EXPECT_NEAR(b.y.at(y, x), expected, 1e-5);
      EXPECT_NEAR(b.cb.at(y, x), a.cb.at(y, x), 1e-5);
      EXPECT_NEAR(b.cr.at(y, x), a.cr.at(y, x), 1e-5);
    }
  }
}

TEST(Codec, InvalidInputs) {
  const RgbImage img = GenerateProceduralImage({16, 2, 5}, 1);
  for (const CodecConfig& bad : {CodecConfig{0.0f, 8, 4, 0.7f}, CodecConfig{2.0f, 1, 4, 0.7f},
                                 CodecConfig{2.0f, 8, 1, 0.7f}, CodecConfig{2.0f, 8, 9, 0.7f},
                                 CodecConfig{2.0f, 8, 4, 1.5f}}) {
    try {
      EncodeMachine(img, bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    }
  }
  try {
    EncodeMachine(RgbImage(8, 65536, 0.5f), CodecConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
}

TEST(Codec, RateMonotoneOverCorpus) {
  const std::vector<RgbImage> corpus = Corpus(100, 64);
  double prev_edge = 1e300;
  double prev_bpp = 1e300;
  for (float t : {0.5f, 1.0f, 1.5f, 2.0f, 3.0f, 4.0f}) {
    double edge = 0.0, bpp = 0.0;
    for (const RgbImage& img : corpus) {
      const MachineBitstream bs = EncodeMachine(img, {t, 8, 4, 0.7f});
      edge += bs.edge_payload.size();
      bpp += RateBpp(bs);
    }
    EXPECT_LE(edge, prev_edge) << t;
    EXPECT_LE(bpp, prev_bpp) << t;
    prev_edge = edge;
    prev_bpp = bpp;
  }
  prev_bpp = 0.0;
  for (int b = 2; b <= 8; ++b) {
    double bpp = 0.0;
    for (const RgbImage& img : corpus) bpp += RateBpp(EncodeMachine(img, {2.0f, 8, b, 0.7f}));
    EXPECT_GE(bpp, prev_bpp) << b;
    prev_bpp = bpp;
  }
}

TEST(Codec, DiscardsTexture) {
  const std::vector<RgbImage> corpus = Corpus(100, 64);
  int reduced = 0;
  for (const RgbImage& img : corpus) {
    const RgbImage dec = DecodeMachine(EncodeMachine(img, CodecConfig{}));
    if (LaplacianEnergy(dec) < LaplacianEnergy(img)) ++reduced;
  }
  EXPECT_GE(reduced, 95);
}

TEST(FileBytes, RoundTripAndMissing) {
  const auto path = std::filesystem::temp_directory_path() / "gmv_bytes.gmvb";
  const std::vector<uint8_t> bytes = {1, 2, 3, 255};
  WriteFileBytes(path, bytes);
  EXPECT_EQ(ReadFileBytes(path), bytes);
  std::filesystem::remove(path);
  EXPECT_THROW(ReadFileBytes(path), Error);
}

}  // namespace
}  // namespace gmv
