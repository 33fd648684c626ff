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

#include <filesystem>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "gmv/error.h"
#include "gmv/rng.h"

namespace gmv {
namespace {

RgbImage Solid(int h, int w, float r, float g, float b) {
  RgbImage img(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
  return img;
}

RgbImage RandomImage(int h, int w, uint64_t seed) {
  Rng rng(seed);
  RgbImage img(h, w);
  for (float& v : img.data()) v = static_cast<float>(rng.Uniform());
  return img;
}

TEST(RgbToYcc, White) {
  const YccImage ycc = RgbToYcc(Solid(8, 8, 1, 1, 1));
  EXPECT_NEAR(ycc.y.at(0, 0), 1.0, 1e-6);
  EXPECT_NEAR(ycc.cb.at(0, 0), 0.0, 1e-6);
  EXPECT_NEAR(ycc.cr.at(0, 0), 0.0, 1e-6);
}

TEST(RgbToYcc, Black) {
  const YccImage ycc = RgbToYcc(Solid(8, 8, 0, 0, 0));
  EXPECT_EQ(ycc.y.at(3, 3), 0.0f);
  EXPECT_EQ(ycc.cb.at(3, 3), 0.0f);
  EXPECT_EQ(ycc.cr.at(3, 3), 0.0f);
}

TEST(RgbToYcc, Red) {
  const YccImage ycc = RgbToYcc(Solid(8, 8, 1, 0, 0));
  EXPECT_NEAR(ycc.y.at(0, 0), 0.299, 1e-6);
  EXPECT_NEAR(ycc.cb.at(0, 0), -0.168636, 1e-6);
  EXPECT_NEAR(ycc.cr.at(0, 0), 0.499813, 1e-6);
}

TEST(YccToRgb, WhiteAndRed) {
  YccImage ycc{Plane(8, 8, 1.0f), Plane(8, 8, 0.0f), Plane(8, 8, 0.0f)};
  RgbImage rgb = YccToRgb(ycc);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(rgb.at(0, 0, c), 1.0, 1e-6);

  ycc = {Plane(8, 8, 0.299f), Plane(8, 8, -0.168636f), Plane(8, 8, 0.499813f)};
  rgb = YccToRgb(ycc);
  EXPECT_NEAR(rgb.at(4, 4, 0), 1.0, 1e-6);
  EXPECT_NEAR(rgb.at(4, 4, 1), 0.0, 1e-6);
  EXPECT_NEAR(rgb.at(4, 4, 2), 0.0, 1e-6);
}

TEST(YccToRgb, RoundTripRandom) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const RgbImage img = RandomImage(16, 16, seed);
    EXPECT_LE(MaxAbsDiff(YccToRgb(RgbToYcc(img)), img), 1e-6);
  }
}

TEST(RgbToYcc, LumaInUnitRange) {
  const RgbImage img = RandomImage(32, 32, 5);
  const YccImage ycc = RgbToYcc(img);
  for (float v : ycc.y.data()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  const Plane y = Luma(img);
  for (int i = 0; i < 32 * 32; ++i) EXPECT_EQ(y.data()[i], ycc.y.data()[i]);
}

TEST(ResizeBilinear, ConstantStaysConstant) {
  const RgbImage img = Solid(8, 8, 0.25f, 0.5f, 0.75f);
  for (auto [h, w] : {std::pair{3, 5}, std::pair{17, 9}, std::pair{8, 8}}) {
    const RgbImage out = ResizeBilinear(img, h, w);
    ASSERT_EQ(out.height(), h);
    ASSERT_EQ(out.width(), w);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        EXPECT_EQ(out.at(y, x, 0), 0.25f);
        EXPECT_EQ(out.at(y, x, 1), 0.5f);
        EXPECT_EQ(out.at(y, x, 2), 0.75f);
      }
    }
  }
}

TEST(ResizeBilinear, IdentitySize) {
  const RgbImage img = RandomImage(9, 13, 1);
  EXPECT_EQ(ResizeBilinear(img, 9, 13), img);
}

TEST(ResizeBilinear, TwoByTwoToTwoByFour) {
  RgbImage img(2, 2);
  for (int y = 0; y < 2; ++y) {
    for (int c = 0; c < 3; ++c) {
      img.at(y, 0, c) = 0.0f;
      img.at(y, 1, c) = 1.0f;
    }
  }
  const RgbImage out = ResizeBilinear(img, 2, 4);
  // Output centres 0.5, 1.5, 2.5, 3.5 map to source x = -0.25, 0.25, 0.75,
  // 1.25; the outer two clamp to the border samples.
  const float expected[4] = {0.0f, 0.25f, 0.75f, 1.0f};
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_NEAR(out.at(y, x, c), expected[x], 1e-7);
    }
  }
}

TEST(PadAndCrop, RoundTrip) {
  const RgbImage img = RandomImage(10, 11, 2);
  const RgbImage padded = PadReplicate(img, 16, 16);
  EXPECT_EQ(padded.at(15, 15, 1), img.at(9, 10, 1));
  EXPECT_EQ(padded.at(3, 14, 0), img.at(3, 10, 0));
  EXPECT_EQ(Crop(padded, 10, 11), img);
}

TEST(ImageIo, SaveLoadWithinQuantization) {
  const auto path = std::filesystem::temp_directory_path() / "gmv_image_test.png";
  const RgbImage img = RandomImage(12, 20, 3);
  SaveImage(img, path);
  const RgbImage back = LoadImage(path);
  ASSERT_EQ(back.height(), 12);
  ASSERT_EQ(back.width(), 20);
  EXPECT_LE(MaxAbsDiff(img, back), 1.0 / 255.0 + 1e-7);
  CheckRgbInvariants(back);
  std::filesystem::remove(path);
}

TEST(ImageIo, AllBlackLoadsAsZero) {
  const auto path = std::filesystem::temp_directory_path() / "gmv_black.png";
  SaveImage(RgbImage(8, 8, 0.0f), path);
  const RgbImage back = LoadImage(path);
  for (float v : back.data()) EXPECT_EQ(v, 0.0f);
  std::filesystem::remove(path);
}

TEST(ImageIo, DistinctErrors) {
  try {
    LoadImage("/nonexistent/gmv/none.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
  const auto bad = std::filesystem::temp_directory_path() / "gmv_not_png.png";
  {
    std::ofstream(bad) << "not an image";
  }
  try {
    LoadImage(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormatError);
  }
  std::filesystem::remove(bad);
  try {
    SaveImage(RgbImage(8, 8), "/nonexistent/gmv/out.png");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}

TEST(CheckRgbInvariants, RejectsBadImages) {
  EXPECT_THROW(CheckRgbInvariants(RgbImage(4, 8)), Error);
  RgbImage img(8, 8, 0.5f);
  img.at(1, 1, 1) = 1.5f;
  EXPECT_THROW(CheckRgbInvariants(img), Error);
  img.at(1, 1, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(CheckRgbInvariants(img), Error);
  EXPECT_NO_THROW(CheckRgbInvariants(RgbImage(8, 8, 0.5f)));
}

}  // namespace
}  // namespace gmv
