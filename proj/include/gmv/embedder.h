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

#ifndef GMV_EMBEDDER_H_
#define GMV_EMBEDDER_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gmv/image.h"
#include "gmv/metrics.h"

namespace gmv {

// Channel-major activation map.
struct FeatureMap {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  float at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
};

// Deterministic image -> vector map used by FID/KID. Embedders that also
// expose intermediate layers can back the perceptual distance.
class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual std::string id() const = 0;
  virtual int dim() const = 0;
  virtual std::vector<double> Embed(const RgbImage& img) const = 0;

  // Throws kNotFound when the embedder has no layer features.
  virtual std::vector<FeatureMap> LayerFeatures(const RgbImage& img) const;
};

// Four 3x3 stride-2 ReLU convolutions (3->32->64->128->256) with He-scaled
// Gaussian weights drawn from a fixed seed, followed by global average
// pooling. Input is mapped from [0,1] to [-1,1].
class RandomConvEmbedder : public Embedder {
 public:
  static constexpr uint64_t kDefaultSeed = 20240917;

  explicit RandomConvEmbedder(uint64_t seed = kDefaultSeed);

  std::string id() const override;
  int dim() const override { return 256; }
  std::vector<double> Embed(const RgbImage& img) const override;
  std::vector<FeatureMap> LayerFeatures(const RgbImage& img) const override;

 private:
  struct Layer {
    int in_channels;
    int out_channels;
    std::vector<float> weights;  // [out][in][3][3]
  };

  uint64_t seed_;
  std::vector<Layer> layers_;
};

// Looks up an embedder by config name ("random_conv"). Throws kNotFound for
// unknown names.
std::unique_ptr<Embedder> MakeEmbedder(const std::string& name, uint64_t seed);

Embedding Embed(std::span<const RgbImage> images, const Embedder& embedder);

// LPIPS-style distance: per layer, unit-normalize each spatial feature
// vector over channels, take the squared difference summed over channels and
// averaged over space; sum over layers.
double PerceptualDistance(const RgbImage& a, const RgbImage& b,
                          const Embedder& embedder);

}  // namespace gmv

#endif  // GMV_EMBEDDER_H_
