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

#include "gmv/embedder.h"

#include <algorithm>
#include <cmath>

#include "gmv/error.h"
#include "gmv/rng.h"

namespace gmv {
namespace {

constexpr int kChannelPlan[] = {3, 32, 64, 128, 256};
constexpr float kNormEps = 1e-10f;

FeatureMap ToFeatureMap(const RgbImage& img) {
  FeatureMap f{3, img.height(), img.width(), {}};
  f.data.resize(static_cast<size_t>(3) * img.height() * img.width());
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        f.data[(static_cast<size_t>(c) * img.height() + y) * img.width() + x] =
            img.at(y, x, c) * 2.0f - 1.0f;
      }
    }
  }
  return f;
}

// 3x3 convolution, stride 2, zero padding 1, followed by ReLU.
FeatureMap ConvStride2Relu(const FeatureMap& in, int out_channels,
                           std::span<const float> weights) {
  const int oh = (in.height + 1) / 2;
  const int ow = (in.width + 1) / 2;
  FeatureMap out{out_channels, oh, ow,
                 std::vector<float>(static_cast<size_t>(out_channels) * oh * ow)};
  for (int o = 0; o < out_channels; ++o) {
    float* dst = &out.data[static_cast<size_t>(o) * oh * ow];
    for (int i = 0; i < in.channels; ++i) {
      const float* src = &in.data[static_cast<size_t>(i) * in.height * in.width];
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const float w = weights[((static_cast<size_t>(o) * in.channels + i) * 3 + ky) * 3 + kx];
          for (int y = 0; y < oh; ++y) {
            const int sy = 2 * y + ky - 1;
            if (sy < 0 || sy >= in.height) continue;
            const float* row = src + static_cast<size_t>(sy) * in.width;
            float* drow = dst + static_cast<size_t>(y) * ow;
            for (int x = 0; x < ow; ++x) {
              const int sx = 2 * x + kx - 1;
              if (sx < 0 || sx >= in.width) continue;
              drow[x] += w * row[sx];
            }
          }
        }
      }
    }
  }
  for (float& v : out.data) v = std::max(v, 0.0f);
  return out;
}

}  // namespace

std::vector<FeatureMap> Embedder::LayerFeatures(const RgbImage&) const {
  throw Error(ErrorCode::kNotFound,
              "embedder '" + id() + "' has no layer features");
}

RandomConvEmbedder::RandomConvEmbedder(uint64_t seed) : seed_(seed) {
  Rng rng(seed);
  for (size_t l = 0; l + 1 < std::size(kChannelPlan); ++l) {
    Layer layer{kChannelPlan[l], kChannelPlan[l + 1], {}};
    const size_t count = static_cast<size_t>(layer.in_channels) * layer.out_channels * 9;
    const double stddev = std::sqrt(2.0 / (layer.in_channels * 9.0));
    layer.weights.resize(count);
    for (float& w : layer.weights) w = static_cast<float>(rng.Normal() * stddev);
    layers_.push_back(std::move(layer));
  }
}

std::string RandomConvEmbedder::id() const {
  return "random_conv:" + std::to_string(seed_);
}

std::vector<FeatureMap> RandomConvEmbedder::LayerFeatures(
    const RgbImage& img) const {
  std::vector<FeatureMap> maps;
  FeatureMap current = ToFeatureMap(img);
  for (const Layer& layer : layers_) {
    current = ConvStride2Relu(current, layer.out_channels, layer.weights);
    maps.push_back(current);
  }
  return maps;
}

std::vector<double> RandomConvEmbedder::Embed(const RgbImage& img) const {
  const std::vector<FeatureMap> maps = LayerFeatures(img);
  const FeatureMap& last = maps.back();
  std::vector<double> out(last.channels, 0.0);
  const size_t area = static_cast<size_t>(last.height) * last.width;
  for (int c = 0; c < last.channels; ++c) {
    double sum = 0.0;
    for (size_t i = 0; i < area; ++i) sum += last.data[c * area + i];
    out[c] = sum / static_cast<double>(area);
  }
  return out;
}

std::unique_ptr<Embedder> MakeEmbedder(const std::string& name, uint64_t seed) {
  if (name == "random_conv") return std::make_unique<RandomConvEmbedder>(seed);
  throw Error(ErrorCode::kNotFound, "embedder unavailable: " + name);
}

Embedding Embed(std::span<const RgbImage> images, const Embedder& embedder) {
  if (images.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "cannot embed an empty image list");
  }
  Embedding e;
  e.embedder_id = embedder.id();
  e.features.resize(static_cast<Eigen::Index>(images.size()), embedder.dim());
  for (size_t i = 0; i < images.size(); ++i) {
    const std::vector<double> v = embedder.Embed(images[i]);
    if (static_cast<int>(v.size()) != embedder.dim()) {
      throw Error(ErrorCode::kShapeMismatch, "embedder returned wrong dimension");
    }
    for (int j = 0; j < embedder.dim(); ++j) {
      if (!std::isfinite(v[j])) {
        throw Error(ErrorCode::kNumerical, "non-finite embedding value");
      }
      e.features(static_cast<Eigen::Index>(i), j) = v[j];
    }
  }
  return e;
}

double PerceptualDistance(const RgbImage& a, const RgbImage& b,
                          const Embedder& embedder) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::kShapeMismatch, "image dimensions differ");
  }
  const std::vector<FeatureMap> fa = embedder.LayerFeatures(a);
  const std::vector<FeatureMap> fb = embedder.LayerFeatures(b);
  double total = 0.0;
  for (size_t l = 0; l < fa.size(); ++l) {
    const FeatureMap& p = fa[l];
    const FeatureMap& q = fb[l];
    const size_t area = static_cast<size_t>(p.height) * p.width;
    double layer_sum = 0.0;
    for (size_t s = 0; s < area; ++s) {
      double np = 0.0, nq = 0.0;
      for (int c = 0; c < p.channels; ++c) {
        np += static_cast<double>(p.data[c * area + s]) * p.data[c * area + s];
        nq += static_cast<double>(q.data[c * area + s]) * q.data[c * area + s];
      }
      const double ip = 1.0 / (std::sqrt(np) + kNormEps);
      const double iq = 1.0 / (std::sqrt(nq) + kNormEps);
      double d2 = 0.0;
      for (int c = 0; c < p.channels; ++c) {
        const double d = p.data[c * area + s] * ip - q.data[c * area + s] * iq;
        d2 += d * d;
      }
      layer_sum += d2;
    }
    total += layer_sum / static_cast<double>(area);
  }
  return total;
}

}  // namespace gmv
