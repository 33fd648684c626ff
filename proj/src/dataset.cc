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

#include "gmv/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "gmv/error.h"
#include "gmv/rng.h"

namespace gmv {
namespace {

struct Color {
  double r, g, b;
  double luma() const { return 0.299 * r + 0.587 * g + 0.114 * b; }
};

Color RandomColor(Rng& rng) {
  return {rng.Uniform(0.05, 0.95), rng.Uniform(0.05, 0.95), rng.Uniform(0.05, 0.95)};
}

// Bilinear value noise with lattice spacing `cell`, values in [-1, 1].
Plane ValueNoise(int size, double cell, Rng& rng) {
  const int n = static_cast<int>(std::ceil(size / cell)) + 2;
  std::vector<double> lattice(static_cast<size_t>(n) * n);
  for (double& v : lattice) v = rng.Uniform(-1.0, 1.0);
  Plane out(size, size);
  for (int y = 0; y < size; ++y) {
    const double fy = (y + 0.5) / cell;
    const int iy = static_cast<int>(fy);
    const double ty = fy - iy;
    for (int x = 0; x < size; ++x) {
      const double fx = (x + 0.5) / cell;
      const int ix = static_cast<int>(fx);
      const double tx = fx - ix;
      auto at = [&](int yy, int xx) { return lattice[static_cast<size_t>(yy) * n + xx]; };
      const double top = at(iy, ix) * (1 - tx) + at(iy, ix + 1) * tx;
      const double bottom = at(iy + 1, ix) * (1 - tx) + at(iy + 1, ix + 1) * tx;
      out.at(y, x) = static_cast<float>(top * (1 - ty) + bottom * ty);
    }
  }
  return out;
}

// Texture field: per-pixel grain plus two value-noise octaves, scaled by
// `amplitude`.
Plane Texture(int size, double amplitude, Rng& rng) {
  const double fine = rng.Uniform(1.0, 1.6);
  Plane a = ValueNoise(size, fine, rng);
  Plane b = ValueNoise(size, fine * 2.5, rng);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double grain = rng.Uniform(-1.0, 1.0);
      a.at(y, x) = static_cast<float>(
          amplitude * (0.4 * grain + 0.35 * a.at(y, x) + 0.25 * b.at(y, x)));
    }
  }
  return a;
}

enum class ShapeKind { kEllipse, kRect, kTriangle };

struct Shape {
  ShapeKind kind;
  double cx, cy, a, b, angle;
  double vx[3], vy[3];

  bool Contains(double px, double py) const {
    if (kind == ShapeKind::kTriangle) {
      auto cross = [&](int i, int j) {
        return (vx[j] - vx[i]) * (py - vy[i]) - (vy[j] - vy[i]) * (px - vx[i]);
      };
      const double d0 = cross(0, 1), d1 = cross(1, 2), d2 = cross(2, 0);
      const bool neg = d0 < 0 || d1 < 0 || d2 < 0;
      const bool pos = d0 > 0 || d1 > 0 || d2 > 0;
      return !(neg && pos);
    }
    const double dx = px - cx, dy = py - cy;
    const double u = dx * std::cos(angle) + dy * std::sin(angle);
    const double v = -dx * std::sin(angle) + dy * std::cos(angle);
    if (kind == ShapeKind::kEllipse) return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    return std::abs(u) <= a && std::abs(v) <= b;
  }
};

}  // namespace

uint64_t ProceduralImageSeed(uint64_t seed, int index) {
  return DeriveSeed(seed, static_cast<uint64_t>(index));
}

RgbImage GenerateProceduralImage(const ProceduralParams& params, uint64_t seed) {
  const int s = params.image_size;
  if (s < kMinImageSide) {
    throw Error(ErrorCode::kInvalidArgument, "procedural image_size too small");
  }
  Rng rng(seed);
  RgbImage img(s, s);

  const Color c0 = RandomColor(rng);
  const Color c1 = RandomColor(rng);
  const double theta = rng.Uniform(0.0, 2.0 * std::numbers::pi);
  const Plane bg_tex = Texture(s, rng.Uniform(0.08, 0.15), rng);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const double u = ((x + 0.5 - s / 2.0) * std::cos(theta) +
                        (y + 0.5 - s / 2.0) * std::sin(theta)) / s + 0.5;
      const double t = std::clamp(u, 0.0, 1.0);
      const double tex = bg_tex.at(y, x);
      img.at(y, x, 0) = static_cast<float>(c0.r + (c1.r - c0.r) * t + tex);
      img.at(y, x, 1) = static_cast<float>(c0.g + (c1.g - c0.g) * t + tex);
      img.at(y, x, 2) = static_cast<float>(c0.b + (c1.b - c0.b) * t + tex);
    }
  }

  const int n_shapes = rng.UniformInt(params.min_shapes, params.max_shapes);
  for (int i = 0; i < n_shapes; ++i) {
    Shape shape{};
    shape.kind = static_cast<ShapeKind>(rng.UniformInt(0, 2));
    shape.cx = rng.Uniform(0.15, 0.85) * s;
    shape.cy = rng.Uniform(0.15, 0.85) * s;
    shape.a = rng.Uniform(0.10, 0.28) * s;
    shape.b = rng.Uniform(0.10, 0.28) * s;
    shape.angle = rng.Uniform(0.0, std::numbers::pi);
    for (int v = 0; v < 3; ++v) {
      const double phi = shape.angle + v * 2.0 * std::numbers::pi / 3.0 +
                         rng.Uniform(-0.4, 0.4);
      const double r = rng.Uniform(0.14, 0.32) * s;
      shape.vx[v] = shape.cx + r * std::cos(phi);
      shape.vy[v] = shape.cy + r * std::sin(phi);
    }
    // Keep shapes distinguishable from what lies underneath.
    const int ix = std::clamp(static_cast<int>(shape.cx), 0, s - 1);
    const int iy = std::clamp(static_cast<int>(shape.cy), 0, s - 1);
    const double under = 0.299 * img.at(iy, ix, 0) + 0.587 * img.at(iy, ix, 1) +
                         0.114 * img.at(iy, ix, 2);
    Color color = RandomColor(rng);
    for (int attempt = 0; attempt < 64 && std::abs(color.luma() - under) < 0.45;
         ++attempt) {
      const Color candidate = RandomColor(rng);
      if (std::abs(candidate.luma() - under) > std::abs(color.luma() - under)) {
        color = candidate;
      }
    }
    const Plane tex = Texture(s, rng.Uniform(0.08, 0.15), rng);
    for (int y = 0; y < s; ++y) {
      for (int x = 0; x < s; ++x) {
        if (!shape.Contains(x + 0.5, y + 0.5)) continue;
        const double t = tex.at(y, x);
        img.at(y, x, 0) = static_cast<float>(color.r + t);
        img.at(y, x, 1) = static_cast<float>(color.g + t);
        img.at(y, x, 2) = static_cast<float>(color.b + t);
      }
    }
  }
  img.Clamp();
  return img;
}

Manifest GenProceduralDataset(int count, uint64_t seed,
                              const ProceduralParams& params,
                              const std::filesystem::path& out_dir) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw Error(ErrorCode::kIoError, "cannot create directory " + out_dir.string());
  }
  Manifest manifest{seed, params.image_size, {}};
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%05d.png", i);
    SaveImage(GenerateProceduralImage(params, ProceduralImageSeed(seed, i)),
              out_dir / name);
    manifest.files.emplace_back(name);
  }
  nlohmann::json doc = {{"generator", "procedural_shapes"},
                        {"seed", seed},
                        {"image_size", params.image_size},
                        {"min_shapes", params.min_shapes},
                        {"max_shapes", params.max_shapes},
                        {"files", manifest.files}};
  std::ofstream out(out_dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write manifest");
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::kIoError, "cannot write manifest");
  return manifest;
}

DatasetSplit LoadDatasetSplit(const DatasetConfig& cfg, int image_size) {
  const int needed = cfg.train_count + cfg.eval_count;
  std::vector<RgbImage> pool;
  if (cfg.source_dir.empty()) {
    const ProceduralParams params{image_size, cfg.min_shapes, cfg.max_shapes};
    for (int i = 0; i < needed; ++i) {
      pool.push_back(GenerateProceduralImage(params, ProceduralImageSeed(cfg.seed, i)));
    }
  } else {
    const std::filesystem::path dir(cfg.source_dir);
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
      throw Error(ErrorCode::kNotFound, "dataset directory not found: " + cfg.source_dir);
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".png") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (static_cast<int>(files.size()) < needed) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dataset has " + std::to_string(files.size()) +
                      " images, need " + std::to_string(needed));
    }
    for (const auto& f : files) {
      RgbImage img = LoadImage(f);
      pool.push_back(ResizeBilinear(img, image_size, image_size));
    }
  }
  // Fisher-Yates with the split seed.
  Rng rng(Mix64(cfg.split_seed));
  for (int i = static_cast<int>(pool.size()) - 1; i > 0; --i) {
    std::swap(pool[i], pool[rng.UniformInt(0, i)]);
  }
  DatasetSplit split;
  for (int i = 0; i < cfg.train_count; ++i) split.train.push_back(std::move(pool[i]));
  for (int i = 0; i < cfg.eval_count; ++i) {
    split.eval.push_back(std::move(pool[cfg.train_count + i]));
  }
  return split;
}

}  // namespace gmv
