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

#ifndef GMV_DATASET_H_
#define GMV_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gmv/config.h"
#include "gmv/image.h"

namespace gmv {

struct ProceduralParams {
  int image_size = 64;
  int min_shapes = 2;
  int max_shapes = 5;
};

// Textured ellipses, rectangles and triangles over a textured gradient.
// Texture is band-limited value noise. Deterministic in `seed`.
RgbImage GenerateProceduralImage(const ProceduralParams& params, uint64_t seed);

// Seed of image `index` in a procedural set generated from `seed`.
uint64_t ProceduralImageSeed(uint64_t seed, int index);

struct Manifest {
  uint64_t seed = 0;
  int image_size = 0;
  std::vector<std::string> files;
};

// Writes img_NNNNN.png files and manifest.json into out_dir.
Manifest GenProceduralDataset(int count, uint64_t seed,
                              const ProceduralParams& params,
                              const std::filesystem::path& out_dir);

struct DatasetSplit {
  std::vector<RgbImage> train;
  std::vector<RgbImage> eval;
};

// Procedural images when source_dir is empty, otherwise every *.png in
// source_dir (sorted by name, resized to image_size). The pool is shuffled
// with split_seed and cut into train/eval.
DatasetSplit LoadDatasetSplit(const DatasetConfig& cfg, int image_size);

}  // namespace gmv

#endif  // GMV_DATASET_H_
