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

#ifndef GMV_CHECKPOINT_H_
#define GMV_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <torch/torch.h>

#include "gmv/config.h"
#include "gmv/control_net.h"
#include "gmv/unet.h"

namespace gmv {

using TensorMap = std::map<std::string, torch::Tensor>;

// Tensor groups use name prefixes: "model/", "ema/", "adam_m/", "adam_v/".
struct Checkpoint {
  std::string kind;  // "base" or "control"
  ExperimentConfig config;
  int64_t step = 0;
  bool ema = false;
  // Checksum of the weights used for sampling (the "ema/" group when present).
  uint64_t sampling_checksum = 0;
  // Control checkpoints only: sampling checksum of the base they were trained
  // against.
  uint64_t base_checksum = 0;
  TensorMap tensors;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// FNV-1a 64 over names, shapes and float32 data in name order.
uint64_t TensorChecksum(const TensorMap& tensors);
uint64_t ParamChecksum(torch::nn::Module& module);

// Detached clones of the module parameters, keys prefixed.
TensorMap ModuleTensors(torch::nn::Module& module, const std::string& prefix);
// Copies `prefix`+name into every parameter. Missing names or shape
// differences throw kMismatch.
void LoadModuleTensors(torch::nn::Module& module, const TensorMap& tensors,
                       const std::string& prefix);
// Group used for sampling: "ema/" when present, else "model/".
std::string SamplingPrefix(const Checkpoint& ckpt);

struct SamplingModels {
  UNet base{nullptr};
  ControlNet branch{nullptr};  // null when no control checkpoint was given
  ExperimentConfig config;
};

// Loads sampling weights, frozen and in eval mode. A control checkpoint whose
// base checksum differs from the loaded base throws kMismatch.
SamplingModels LoadSamplingModels(const std::filesystem::path& base_path,
                                  const std::filesystem::path& control_path = {});

}  // namespace gmv

#endif  // GMV_CHECKPOINT_H_
