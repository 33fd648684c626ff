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

// Conditioning branch: a trainable copy of the base encoder whose per-skip
// and middle outputs reach the frozen base decoder through 1x1 couplings
// initialized to exactly zero. The condition (machine-decoded pixels) enters
// through a small conv stack added after the copy's input convolution. A
// zero-initialized mean coupling maps the spatial means of the condition
// features and of the input to an output mean offset.

#ifndef GMV_CONTROL_NET_H_
#define GMV_CONTROL_NET_H_

#include <cstdint>

#include <torch/torch.h>

#include "gmv/unet.h"

namespace gmv {

class ControlNetImpl : public torch::nn::Module {
 public:
  ControlNetImpl(const ArchitectureConfig& arch);

  // Condition image [B,3,H,W] in [-1,1] -> [B,base_channels,H,W].
  torch::Tensor EncodeCondition(const torch::Tensor& condition);

  // Residuals for UNet::forward given precomputed condition features.
  ControlResiduals forward(const torch::Tensor& x, const torch::Tensor& t,
                           const torch::Tensor& condition_features);

  UNetEncoder& encoder() { return encoder_; }
  torch::nn::ModuleList& couplings() { return couplings_; }
  MeanHead& mean_coupling() { return mean_coupling_; }
  const ArchitectureConfig& arch() const { return arch_; }

 private:
  ArchitectureConfig arch_;
  torch::nn::Conv2d cond1_{nullptr};
  torch::nn::Conv2d cond2_{nullptr};
  torch::nn::Conv2d cond3_{nullptr};
  UNetEncoder encoder_{nullptr};
  torch::nn::ModuleList couplings_;
  MeanHead mean_coupling_{nullptr};
};
TORCH_MODULE(ControlNet);

// Builds a branch for `base`: encoder copied bitwise, condition encoder drawn
// from `seed`, couplings zero. Throws kMismatch on an architecture mismatch.
ControlNet InitControlBranch(UNet& base, uint64_t seed);

// Noise prediction through base + branch.
torch::Tensor ApplyControl(UNet& base, ControlNet& branch, const torch::Tensor& z_t,
                           const torch::Tensor& t,
                           const torch::Tensor& condition_features);

}  // namespace gmv

#endif  // GMV_CONTROL_NET_H_
