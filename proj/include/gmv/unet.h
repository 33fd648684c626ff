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

// Noise-prediction U-Net: sinusoidal time embedding with a 2-layer MLP,
// GroupNorm/SiLU residual blocks, single-head self-attention at configured
// resolutions, stride-2 downsampling and nearest-neighbour upsampling.
//
// The encoder half (time MLP, input conv, down path, middle block) is its
// own module so the control branch can hold an exact copy of it.

#ifndef GMV_UNET_H_
#define GMV_UNET_H_

#include <cstdint>
#include <vector>

#include <torch/torch.h>

#include "gmv/config.h"

namespace gmv {

torch::Tensor SinusoidalEmbedding(const torch::Tensor& t, int dim);

class AttentionBlockImpl : public torch::nn::Module {
 public:
  AttentionBlockImpl(int channels, int groups);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::GroupNorm norm_{nullptr};
  torch::nn::Conv2d qkv_{nullptr};
  torch::nn::Conv2d proj_{nullptr};
};
TORCH_MODULE(AttentionBlock);

class ResBlockImpl : public torch::nn::Module {
 public:
  ResBlockImpl(int in_channels, int out_channels, int temb_dim, int groups,
               bool attention);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& temb);

 private:
  torch::nn::GroupNorm norm1_{nullptr};
  torch::nn::Conv2d conv1_{nullptr};
  torch::nn::Linear temb_proj_{nullptr};
  torch::nn::GroupNorm norm2_{nullptr};
  torch::nn::Conv2d conv2_{nullptr};
  torch::nn::Conv2d skip_{nullptr};
  AttentionBlock attn_{nullptr};
};
TORCH_MODULE(ResBlock);

class DownsampleImpl : public torch::nn::Module {
 public:
  explicit DownsampleImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv_{nullptr};
};
TORCH_MODULE(Downsample);

class UpsampleImpl : public torch::nn::Module {
 public:
  explicit UpsampleImpl(int channels);
  torch::Tensor forward(const torch::Tensor& x);

 private:
  torch::nn::Conv2d conv_{nullptr};
};
TORCH_MODULE(Upsample);

// Time-gated linear map on per-channel spatial means: out = G(t) [u, 1],
// G(t) a 3 x (inputs + 1) matrix read from the time embedding. Group norm
// removes exactly these means from every normalized path, so the output
// offset needs its own route.
class MeanHeadImpl : public torch::nn::Module {
 public:
  MeanHeadImpl(int temb_dim, int inputs);
  // temb: [B,temb_dim]; u: [B,inputs]. Returns [B,3].
  torch::Tensor forward(const torch::Tensor& temb, const torch::Tensor& u);

  torch::nn::Linear& proj() { return proj_; }

 private:
  int inputs_;
  torch::nn::Linear proj_{nullptr};
};
TORCH_MODULE(MeanHead);

// Additive corrections for the decoder inputs: one per encoder skip tensor
// plus one for the middle block output, and an optional [B,3] offset added
// to the output mean.
struct ControlResiduals {
  std::vector<torch::Tensor> skips;
  torch::Tensor middle;
  torch::Tensor mean;
};

struct EncoderOutput {
  std::vector<torch::Tensor> skips;
  torch::Tensor middle;
  torch::Tensor temb;
};

class UNetEncoderImpl : public torch::nn::Module {
 public:
  explicit UNetEncoderImpl(const ArchitectureConfig& arch);

  // `hint`, when defined, is added to the input convolution's output.
  EncoderOutput forward(const torch::Tensor& x, const torch::Tensor& t,
                        const torch::Tensor& hint = {});

  const std::vector<int>& skip_channels() const { return skip_channels_; }
  int middle_channels() const { return middle_channels_; }

 private:
  ArchitectureConfig arch_;
  torch::nn::Linear time1_{nullptr};
  torch::nn::Linear time2_{nullptr};
  torch::nn::Conv2d conv_in_{nullptr};
  torch::nn::ModuleList down_;
  ResBlock mid1_{nullptr};
  ResBlock mid2_{nullptr};
  std::vector<int> skip_channels_;
  int middle_channels_ = 0;
};
TORCH_MODULE(UNetEncoder);

class UNetImpl : public torch::nn::Module {
 public:
  explicit UNetImpl(const ArchitectureConfig& arch);

  // x: [B,3,H,W] in diffusion space; t: [B] int64 timesteps in [1, T].
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& t,
                        const ControlResiduals* residuals = nullptr);

  const ArchitectureConfig& arch() const { return arch_; }
  UNetEncoder& encoder() { return encoder_; }

 private:
  ArchitectureConfig arch_;
  UNetEncoder encoder_{nullptr};
  torch::nn::ModuleList up_;
  torch::nn::GroupNorm out_norm_{nullptr};
  torch::nn::Conv2d out_conv_{nullptr};
  MeanHead mean_head_{nullptr};
};
TORCH_MODULE(UNet);

// Deterministic re-initialization from the portable RNG: weights uniform in
// +-1/sqrt(fan_in), biases zero, norm scales one.
void InitParameters(torch::nn::Module& module, uint64_t seed);

}  // namespace gmv

#endif  // GMV_UNET_H_
