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

#include "gmv/control_net.h"

#include <cmath>

#include <ATen/CPUGeneratorImpl.h>
#include <functional>

#include <gtest/gtest.h>

#include "gmv/checkpoint.h"
#include "gmv/diffusion.h"
#include "gmv/error.h"
#include "gmv/schedule.h"
#include "test_util.h"

namespace gmv {
namespace {

using testing::TinyArch;

torch::Generator Gen(uint64_t seed) { return at::make_generator<at::CPUGeneratorImpl>(seed); }

UNet TinyUNet(uint64_t seed = 1) {
  UNet m(TinyArch());
  InitParameters(*m, seed);
  return m;
}

void Perturb(torch::nn::Module& module, uint64_t seed) {
  torch::NoGradGuard no_grad;
  auto gen = Gen(seed);
  for (auto& p : module.parameters()) p.add_(0.05 * torch::randn(p.sizes(), gen));
}

TEST(InitControlBranch, ZeroCouplingsAndEncoderCopy) {
  UNet base = TinyUNet();
  ControlNet branch = InitControlBranch(base, 3);
  EXPECT_EQ(branch->couplings()->size(), base->encoder()->skip_channels().size() + 1);
  for (const auto& p : branch->couplings()->parameters()) {
    EXPECT_EQ(p.abs().max().item<float>(), 0.0f);
  }
  for (const auto& p : branch->mean_coupling()->parameters()) {
    EXPECT_EQ(p.abs().max().item<float>(), 0.0f);
  }
  const auto base_params = base->encoder()->named_parameters();
  for (const auto& item : branch->encoder()->named_parameters()) {
    const torch::Tensor* src = base_params.find(item.key());
    ASSERT_NE(src, nullptr) << item.key();
    EXPECT_TRUE(torch::equal(item.value(), *src)) << item.key();
  }
}

TEST(InitControlBranch, SeededConditionEncoder) {
  UNet base = TinyUNet();
  ControlNet a = InitControlBranch(base, 3);
  ControlNet b = InitControlBranch(base, 3);
  ControlNet c = InitControlBranch(base, 4);
  EXPECT_EQ(ParamChecksum(*a), ParamChecksum(*b));
  EXPECT_NE(ParamChecksum(*a), ParamChecksum(*c));
}

TEST(InitControlBranch, ArchitectureMismatch) {
  UNet base = TinyUNet();
  ArchitectureConfig other = TinyArch();
  other.base_channels = 12;
  ControlNet wrong(other);
  // A branch built for another architecture cannot take this base's weights.
  TensorMap tensors = ModuleTensors(*base->encoder(), "");
  EXPECT_THROW(LoadModuleTensors(*wrong->encoder(), tensors, ""), Error);
}

TEST(EncodeCondition, ShapeContract) {
  UNet base = TinyUNet();
  ControlNet branch = InitControlBranch(base, 3);
  auto gen = Gen(1);
  const torch::Tensor cond = torch::rand({2, 3, 16, 16}, gen) * 2 - 1;
  const torch::Tensor f = branch->EncodeCondition(cond);
  EXPECT_EQ(f.sizes(), (std::vector<int64_t>{2, 8, 16, 16}));
  EXPECT_TRUE(torch::equal(f, branch->EncodeCondition(cond)));
  try {
    branch->EncodeCondition(torch::zeros({2, 3, 8, 8}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(ApplyControl, ZeroInitEquivalence) {
  UNet base = TinyUNet();
  Perturb(*base, 2);  // any base, trained or not
  ControlNet branch = InitControlBranch(base, 3);
  auto gen = Gen(4);
  const torch::Tensor z = torch::randn({3, 3, 16, 16}, gen);
  const torch::Tensor t = torch::tensor({1, 40, 100}, torch::kLong);
  const torch::Tensor features = branch->EncodeCondition(torch::rand({3, 3, 16, 16}, gen));
  torch::NoGradGuard no_grad;
  const torch::Tensor plain = base->forward(z, t);
  const torch::Tensor controlled = ApplyControl(base, branch, z, t, features);
  EXPECT_LE((plain - controlled).abs().max().item<float>(), 1e-5);
}

TEST(ApplyControl, ZeroInitSamplingEquivalence) {
  UNet base = TinyUNet();
  ControlNet branch = InitControlBranch(base, 3);
  const NoiseSchedule s = MakeSchedule(100, 1e-4, 0.02);
  auto gen = Gen(5);
  const torch::Tensor features = branch->EncodeCondition(torch::rand({2, 3, 16, 16}, gen));
  const std::vector<uint64_t> seeds = {7, 8};
  const torch::Tensor a = SampleDdim(MakePredictor(base), s, seeds, 16, 10, true);
  const torch::Tensor b = SampleDdim(MakePredictor(base, branch, features), s, seeds, 16, 10, true);
  EXPECT_LE((a - b).abs().max().item<float>(), 1e-5);
  const torch::Tensor c = SampleDdpm(MakePredictor(base), s, seeds, 16);
  const torch::Tensor d = SampleDdpm(MakePredictor(base, branch, features), s, seeds, 16);
  EXPECT_LE((c - d).abs().max().item<float>(), 1e-5);
}

TEST(ApplyControl, ZeroingOneCouplingRemovesItsContribution) {
  UNet base = TinyUNet();
  ControlNet branch = InitControlBranch(base, 3);
  Perturb(*branch, 6);  // stands in for a trained branch
  auto gen = Gen(7);
  const torch::Tensor z = torch::randn({2, 3, 16, 16}, gen);
  const torch::Tensor t = torch::tensor({5, 60}, torch::kLong);
  torch::NoGradGuard no_grad;
  const torch::Tensor features = branch->EncodeCondition(torch::rand({2, 3, 16, 16}, gen));
  ControlResiduals res = branch->forward(z, t, features);
  const size_t k = 1;
  res.skips[k] = torch::zeros_like(res.skips[k]);
  const torch::Tensor expected = base->forward(z, t, &res);
  for (auto& p : branch->couplings()[k]->parameters()) p.mul_(0.0);
  const torch::Tensor got = ApplyControl(base, branch, z, t, features);
  EXPECT_LE((expected - got).abs().max().item<float>(), 1e-6);
}

// Central difference on element 0 of a parameter that starts at zero.
void CheckZeroInitGradient(const std::function<torch::Tensor(ControlNet&)>& param) {
  UNet base = TinyUNet();
  Perturb(*base, 8);
  base->to(torch::kFloat64);
  ControlNet branch = InitControlBranch(base, 3);
  branch->to(torch::kFloat64);
  const NoiseSchedule s = MakeSchedule(100, 1e-4, 0.02);
  auto gen = Gen(9);
  const torch::Tensor z0 = torch::rand({2, 3, 16, 16}, gen, torch::kFloat64) * 2 - 1;
  const torch::Tensor cond = torch::rand({2, 3, 16, 16}, gen, torch::kFloat64) * 2 - 1;
  const NoiseDraws d = DrawNoise(z0, s.timesteps, gen);
  auto loss = [&] {
    const torch::Tensor f = branch->EncodeCondition(cond);
    return LossFromDraws(MakePredictor(base, branch, f), z0, d, s);
  };
  branch->zero_grad();
  loss().backward();
  torch::Tensor w = param(branch);
  ASSERT_EQ(w.view(-1)[0].item<double>(), 0.0);
  const double analytic = w.grad().view(-1)[0].item<double>();
  EXPECT_NE(analytic, 0.0);
  torch::NoGradGuard no_grad;
  const double h = 1e-3;
  torch::Tensor flat = w.view(-1);
  flat[0] = h;
  const double up = loss().item<double>();
  flat[0] = -h;
  const double down = loss().item<double>();
  flat[0] = 0.0;
  const double numeric = (up - down) / (2 * h);
  EXPECT_NE(numeric, 0.0);
  EXPECT_LE(std::abs(analytic - numeric) / std::abs(numeric), 1e-2)
      << analytic << " vs " << numeric;
}

TEST(ApplyControl, CouplingGradientNonzeroAtInit) {
  CheckZeroInitGradient(
      [](ControlNet& b) { return b->couplings()[0]->as<torch::nn::Conv2dImpl>()->weight; });
}

TEST(ApplyControl, MeanCouplingGradientNonzeroAtInit) {
  CheckZeroInitGradient([](ControlNet& b) { return b->mean_coupling()->proj()->bias; });
}

TEST(MeanHead, GatedLinearMap) {
  MeanHead head(4, 2);
  torch::NoGradGuard no_grad;
  head->proj()->weight.zero_();
  // Gates [[1,0,0.5],[0,2,0],[0,0,-1]] for every t.
  head->proj()->bias.copy_(torch::tensor({1.0f, 0.0f, 0.5f, 0.0f, 2.0f, 0.0f, 0.0f, 0.0f, -1.0f}));
  const torch::Tensor out = head->forward(torch::randn({2, 4}), torch::tensor({{3.0f, 4.0f}, {-1.0f, 0.0f}}));
  const torch::Tensor expected = torch::tensor({{3.5f, 8.0f, -1.0f}, {-0.5f, 0.0f, -1.0f}});
  EXPECT_LE((out - expected).abs().max().item<float>(), 1e-6);
}

TEST(MeanHead, CarriesInputMeanPastGroupNorm) {
  UNet base = TinyUNet();
  auto gen = Gen(12);
  const torch::Tensor z = torch::randn({2, 3, 16, 16}, gen);
  const torch::Tensor t = torch::tensor({100, 100}, torch::kLong);
  torch::NoGradGuard no_grad;
  torch::Tensor gate_bias;
  for (auto& item : base->named_parameters()) {
    if (item.key().find("mean_head") == std::string::npos) continue;
    item.value().zero_();
    if (item.key().ends_with("bias")) gate_bias = item.value();
  }
  // Without the head a uniform input shift barely reaches the output mean.
  const torch::Tensor blind = (base->forward(z + 0.5, t) - base->forward(z, t)).mean({2, 3});
  EXPECT_LT(blind.abs().max().item<float>(), 0.1f);
  // Identity gates pass it through exactly.
  gate_bias.copy_(torch::tensor({1.0f, 0.0f, 0.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f,
                                 0.0f, 0.0f, 1.0f, 0.0f}));
  const torch::Tensor passed = (base->forward(z + 0.5, t) - base->forward(z, t)).mean({2, 3});
  EXPECT_LE((passed - blind - 0.5).abs().max().item<float>(), 1e-4);
}

TEST(ApplyControl, ResidualShapeMismatch) {
  UNet base = TinyUNet();
  ControlResiduals res;
  res.skips = {torch::zeros({1, 8, 16, 16})};
  res.middle = torch::zeros({1, 16, 8, 8});
  EXPECT_THROW(base->forward(torch::zeros({1, 3, 16, 16}), torch::tensor({1}, torch::kLong), &res),
               Error);
}

}  // namespace
}  // namespace gmv
