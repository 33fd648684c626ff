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

#include "gmv/experiment.h"

#include <algorithm>

#include <json.hpp>

#include "gmv/color_controller.h"
#include "gmv/dataset.h"
#include "gmv/diffusion.h"
#include "gmv/embedder.h"
#include "gmv/error.h"
#include "gmv/icm_codec.h"
#include "gmv/metrics.h"
#include "gmv/rng.h"
#include "gmv/trainer.h"

namespace gmv {
namespace {

constexpr uint64_t kImageSeedSalt = 0x68756d616eull;

bool SameArch(const ArchitectureConfig& a, const ArchitectureConfig& b) {
  return a.image_size == b.image_size && a.base_channels == b.base_channels &&
         a.channel_mults == b.channel_mults && a.num_res_blocks == b.num_res_blocks &&
         a.attention_resolutions == b.attention_resolutions &&
         a.time_embed_dim == b.time_embed_dim && a.groups == b.groups;
}

std::vector<RgbImage> ToModelSize(std::span<const RgbImage> images, int size) {
  std::vector<RgbImage> out;
  for (const RgbImage& img : images) {
    out.push_back(img.height() == size && img.width() == size
                      ? img
                      : ResizeBilinear(img, size, size));
  }
  return out;
}

ImageScores Score(const RgbImage& img, const RgbImage& ref, const Embedder& emb) {
  return {Psnr(img, ref), Ssim(img, ref), PerceptualDistance(img, ref, emb)};
}

}  // namespace

uint64_t ImageSeed(uint64_t global_seed, int index) {
  return DeriveSeed(global_seed ^ kImageSeedSalt, static_cast<uint64_t>(index));
}

std::vector<RgbImage> SampleImages(SamplingModels& models,
                                   std::span<const RgbImage> conditions,
                                   std::span<const uint64_t> seeds,
                                   const SamplingConfig& sampling) {
  const ExperimentConfig& cfg = models.config;
  const int size = cfg.arch.image_size;
  const NoiseSchedule sched = MakeSchedule(
      cfg.training.timesteps, cfg.training.beta_start, cfg.training.beta_end);
  torch::NoGradGuard no_grad;
  NoisePredictor predictor;
  if (conditions.empty()) {
    predictor = MakePredictor(models.base);
  } else {
    if (!models.branch) {
      throw Error(ErrorCode::kInvalidArgument, "conditional sampling needs a control checkpoint");
    }
    if (conditions.size() != seeds.size()) {
      throw Error(ErrorCode::kShapeMismatch, "one seed per condition required");
    }
    const torch::Tensor features =
        models.branch->EncodeCondition(ImagesToTensor(conditions));
    predictor = MakePredictor(models.base, models.branch, features);
  }
  torch::Tensor x;
  if (sampling.sampler == "ddim") {
    x = SampleDdim(predictor, sched, seeds, size, sampling.steps, sampling.clip_denoised);
  } else if (sampling.sampler == "ddpm") {
    x = SampleDdpm(predictor, sched, seeds, size);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown sampler " + sampling.sampler);
  }
  return SamplesToImages(x);
}

RgbImage DecodeHuman(std::span<const uint8_t> bitstream, SamplingModels& models,
                     const SamplingConfig& sampling) {
  const RgbImage machine = DecodeMachine(MachineBitstream::Parse(bitstream));
  const int size = models.config.arch.image_size;
  const std::vector<RgbImage> cond = ToModelSize({&machine, 1}, size);
  const uint64_t seed = sampling.seed;
  RgbImage generated = SampleImages(models, cond, {&seed, 1}, sampling)[0];
  if (generated.height() != machine.height() || generated.width() != machine.width()) {
    generated = ResizeBilinear(generated, machine.height(), machine.width());
  }
  return ColorControllerPipeline(sampling.cc, generated, machine);
}

TrainingPaths RunTraining(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir,
                          const ProgressFn& progress) {
  const DatasetSplit split = LoadDatasetSplit(cfg.dataset, cfg.arch.image_size);
  if (split.train.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  std::filesystem::create_directories(out_dir);
  TrainingPaths paths{out_dir / "base.gmvc", out_dir / "control.gmvc"};

  TrainOptions base_opts;
  base_opts.out = paths.base;
  if (progress) {
    base_opts.on_step = [&](int64_t step, double loss) { progress("base", step, loss); };
  }
  TrainBase(cfg, split.train, base_opts);

  const std::vector<RgbImage> conditions = MachineDecodes(split.train, cfg.codec);
  TrainOptions ctrl_opts;
  ctrl_opts.out = paths.control;
  if (progress) {
    ctrl_opts.on_step = [&](int64_t step, double loss) { progress("control", step, loss); };
  }
  TrainControl(cfg, paths.base, split.train, conditions, ctrl_opts);
  return paths;
}

EvalReport RunEval(const ExperimentConfig& cfg,
                   const std::filesystem::path& base_path,
                   const std::filesystem::path& control_path,
                   std::span<const RgbImage> eval_images) {
  if (eval_images.empty()) throw Error(ErrorCode::kInvalidArgument, "empty evaluation set");
  SamplingModels models = LoadSamplingModels(base_path, control_path);
  if (!models.branch) throw Error(ErrorCode::kInvalidArgument, "control checkpoint required");
  if (!SameArch(models.config.arch, cfg.arch)) {
    throw Error(ErrorCode::kMismatch, "checkpoint architecture differs from config");
  }
  const int size = cfg.arch.image_size;
  const int n = static_cast<int>(eval_images.size());
  const std::vector<RgbImage> originals = ToModelSize(eval_images, size);
  const auto embedder = MakeEmbedder(cfg.eval.embedder, cfg.eval.embedder_seed);

  EvalReport report;
  report.embedder_id = embedder->id();
  std::vector<RgbImage> machine;
  for (int i = 0; i < n; ++i) {
    const std::vector<uint8_t> bytes = EncodeMachine(originals[i], cfg.codec).Serialize();
    const MachineBitstream bs = MachineBitstream::Parse(bytes);
    ImageRecord rec;
    rec.index = i;
    rec.machine_bpp = RateBpp(bytes.size(), originals[i].width(), originals[i].height());
    rec.extension_bpp = 0.0;
    report.images.push_back(rec);
    machine.push_back(DecodeMachine(bs));
  }

  std::vector<uint64_t> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = ImageSeed(cfg.sampling.seed, i);
  std::vector<RgbImage> mismatched_conditions(machine.begin() + 1, machine.end());
  mismatched_conditions.push_back(machine.front());

  std::map<std::string, std::vector<RgbImage>> outputs;
  outputs["machine"] = machine;
  const int batch = std::max(1, cfg.eval.batch_size);
  for (int start = 0; start < n; start += batch) {
    const int count = std::min(batch, n - start);
    const std::span<const uint64_t> s(seeds.data() + start, count);
    const std::span<const RgbImage> c(machine.data() + start, count);
    for (RgbImage& img : SampleImages(models, c, s, cfg.sampling)) {
      outputs["human_nocc"].push_back(std::move(img));
    }
    if (cfg.eval.include_unconditional) {
      for (RgbImage& img : SampleImages(models, {}, s, cfg.sampling)) {
        outputs["unconditional"].push_back(std::move(img));
      }
      const std::span<const RgbImage> mc(mismatched_conditions.data() + start, count);
      for (RgbImage& img : SampleImages(models, mc, s, cfg.sampling)) {
        outputs["mismatched"].push_back(std::move(img));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    outputs["human_cc"].push_back(ApplyColorController(outputs["human_nocc"][i], machine[i]));
  }

  const Embedding ref = Embed(originals, *embedder);
  const GaussianFit ref_fit = FitGaussian(ref);
  for (const auto& [name, images] : outputs) {
    SeriesAggregate agg;
    for (int i = 0; i < n; ++i) {
      const ImageScores s = Score(images[i], originals[i], *embedder);
      report.images[i].scores[name] = s;
      agg.psnr += s.psnr / n;
      agg.ssim += s.ssim / n;
      agg.lpips += s.lpips / n;
    }
    const Embedding e = Embed(images, *embedder);
    if (n >= 2) {
      agg.fid = Fid(FitGaussian(e), ref_fit);
      const KidResult kid = Kid(e, ref, cfg.eval.kid_block_size);
      agg.kid = kid.mean;
      agg.kid_std_err = kid.std_err;
    }
    report.series[name] = agg;
  }
  for (const ImageRecord& rec : report.images) report.machine_bpp += rec.machine_bpp / n;
  report.extension_bpp = 0.0;
  report.total_bpp = report.machine_bpp + report.extension_bpp;
  CheckReport(report);
  return report;
}

void CheckReport(const EvalReport& report) {
  for (const ImageRecord& rec : report.images) {
    if (rec.extension_bpp != 0.0) {
      throw Error(ErrorCode::kMismatch, "nonzero extension rate for image " +
                                            std::to_string(rec.index));
    }
  }
  if (report.extension_bpp != 0.0 ||
      report.total_bpp != report.machine_bpp + report.extension_bpp) {
    throw Error(ErrorCode::kMismatch, "report bitrate accounting is inconsistent");
  }
}

std::vector<RatePoint> ReportRatePoints(const EvalReport& report,
                                        std::span<const std::string> metrics) {
  struct Label {
    std::string series;
    std::string codec;
    double bpp;
  };
  std::vector<Label> labels = {
      {"machine", "machine", report.machine_bpp},
      {"human_cc", "human_cc_total", report.total_bpp},
      {"human_nocc", "human_nocc_total", report.total_bpp},
      {"human_cc", "human_cc_extension", report.extension_bpp},
      {"human_nocc", "human_nocc_extension", report.extension_bpp},
  };
  if (report.series.contains("unconditional")) {
    labels.push_back({"unconditional", "unconditional", 0.0});
  }
  std::vector<RatePoint> points;
  for (const std::string& name : metrics) {
    const std::optional<Metric> metric = ParseMetric(name);
    if (!metric) throw Error(ErrorCode::kInvalidArgument, "unknown metric " + name);
    for (const Label& l : labels) {
      const SeriesAggregate& a = report.series.at(l.series);
      double value = 0.0;
      switch (*metric) {
        case Metric::kPsnr: value = a.psnr; break;
        case Metric::kSsim: value = a.ssim; break;
        case Metric::kLpips: value = a.lpips; break;
        case Metric::kFid: value = a.fid; break;
        case Metric::kKid: value = a.kid; break;
        default: throw Error(ErrorCode::kInvalidArgument, "not an evaluation metric: " + name);
      }
      points.push_back({l.codec, *metric, l.bpp, value});
    }
  }
  return points;
}

std::string ReportToJson(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["machine_bpp"] = report.machine_bpp;
  j["extension_bpp"] = report.extension_bpp;
  j["total_bpp"] = report.total_bpp;
  j["embedder"] = report.embedder_id;
  nlohmann::ordered_json series = nlohmann::ordered_json::object();
  for (const auto& [name, a] : report.series) {
    series[name] = {{"psnr", a.psnr}, {"ssim", a.ssim}, {"lpips", a.lpips},
                    {"fid", a.fid},   {"kid", a.kid},   {"kid_std_err", a.kid_std_err}};
  }
  j["series"] = series;
  nlohmann::ordered_json images = nlohmann::ordered_json::array();
  for (const ImageRecord& rec : report.images) {
    nlohmann::ordered_json r;
    r["index"] = rec.index;
    r["machine_bpp"] = rec.machine_bpp;
    r["extension_bpp"] = rec.extension_bpp;
    for (const auto& [name, s] : rec.scores) {
      r[name] = {{"psnr", s.psnr}, {"ssim", s.ssim}, {"lpips", s.lpips}};
    }
    images.push_back(r);
  }
  j["images"] = images;
  return j.dump(2) + "\n";
}

}  // namespace gmv
