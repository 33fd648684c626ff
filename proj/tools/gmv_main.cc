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

// Command-line front end for the codec, the diffusion decoder and the
// evaluation harness.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmv/checkpoint.h"
#include "gmv/config.h"
#include "gmv/dataset.h"
#include "gmv/error.h"
#include "gmv/experiment.h"
#include "gmv/icm_codec.h"
#include "gmv/image.h"
#include "gmv/rate_points.h"
#include "gmv/trainer.h"

namespace {

using gmv::Error;
using gmv::ErrorCode;

void PrintError(const std::string& code, const std::string& message) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
}

gmv::ExperimentConfig ConfigOrDefault(const std::string& path) {
  return path.empty() ? gmv::ExperimentConfig{} : gmv::LoadConfig(path);
}

std::function<void(int64_t, double)> StepLogger(const std::string& stage, int every) {
  return [stage, every](int64_t step, double loss) {
    if (every > 0 && step % every == 0) {
      std::printf("%s step %lld loss %.6f\n", stage.c_str(),
                  static_cast<long long>(step), loss);
      std::fflush(stdout);
    }
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative human decoding from machine-oriented bitstreams"};
  app.require_subcommand(1);

  // gen-data
  int count = 1;
  uint64_t seed = 1;
  int size = 64;
  std::string out;
  auto* gen = app.add_subcommand("gen-data", "Write a procedural image dataset");
  gen->add_option("--count", count)->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed);
  gen->add_option("--size", size)->check(CLI::Range(gmv::kMinImageSide, 4096));
  gen->add_option("--out", out)->required();

  // encode
  std::string in_path, config_path;
  auto* enc = app.add_subcommand("encode", "Encode an image to a .gmvb bitstream");
  enc->add_option("--in", in_path)->required();
  enc->add_option("--out", out)->required();
  enc->add_option("--config", config_path, "experiment config; its codec section is used");

  // decode-machine
  std::string bitstream;
  auto* dm = app.add_subcommand("decode-machine", "Decode the machine-oriented image");
  dm->add_option("--bitstream", bitstream)->required();
  dm->add_option("--out", out)->required();

  // decode-human
  std::string base_ckpt, control_ckpt, sampler = "ddim", cc = "on";
  int steps = 50;
  uint64_t sample_seed = 11;
  auto* dh = app.add_subcommand("decode-human", "Generate the human-oriented image");
  dh->add_option("--bitstream", bitstream)->required();
  dh->add_option("--base-ckpt", base_ckpt)->required();
  dh->add_option("--control-ckpt", control_ckpt)->required();
  dh->add_option("--sampler", sampler)->check(CLI::IsMember({"ddim", "ddpm"}));
  dh->add_option("--steps", steps)->check(CLI::PositiveNumber);
  dh->add_option("--seed", sample_seed);
  dh->add_option("--cc", cc)->check(CLI::IsMember({"on", "off"}));
  dh->add_option("--out", out)->required();

  // train-base / train-control
  std::string resume;
  int64_t train_steps = -1;
  auto* tb = app.add_subcommand("train-base", "Train the unconditional diffusion model");
  tb->add_option("--config", config_path)->required();
  tb->add_option("--out", out)->required();
  tb->add_option("--resume", resume);
  tb->add_option("--steps", train_steps, "total steps (default: from config)");
  auto* tc = app.add_subcommand("train-control", "Train the control branch on a frozen base");
  tc->add_option("--config", config_path)->required();
  tc->add_option("--base-ckpt", base_ckpt)->required();
  tc->add_option("--out", out)->required();
  tc->add_option("--resume", resume);
  tc->add_option("--steps", train_steps, "total steps (default: from config)");

  // eval
  std::string report_path, csv_path;
  auto* ev = app.add_subcommand("eval", "Evaluate both decoding paths on the eval split");
  ev->add_option("--config", config_path)->required();
  ev->add_option("--base-ckpt", base_ckpt)->required();
  ev->add_option("--control-ckpt", control_ckpt)->required();
  ev->add_option("--report", report_path)->required();
  ev->add_option("--csv", csv_path);

  // import-rd / compare / plot-rd
  std::string reference, metric_name, stem = "rd";
  auto* imp = app.add_subcommand("import-rd", "Validate an RD CSV and print it normalized");
  imp->add_option("--csv", csv_path)->required();
  auto* cmp = app.add_subcommand("compare", "Bitrate deltas against a reference codec");
  cmp->add_option("--csv", csv_path)->required();
  cmp->add_option("--reference", reference)->required();
  auto* plot = app.add_subcommand("plot-rd", "Plot RD curves as SVG");
  plot->add_option("--csv", csv_path)->required();
  plot->add_option("--metric", metric_name, "single metric; default: all five");
  plot->add_option("--out", out, "output file (single metric) or directory")->required();
  plot->add_option("--stem", stem);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return 2;
  }

  try {
    if (*gen) {
      gmv::ProceduralParams params;
      params.image_size = size;
      const gmv::Manifest m = gmv::GenProceduralDataset(count, seed, params, out);
      std::printf("wrote %zu images to %s\n", m.files.size(), out.c_str());
    } else if (*enc) {
      const gmv::ExperimentConfig cfg = ConfigOrDefault(config_path);
      const gmv::RgbImage img = gmv::LoadImage(in_path);
      const gmv::MachineBitstream bs = gmv::EncodeMachine(img, cfg.codec);
      const std::vector<uint8_t> bytes = bs.Serialize();
      gmv::WriteFileBytes(out, bytes);
      std::printf("%zu bytes, %.6f bpp\n", bytes.size(), gmv::RateBpp(bs));
    } else if (*dm) {
      const gmv::MachineBitstream bs =
          gmv::MachineBitstream::Parse(gmv::ReadFileBytes(bitstream));
      gmv::SaveImage(gmv::DecodeMachine(bs), out);
    } else if (*dh) {
      if (std::filesystem::path(bitstream).extension() != ".gmvb") {
        throw Error(ErrorCode::kInvalidArgument, "--bitstream must be a .gmvb file");
      }
      const std::vector<uint8_t> bytes = gmv::ReadFileBytes(bitstream);
      gmv::SamplingModels models = gmv::LoadSamplingModels(base_ckpt, control_ckpt);
      gmv::SamplingConfig sampling = models.config.sampling;
      sampling.sampler = sampler;
      sampling.steps = steps;
      sampling.seed = sample_seed;
      sampling.cc = cc == "on";
      gmv::SaveImage(gmv::DecodeHuman(bytes, models, sampling), out);
    } else if (*tb) {
      const gmv::ExperimentConfig cfg = gmv::LoadConfig(config_path);
      const gmv::DatasetSplit split = gmv::LoadDatasetSplit(cfg.dataset, cfg.arch.image_size);
      gmv::TrainOptions opts;
      opts.out = out;
      opts.resume = resume;
      opts.steps = train_steps;
      opts.checkpoint_every = cfg.training.log_every;
      opts.on_step = StepLogger("base", cfg.training.log_every);
      const gmv::TrainResult r = gmv::TrainBase(cfg, split.train, opts);
      std::printf("base checkpoint %s at step %lld\n", out.c_str(),
                  static_cast<long long>(r.final_step));
    } else if (*tc) {
      const gmv::ExperimentConfig cfg = gmv::LoadConfig(config_path);
      const gmv::DatasetSplit split = gmv::LoadDatasetSplit(cfg.dataset, cfg.arch.image_size);
      const std::vector<gmv::RgbImage> conditions = gmv::MachineDecodes(split.train, cfg.codec);
      gmv::TrainOptions opts;
      opts.out = out;
      opts.resume = resume;
      opts.steps = train_steps;
      opts.checkpoint_every = cfg.training.log_every;
      opts.on_step = StepLogger("control", cfg.training.log_every);
      const gmv::TrainResult r =
          gmv::TrainControl(cfg, base_ckpt, split.train, conditions, opts);
      std::printf("control checkpoint %s at step %lld\n", out.c_str(),
                  static_cast<long long>(r.final_step));
    } else if (*ev) {
      const gmv::ExperimentConfig cfg = gmv::LoadConfig(config_path);
      const gmv::DatasetSplit split = gmv::LoadDatasetSplit(cfg.dataset, cfg.arch.image_size);
      const gmv::EvalReport report = gmv::RunEval(cfg, base_ckpt, control_ckpt, split.eval);
      const std::string text = gmv::ReportToJson(report);
      gmv::WriteFileBytes(report_path, std::vector<uint8_t>(text.begin(), text.end()));
      if (!csv_path.empty()) {
        gmv::WriteRdCsv(gmv::ReportRatePoints(report, cfg.eval.metrics), csv_path);
      }
      std::printf("machine_bpp %.6f extension_bpp %.1f total_bpp %.6f\n",
                  report.machine_bpp, report.extension_bpp, report.total_bpp);
    } else if (*imp) {
      std::fputs(gmv::FormatRdCsv(gmv::ImportRdCsv(csv_path)).c_str(), stdout);
    } else if (*cmp) {
      const auto points = gmv::ImportRdCsv(csv_path);
      std::fputs(gmv::FormatComparison(gmv::CompareBitrates(points, reference)).c_str(),
                 stdout);
    } else if (*plot) {
      const auto points = gmv::ImportRdCsv(csv_path);
      if (!metric_name.empty()) {
        const auto metric = gmv::ParseMetric(metric_name);
        if (!metric) throw Error(ErrorCode::kInvalidArgument, "unknown metric " + metric_name);
        gmv::PlotRd(points, *metric, out);
        std::printf("%s\n", out.c_str());
      } else {
        std::filesystem::create_directories(out);
        for (const auto& p : gmv::PlotRdAll(points, out, stem)) {
          std::printf("%s\n", p.c_str());
        }
      }
    }
  } catch (const Error& e) {
    PrintError(gmv::ErrorCodeName(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return 1;
  }
  return 0;
}
