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

// Image quality metrics: PSNR, SSIM, Frechet distance and kernel MMD over
// image embeddings.

#ifndef GMV_METRICS_H_
#define GMV_METRICS_H_

#include <string>

#include <Eigen/Dense>

#include "gmv/image.h"

namespace gmv {

inline constexpr double kPsnrCap = 99.0;

// 10*log10(1/MSE) over all pixels and channels; kPsnrCap when MSE == 0.
double Psnr(const RgbImage& a, const RgbImage& b);
double MeanSquaredError(const RgbImage& a, const RgbImage& b);

// Single-scale SSIM on luma, 11x11 Gaussian window (sigma 1.5), averaged
// over window positions that lie fully inside the image.
double Ssim(const RgbImage& a, const RgbImage& b);

struct Embedding {
  Eigen::MatrixXd features;  // n x d
  std::string embedder_id;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Sample mean and unbiased (n-1) covariance, symmetrized.
GaussianFit FitGaussian(const Embedding& e);
GaussianFit FitGaussian(const Eigen::MatrixXd& rows);

// Eigenvalues above this (and below zero) are treated as rounding noise.
inline constexpr double kEigenClip = -1e-8;

double Fid(const GaussianFit& a, const GaussianFit& b);

// (x.y/d + 1)^3
double PolynomialKernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct KidResult {
  double mean = 0.0;
  double std_err = 0.0;
  int blocks = 0;
};

// Unbiased MMD^2 with the cubic polynomial kernel, averaged over
// floor(n/m) consecutive blocks of m = min(n, max_block) rows.
KidResult Kid(const Embedding& x, const Embedding& y, int max_block = 100);
KidResult Kid(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
              int max_block = 100);

}  // namespace gmv

#endif  // GMV_METRICS_H_
