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

#include "gmv/metrics.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "gmv/error.h"

namespace gmv {
namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

void CheckSameShape(const RgbImage& a, const RgbImage& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorCode::kShapeMismatch, "image dimensions differ");
  }
}

std::array<double, kSsimWindow * kSsimWindow> GaussianWindow() {
  std::array<double, kSsimWindow * kSsimWindow> w{};
  const int r = kSsimWindow / 2;
  double sum = 0.0;
  for (int y = 0; y < kSsimWindow; ++y) {
    for (int x = 0; x < kSsimWindow; ++x) {
      const double d2 = (y - r) * (y - r) + (x - r) * (x - r);
      w[y * kSsimWindow + x] = std::exp(-d2 / (2.0 * kSsimSigma * kSsimSigma));
      sum += w[y * kSsimWindow + x];
    }
  }
  for (double& v : w) v /= sum;
  return w;
}

Eigen::MatrixXd SymmetricSqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "eigendecomposition failed");
  }
  Eigen::VectorXd ev = solver.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < kEigenClip) {
      throw Error(ErrorCode::kNumerical,
                  "covariance has eigenvalue " + std::to_string(ev[i]));
    }
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return solver.eigenvectors() * ev.asDiagonal() *
         solver.eigenvectors().transpose();
}

}  // namespace

double MeanSquaredError(const RgbImage& a, const RgbImage& b) {
  CheckSameShape(a, b);
  double sum = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i) {
    const double d = static_cast<double>(a.data()[i]) - b.data()[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.data().size());
}

double Psnr(const RgbImage& a, const RgbImage& b) {
  const double mse = MeanSquaredError(a, b);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double Ssim(const RgbImage& a, const RgbImage& b) {
  CheckSameShape(a, b);
  if (std::min(a.height(), a.width()) < kSsimWindow) {
    throw Error(ErrorCode::kInvalidArgument, "image too small for SSIM");
  }
  static const auto window = GaussianWindow();
  const Plane la = Luma(a);
  const Plane lb = Luma(b);
  const int ny = a.height() - kSsimWindow + 1;
  const int nx = a.width() - kSsimWindow + 1;
  double total = 0.0;
  for (int y0 = 0; y0 < ny; ++y0) {
    for (int x0 = 0; x0 < nx; ++x0) {
      double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
      for (int dy = 0; dy < kSsimWindow; ++dy) {
        for (int dx = 0; dx < kSsimWindow; ++dx) {
          const double w = window[dy * kSsimWindow + dx];
          const double va = la.at(y0 + dy, x0 + dx);
          const double vb = lb.at(y0 + dy, x0 + dx);
          mu_a += w * va;
          mu_b += w * vb;
          aa += w * va * va;
          bb += w * vb * vb;
          ab += w * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + kSsimC1) * (2.0 * cov + kSsimC2)) /
               ((mu_a * mu_a + mu_b * mu_b + kSsimC1) * (var_a + var_b + kSsimC2));
    }
  }
  return total / (static_cast<double>(ny) * nx);
}

GaussianFit FitGaussian(const Eigen::MatrixXd& rows) {
  const Eigen::Index n = rows.rows();
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "need at least 2 samples to fit a Gaussian");
  }
  GaussianFit fit;
  fit.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - fit.mean.transpose();
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);
  fit.cov = 0.5 * (cov + cov.transpose());
  return fit;
}

GaussianFit FitGaussian(const Embedding& e) { return FitGaussian(e.features); }

double Fid(const GaussianFit& a, const GaussianFit& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != b.cov.rows() ||
      a.cov.rows() != a.mean.size()) {
    throw Error(ErrorCode::kShapeMismatch, "Gaussian fits differ in dimension");
  }
  const Eigen::MatrixXd sqrt_a = SymmetricSqrt(a.cov);
  Eigen::MatrixXd inner = sqrt_a * b.cov * sqrt_a;
  inner = 0.5 * (inner + inner.transpose());
  const Eigen::MatrixXd cross = SymmetricSqrt(inner);
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.cov.trace() + b.cov.trace() - 2.0 * cross.trace();
  return std::max(0.0, mean_term + trace_term);
}

double PolynomialKernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double v = x.dot(y) / static_cast<double>(x.size()) + 1.0;
  return v * v * v;
}

KidResult Kid(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
              int max_block) {
  if (x.cols() != y.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "embeddings differ in dimension");
  }
  const Eigen::Index n = std::min(x.rows(), y.rows());
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "KID needs at least 2 samples per set");
  }
  const Eigen::Index m = std::min<Eigen::Index>(n, max_block);
  const Eigen::Index blocks = n / m;
  const double d = static_cast<double>(x.cols());
  std::vector<double> values;
  values.reserve(blocks);
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::MatrixXd bx = x.middleRows(blk * m, m);
    const Eigen::MatrixXd by = y.middleRows(blk * m, m);
    auto kernel = [d](const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
      Eigen::MatrixXd k = (p * q.transpose()).array() / d + 1.0;
      return Eigen::MatrixXd(k.array().cube());
    };
    const Eigen::MatrixXd kxx = kernel(bx, bx);
    const Eigen::MatrixXd kyy = kernel(by, by);
    const Eigen::MatrixXd kxy = kernel(bx, by);
    const double md = static_cast<double>(m);
    const double sxx = (kxx.sum() - kxx.trace()) / (md * (md - 1.0));
    const double syy = (kyy.sum() - kyy.trace()) / (md * (md - 1.0));
    const double sxy = kxy.sum() / (md * md);
    values.push_back(sxx + syy - 2.0 * sxy);
  }
  KidResult r;
  r.blocks = static_cast<int>(blocks);
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(blocks);
  if (blocks > 1) {
    double var = 0.0;
    for (double v : values) var += (v - r.mean) * (v - r.mean);
    var /= static_cast<double>(blocks - 1);
    r.std_err = std::sqrt(var / static_cast<double>(blocks));
  }
  return r;
}

KidResult Kid(const Embedding& x, const Embedding& y, int max_block) {
  return Kid(x.features, y.features, max_block);
}

}  // namespace gmv
