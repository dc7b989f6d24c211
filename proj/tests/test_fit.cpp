// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "mwrf/fit.hpp"

namespace mwrf {
namespace {

const std::filesystem::path kData = MWRF_TEST_DATA_DIR;

Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t n) {
  Image out(n, n, img.channels);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    }
  }
  return out;
}

TEST(FitImage, ConstantImageKeepsOnlyTheApproximation) {
  // At L4 a 64x64 constant needs only the 4x4 approximation block.
  const Image target(64, 64, 1, 0.5);
  TrainConfig t;
  t.iters = 500;
  t.lr = 0.2;
  t.lambda_m = 1e-10;
  const FitResult r = fit_image(target, FieldConfig::image(64, 64, 1), t);
  EXPECT_GT(r.final_psnr, 50.0);
  const SparsityReport s = sparsity_report(r.field);
  EXPECT_GE(s.total, 0.99);
  EXPECT_LE(s.total, 1.0 - 16.0 / 4096.0 + 1e-12);
}

TEST(FitImage, NoPressureKeepsMasks) {
  const Image target = crop(read_image(kData / "camera.png"), 200, 240, 64);
  TrainConfig t;
  t.iters = 300;
  t.lambda_m = 0.0;
  const FitResult r = fit_image(target, FieldConfig::image(64, 64, 1), t);
  EXPECT_LE(sparsity_report(r.field).total, 0.05);
  EXPECT_TRUE(std::isfinite(r.final_psnr));
}

TEST(FitImage, PressureIncreasesSparsity) {
  const Image target = crop(read_image(kData / "moon.png"), 128, 128, 64);
  TrainConfig t;
  t.iters = 300;
  t.lr = 0.2;
  t.mask_lr = 0.02;
  double prev = -1.0;
  for (double lambda : {0.0, 1e-6, 1e-5}) {
    t.lambda_m = lambda;
    const double s = sparsity_report(fit_image(target, FieldConfig::image(64, 64, 1), t).field).total;
    EXPECT_GE(s, prev) << "lambda " << lambda;
    prev = s;
  }
  EXPECT_GT(prev, 0.5);
}

TEST(FitImage, DeterministicForASeed) {
  const Image target = crop(read_image(kData / "brick.png"), 0, 0, 32);
  TrainConfig t;
  t.iters = 30;
  t.seed = 7;
  const FitResult a = fit_image(target, FieldConfig::image(32, 32, 1, DomainMode::kWavelet, 2), t);
  const FitResult b = fit_image(target, FieldConfig::image(32, 32, 1, DomainMode::kWavelet, 2), t);
  EXPECT_EQ(serialize_field(a.field), serialize_field(b.field));
  EXPECT_EQ(a.trace.rows.size(), 30u);
}

TEST(FitImage, ShapeMismatch) {
  const Image target(16, 16, 1, 0.2);
  EXPECT_THROW(fit_image(target, FieldConfig::image(16, 32, 1, DomainMode::kWavelet, 2), TrainConfig{}), Error);
}

TEST(FitVolume, LearnsASmoothGrid) {
  std::vector<Grid3> target(1, Grid3(16, 16, 16));
  for (std::size_t i = 0; i < 16; ++i) {
    for (std::size_t j = 0; j < 16; ++j) {
      for (std::size_t k = 0; k < 16; ++k) target[0].at(i, j, k) = 0.5 + 0.25 * std::sin(0.3 * i) * std::cos(0.2 * k);
    }
  }
  TrainConfig t;
  t.iters = 200;
  t.batch = 2048;
  t.lr = 0.05;
  const FitResult r = fit_volume(target, FieldConfig::volume({16, 16, 16}, 2, 1, DomainMode::kWavelet, 2), t);
  EXPECT_GT(r.final_psnr, 25.0);
  EXPECT_NEAR(r.final_psnr, field_psnr(r.field, target), 1e-9);
}

TEST(FitRender, ImprovesOnASyntheticScene) {
  const VoxelScene scene = make_synthetic_scene(16, 1);
  RenderOptions opt;
  opt.n_samples = 24;
  const RenderTarget target = make_render_target(scene.radiance(), orbit_cameras(3, 1.8, 0.6, 12, 12), opt);
  TrainConfig t;
  t.iters = 40;
  t.batch = 128;
  t.lr = 0.05;
  t.render_samples = 24;
  const FieldConfig d = FieldConfig::volume({16, 16, 16}, 2, 1, DomainMode::kWavelet, 2);
  const FieldConfig c = FieldConfig::volume({16, 16, 16}, 2, 3, DomainMode::kWavelet, 2);
  const RenderFitResult r = fit_render(target, d, c, t);
  ASSERT_EQ(r.trace.rows.size(), 40u);
  EXPECT_TRUE(std::isfinite(r.final_psnr));
  EXPECT_LT(r.trace.rows.back().loss, r.trace.rows.front().loss);
}

}  // namespace
}  // namespace mwrf
