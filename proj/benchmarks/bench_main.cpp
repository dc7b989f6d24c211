// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "mwrf/codec.hpp"
#include "mwrf/field.hpp"
#include "mwrf/render.hpp"
#include "mwrf/wavelet.hpp"

namespace {

using namespace mwrf;

Matrix random_matrix(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (double& v : m.values()) v = u(rng);
  return m;
}

// A field with roughly `keep` of its mask bits set.
TensorField masked_field(const FieldConfig& cfg, double keep) {
  TensorField f = TensorField::random(cfg, 3, 1.0);
  std::mt19937_64 rng(4);
  std::bernoulli_distribution k(keep);
  for (std::size_t t = 0; t < f.tensor_count(); ++t) {
    for (double& l : f.tensor(t).logits) l = k(rng) ? 1.0 : -1.0;
  }
  return f;
}

void BM_Wavedec2(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix x = random_matrix(n);
  const WaveletSpec spec = WaveletSpec::make(WaveletName::kBior44);
  for (auto _ : state) benchmark::DoNotOptimize(wavedec2(x, spec, 4));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Wavedec2)->Arg(64)->Arg(256)->Arg(512);

void BM_Waverec2InPlace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const WaveletSpec spec = WaveletSpec::make(WaveletName::kBior44);
  Matrix m = random_matrix(n);
  for (auto _ : state) {
    waverec2_inplace(m, spec, 4);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_Waverec2InPlace)->Arg(64)->Arg(256)->Arg(512);

void BM_Compress(benchmark::State& state) {
  const TensorField f = masked_field(FieldConfig::image(256, 256, 1), state.range(0) / 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(compress(f));
}
BENCHMARK(BM_Compress)->Arg(5)->Arg(50);

void BM_Decompress(benchmark::State& state) {
  const auto bytes = compress(masked_field(FieldConfig::image(256, 256, 1), state.range(0) / 100.0)).bytes;
  for (auto _ : state) benchmark::DoNotOptimize(decompress(bytes));
}
BENCHMARK(BM_Decompress)->Arg(5)->Arg(50);

void BM_SampleVolume(benchmark::State& state) {
  const TensorField f = masked_field(FieldConfig::volume({64, 64, 64}, 4, 3, DomainMode::kWavelet, 3), 0.2);
  const SpatialField s(f);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point3> pts(4096);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  std::vector<double> out(3);
  for (auto _ : state) {
    for (const auto& p : pts) s.sample(p, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pts.size()));
}
BENCHMARK(BM_SampleVolume);

void BM_RenderImage(benchmark::State& state) {
  const VoxelScene scene = make_synthetic_scene(32, 1);
  Camera cam;
  cam.width = cam.height = 32;
  RenderOptions opt;
  opt.n_samples = 64;
  for (auto _ : state) benchmark::DoNotOptimize(render_image(cam, scene.radiance(), opt));
  state.SetItemsProcessed(state.iterations() * 32 * 32);
}
BENCHMARK(BM_RenderImage);

}  // namespace

BENCHMARK_MAIN();
