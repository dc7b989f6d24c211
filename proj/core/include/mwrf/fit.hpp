// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Training loops: loss = reconstruction MSE + lambda_m * sum(sigmoid(M)).

#ifndef MWRF_FIT_HPP
#define MWRF_FIT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mwrf/error.hpp"
#include "mwrf/field.hpp"
#include "mwrf/image_io.hpp"
#include "mwrf/optim.hpp"
#include "mwrf/render.hpp"

namespace mwrf {

enum class FitTask { kImage2d, kVolume3d, kRender };
std::string_view to_string(FitTask task);
FitTask parse_fit_task(std::string_view text);

struct TrainConfig {
  std::size_t iters = 2000;
  // Points per step (volume3d) or rays per step (render); image2d always
  // uses every pixel.
  std::size_t batch = 4096;
  std::uint64_t seed = 0;
  double lambda_m = 0.0;
  double lr = 0.02;
  double lr_final_ratio = 0.1;
  // Learning rate of the mask logits; 0 uses `lr`.
  double mask_lr = 0.0;
  AdamOptions adam;
  // Trace cadence; the last iteration is always recorded.
  std::size_t log_every = 1;
  // Samples per ray for the render task.
  int render_samples = 64;
};

struct TraceRow {
  std::size_t iter = 0;
  double loss = 0.0;
  double psnr = 0.0;  // of the reconstruction term on this step's batch
  double sparsity_total = 0.0;
  std::vector<double> sparsity_groups;
  double lr = 0.0;
};

struct Trace {
  std::vector<std::string> group_names;
  std::vector<TraceRow> rows;

  // CSV with a schema line and a header row. Appending to an existing file
  // requires the same header; otherwise InvalidArgument is thrown.
  void write_csv(const std::filesystem::path& path, bool append = false) const;
};

class DivergedLoss : public Error {
 public:
  DivergedLoss(const std::string& what, Trace trace)
      : Error(ErrorCode::kDivergedLoss, what), trace_(std::move(trace)) {}
  const Trace& trace() const { return trace_; }

 private:
  Trace trace_;
};

struct FitResult {
  TensorField field;
  Trace trace;
  double final_psnr = 0.0;  // full reconstruction against the target
};

// `config` must describe an image field with target.channels channels and
// the target's height and width.
FitResult fit_image(const Image& target, const FieldConfig& config, const TrainConfig& train);
// Fits dense targets (one grid per channel) from uniformly drawn points.
FitResult fit_volume(const std::vector<Grid3>& target, const FieldConfig& config,
                     const TrainConfig& train);

// PSNR of a field's reconstruction against an image or volume target. A
// volume target of another size is compared at its own voxel positions.
double field_psnr(const TensorField& field, const Image& target);
double field_psnr(const TensorField& field, const std::vector<Grid3>& target);

struct RenderTarget {
  std::vector<Camera> cameras;
  std::vector<Image> images;  // linear radiance, 3 channels
  RenderOptions options;
};
// Renders `scene` from `cameras` to build a training target.
RenderTarget make_render_target(const RadianceFn& scene, std::vector<Camera> cameras,
                                const RenderOptions& options);

struct RenderFitResult {
  TensorField density;
  TensorField color;
  Trace trace;
  double final_psnr = 0.0;  // over every training pixel
};
RenderFitResult fit_render(const RenderTarget& target, const FieldConfig& density_config,
                           const FieldConfig& color_config, const TrainConfig& train);

}  // namespace mwrf

#endif  // MWRF_FIT_HPP
