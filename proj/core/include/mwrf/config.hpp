// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration files and the rate-distortion sweep harness.

#ifndef MWRF_CONFIG_HPP
#define MWRF_CONFIG_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mwrf/codec.hpp"
#include "mwrf/fit.hpp"

namespace mwrf {

// Everything `mwrf fit` needs. Stored as JSON with the same key names; keys
// left out keep these defaults.
struct RunConfig {
  FitTask task = FitTask::kImage2d;
  std::filesystem::path target;  // image (image2d), MWVG volume (volume3d), scene JSON or empty (render)

  // Field.
  int n_rank = 0;  // required for volume3d and render
  std::array<std::size_t, 3> resolution{0, 0, 0};  // 0: take from the target
  int levels = 4;
  WaveletName wavelet = WaveletName::kBior44;
  std::optional<Padding> padding;  // default per wavelet
  DomainMode domain = DomainMode::kWavelet;
  bool level_scaling = true;
  bool gray = false;  // convert an image target to one luma channel

  TrainConfig train;

  // Render task: synthetic scene and views.
  std::size_t scene_resolution = 32;
  std::size_t views = 8;
  std::size_t view_size = 32;

  std::filesystem::path output;     // field file
  std::filesystem::path trace_csv;  // optional

  // Throws InvalidArgument on inconsistent values.
  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& config);

// Field configuration for an image target of the given size.
FieldConfig image_field_config(const RunConfig& run, std::size_t height, std::size_t width,
                               int channels);
FieldConfig volume_field_config(const RunConfig& run, std::array<std::size_t, 3> resolution,
                                int channels);

// Loads the image target with the run's channel handling.
Image load_image_target(const RunConfig& run);

// One representation in a sweep, written as
//   spatial | dct | wavelet-L<levels>[:<wavelet>][:noscale]
struct SweepVariant {
  DomainMode domain = DomainMode::kWavelet;
  int levels = 4;
  WaveletName wavelet = WaveletName::kBior44;
  bool level_scaling = true;

  std::string label() const;
  static SweepVariant parse(const std::string& text);
};

struct SweepConfig {
  RunConfig base;  // task must be image2d or volume3d
  std::vector<SweepVariant> variants;
  std::vector<double> lambdas;
  CodecOptions codec;
};

SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepRow {
  SweepVariant variant;
  double lambda_m = 0.0;
  std::uint64_t seed = 0;
  std::size_t iters = 0;
  std::size_t size_bytes = 0;
  std::size_t mask_bytes = 0;
  std::size_t payload_bytes = 0;
  double psnr = 0.0;            // trained field
  double psnr_quantized = 0.0;  // after compress + decompress
  double sparsity = 0.0;
};

// Fits every (variant, lambda) cell in order and compresses the result.
// `on_row`, when set, is called after each cell.
std::vector<SweepRow> rd_sweep(const SweepConfig& config,
                               const std::function<void(const SweepRow&)>& on_row = {});

// Append-safe CSV, schema "# mwrf-rd-sweep v1".
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                     bool append = true);

}  // namespace mwrf

#endif  // MWRF_CONFIG_HPP
