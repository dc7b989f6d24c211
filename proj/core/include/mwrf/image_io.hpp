// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Image and volume targets, plus the PSNR metric.
//
// Images are held as [0,1] doubles, interleaved row-major. Pixel codes are
// divided by the format maximum with no transfer curve applied, so an 8-bit
// PNG round-trips exactly. Volumes use a small raw float32 container.

#ifndef MWRF_IMAGE_IO_HPP
#define MWRF_IMAGE_IO_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mwrf/field.hpp"
#include "mwrf/matrix.hpp"

namespace mwrf {

struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  int channels = 1;
  std::vector<double> data;  // (y * width + x) * channels + c

  Image() = default;
  Image(std::size_t h, std::size_t w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(h * w * static_cast<std::size_t>(c), fill) {}

  double& at(std::size_t y, std::size_t x, int c) {
    return data[(y * width + x) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }
  double at(std::size_t y, std::size_t x, int c) const {
    return data[(y * width + x) * static_cast<std::size_t>(channels) + static_cast<std::size_t>(c)];
  }

  Matrix channel(int c) const;
  static Image from_channels(std::span<const Matrix> channels);
};

// Reads PNG (any bit depth; palette expanded, alpha dropped) or binary
// PGM/PPM (P5/P6). Throws Io on unreadable or unsupported files.
Image read_image(const std::filesystem::path& path);

enum class Transfer { kNone, kSrgb };

// Values are clamped to [0,1] and stored as 8-bit. kSrgb applies the sRGB
// encoding curve first (used for rendered linear radiance). The format follows
// the extension: .png, .pgm or .ppm.
void write_image(const std::filesystem::path& path, const Image& image,
                 Transfer transfer = Transfer::kNone);

// Rec. 601 luma.
Image to_gray(const Image& image);
double linear_to_srgb(double v);

// Mean squared error; throws ShapeMismatch on different sizes and EmptyInput
// on empty spans.
double mse(std::span<const double> a, std::span<const double> b);
// 10 * log10(1 / MSE) for data on [0,1]. Identical inputs give +infinity.
double psnr(std::span<const double> a, std::span<const double> b);
double psnr(const Image& a, const Image& b);

// Dense multi-channel volume ("MWVG"): u16 version, u32 H, W, D, C, then
// float32 values channel-major, each channel in Grid3 order.
std::vector<Grid3> read_volume(const std::filesystem::path& path);
void write_volume(const std::filesystem::path& path, std::span<const Grid3> channels);

}  // namespace mwrf

#endif  // MWRF_IMAGE_IO_HPP
