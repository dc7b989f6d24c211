// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Masked-wavelet vector-matrix field.
//
// A volume field with resolution H x W x D holds, for every output channel c
// and rank r,
//
//   plane x: H x W    line x: D
//   plane y: W x D    line y: H
//   plane z: H x D    line z: W
//
// and reconstructs
//
//   G_c[i,j,k] = sum_r  Px[i,j] lx[k] + Py[j,k] ly[i] + Pz[i,k] lz[j]
//
// where every plane P = T(H(M) * W * s) is the transform T (multi-level
// inverse DWT, inverse DCT or identity) of its masked, level-scaled
// coefficients, and every line l = H(m) * v is masked but stays in the
// spatial domain.
//
// An image field is the 2D special case: one H x W plane per channel and no
// lines.

#ifndef MWRF_FIELD_HPP
#define MWRF_FIELD_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mwrf/matrix.hpp"
#include "mwrf/wavelet.hpp"

namespace mwrf {

enum class DomainMode : std::uint8_t { kWavelet = 0, kDct = 1, kSpatial = 2 };
enum class FieldKind : std::uint8_t { kVolume = 0, kImage = 1 };
enum class Axis : std::uint8_t { kX = 0, kY = 1, kZ = 2 };

std::string_view to_string(DomainMode mode);
DomainMode parse_domain_mode(std::string_view text);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
// Tie at exactly zero keeps the coefficient.
inline double heaviside(double z) { return z >= 0.0 ? 1.0 : 0.0; }

struct FieldConfig {
  FieldKind kind = FieldKind::kVolume;
  DomainMode domain = DomainMode::kWavelet;
  WaveletName wavelet = WaveletName::kBior44;
  Padding padding = Padding::kSymmetric;
  int levels = 4;
  bool level_scaling = true;
  int n_rank = 1;
  // Logical extent; images use {H, W, 1}.
  std::array<std::size_t, 3> resolution{16, 16, 16};
  int channels = 1;

  // Resolution after rounding up to a multiple of 2^levels (wavelet domain
  // only; the depth of an image stays 1).
  std::array<std::size_t, 3> padded_resolution() const;
  WaveletSpec wavelet_spec() const { return WaveletSpec::make(wavelet, padding); }
  void validate() const;

  static FieldConfig image(std::size_t height, std::size_t width, int channels,
                           DomainMode domain = DomainMode::kWavelet, int levels = 4,
                           WaveletName wavelet = WaveletName::kBior44);
  static FieldConfig volume(std::array<std::size_t, 3> resolution, int n_rank,
                            int channels, DomainMode domain = DomainMode::kWavelet,
                            int levels = 4, WaveletName wavelet = WaveletName::kBior44);
};

// Trainable array with an element-wise mask. Lines use cols == 1.
struct MaskedArray {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> coeffs;
  std::vector<double> logits;

  std::size_t size() const { return coeffs.size(); }
};

// Per-subband multiplier applied before synthesis: 1 for the approximation,
// 1 / (levels - j + 2) for the details of level j (j = 1 finest).
struct SubbandScale {
  int level = 0;
  SubbandKind kind = SubbandKind::kLL;
  double scale = 1.0;
};
std::vector<SubbandScale> scale_table(int levels);
// Element-wise scale for a packed rows x cols plane; all ones when disabled.
Matrix scale_matrix(std::size_t rows, std::size_t cols, int levels, bool enabled);

class TensorField {
 public:
  TensorField() = default;
  // Zero coefficients, all mask logits +1 (every coefficient kept).
  explicit TensorField(const FieldConfig& config);

  // Coefficients uniform in [-range / s, range / s] per element, lines in
  // [-range, range]; logits +1.
  static TensorField random(const FieldConfig& config, std::uint64_t seed,
                            double range = 0.1);

  const FieldConfig& config() const { return config_; }
  const WaveletSpec& wavelet() const { return wavelet_; }
  const std::array<std::size_t, 3>& padded() const { return padded_; }

  std::vector<MaskedArray>& planes() { return planes_; }
  const std::vector<MaskedArray>& planes() const { return planes_; }
  std::vector<MaskedArray>& lines() { return lines_; }
  const std::vector<MaskedArray>& lines() const { return lines_; }

  std::size_t plane_index(int channel, Axis axis, int rank) const;
  std::size_t line_index(int channel, Axis axis, int rank) const;
  Axis plane_axis(std::size_t plane_index) const;
  int plane_channel(std::size_t plane_index) const;

  const Matrix& plane_scale(std::size_t plane_index) const;

  // Planes then lines; the order used by serialization and the codec.
  std::size_t tensor_count() const { return planes_.size() + lines_.size(); }
  MaskedArray& tensor(std::size_t t) {
    return t < planes_.size() ? planes_[t] : lines_[t - planes_.size()];
  }
  const MaskedArray& tensor(std::size_t t) const {
    return t < planes_.size() ? planes_[t] : lines_[t - planes_.size()];
  }

  std::size_t mask_element_count() const;

 private:
  FieldConfig config_;
  WaveletSpec wavelet_;
  std::array<std::size_t, 3> padded_{};
  std::vector<MaskedArray> planes_;
  std::vector<MaskedArray> lines_;
  std::array<Matrix, 3> scales_;  // per plane axis
};

// Forward value of the masked parameters: H(logits) * params.
std::vector<double> apply_mask(std::span<const double> params,
                               std::span<const double> logits);

// Transform from the coefficient domain to the spatial domain.
Matrix plane_to_spatial(Matrix coeffs, const FieldConfig& config, const WaveletSpec& spec);
// T(H(M) * W * s) for one plane.
Matrix reconstruct_plane(const TensorField& field, std::size_t plane_index);
std::vector<double> masked_line(const TensorField& field, std::size_t line_index);

// Dense voxel grid of one channel, index (i * W + j) * D + k.
struct Grid3 {
  std::size_t h = 0, w = 0, d = 0;
  std::vector<double> values;

  Grid3() = default;
  Grid3(std::size_t h_, std::size_t w_, std::size_t d_)
      : h(h_), w(w_), d(d_), values(h_ * w_ * d_, 0.0) {}
  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[(i * w + j) * d + k]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values[(i * w + j) * d + k];
  }
  // Trilinear interpolation with p in [0,1]^3 mapped to [0, n-1] per axis.
  double trilinear(const std::array<double, 3>& p) const;
};

using Point3 = std::array<double, 3>;

// Fixed-point maps used by every sampler: [0,1] -> [0, n-1].
struct Lerp1 {
  std::size_t i0 = 0, i1 = 0;
  double t = 0.0;
};
Lerp1 lerp_coords(double p, std::size_t n);

// Field with every plane already synthesized; cheap to sample repeatedly.
class SpatialField {
 public:
  explicit SpatialField(const TensorField& field);

  const FieldConfig& config() const { return config_; }
  const std::vector<Matrix>& planes() const { return planes_; }
  const std::vector<std::vector<double>>& lines() const { return lines_; }

  // Writes `channels` values for p. Points outside [0,1]^3 are clamped when
  // `clamp` is set, otherwise OutOfDomain is thrown.
  void sample(const Point3& p, std::span<double> out, bool clamp = false) const;

 private:
  FieldConfig config_;
  std::size_t n_rank_ = 1;
  std::vector<Matrix> planes_;
  std::vector<std::vector<double>> lines_;
};

// One grid per channel at the logical resolution.
std::vector<Grid3> reconstruct_grid(const TensorField& field);
// One matrix per channel at the logical image resolution (image fields).
std::vector<Matrix> reconstruct_image(const TensorField& field);
// Row i holds the channel values at points[i].
Matrix sample(const TensorField& field, std::span<const Point3> points, bool clamp = false);

// Sum of sigmoid(logit) over every mask element (planes and lines).
double sparsity_loss(const TensorField& field);
// Sum of heaviside(logit); diagnostic companion of sparsity_loss.
double hard_mask_sum(const TensorField& field);

// Mask groups: detail level j (1..levels) uses id j, the approximation (or a
// whole untransformed plane) id 0, lines id 254, and a single ungrouped
// stream id 255.
namespace group {
inline constexpr std::uint8_t kApprox = 0;
inline constexpr std::uint8_t kLines = 254;
inline constexpr std::uint8_t kAll = 255;
}  // namespace group

std::string group_name(std::uint8_t id);
// Coding order: finest detail level first, then the approximation, then
// lines (if any).
std::vector<std::uint8_t> mask_groups(const TensorField& field);

// (tensor, element) positions of one mask group in canonical order: plane by
// plane, and within a plane the HL, LH, HH blocks of the level row-major.
struct MaskRef {
  std::uint32_t tensor = 0;
  std::uint32_t element = 0;
};
std::vector<MaskRef> group_elements(const TensorField& field, std::uint8_t group_id);

struct GroupSparsity {
  std::uint8_t id = 0;
  std::size_t zeros = 0;
  std::size_t count = 0;
  double fraction() const { return count ? static_cast<double>(zeros) / count : 0.0; }
};

struct SparsityReport {
  double total = 0.0;  // zero fraction over every mask element
  std::size_t zeros = 0;
  std::size_t count = 0;
  double soft_sum = 0.0;  // sum sigmoid(logit)
  double hard_sum = 0.0;  // sum heaviside(logit)
  std::vector<GroupSparsity> groups;
};
SparsityReport sparsity_report(const TensorField& field);

// Uncompressed little-endian container ("MWFD"), float32 payload.
std::vector<std::uint8_t> serialize_field(const TensorField& field);
TensorField deserialize_field(std::span<const std::uint8_t> bytes);
void save_field(const TensorField& field, const std::filesystem::path& path);
TensorField load_field(const std::filesystem::path& path);

}  // namespace mwrf

#endif  // MWRF_FIELD_HPP
