// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Separable 2D discrete wavelet transform with pluggable filter banks.
//
// Conventions:
//   * Filters are stored in the usual convolution form (decomposition and
//     reconstruction taps, zero-padded to a common length).
//   * Analysis correlates the boundary-extended signal with the reversed
//     decomposition taps and keeps every second sample; the lowpass output
//     sits on even positions and the highpass output on odd positions.
//   * Synthesis zero-inserts (upsamples) each band onto its own sample
//     parity, extends it with the same boundary rule and convolves with the
//     reconstruction taps.
//   * Coefficients of a multi-level decomposition are stored "packed" in a
//     single matrix of the input's shape: LL_L in the top-left corner, and for
//     every level j the HL_j / LH_j / HH_j blocks to the right of, below, and
//     diagonally from the level-j approximation block.

#ifndef MWRF_WAVELET_HPP
#define MWRF_WAVELET_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mwrf/matrix.hpp"

namespace mwrf {

enum class WaveletName : std::uint8_t {
  kHaar = 0,
  kDb4 = 1,
  kCoif1 = 2,
  kBior44 = 3,
  kRbior44 = 4,
};

enum class Padding : std::uint8_t {
  kSymmetric = 0,  // whole-sample reflection about the first and last sample
  kPeriodic = 1,
  kZero = 2,
};

// How synthesis upsamples a band before filtering. Only zero insertion gives
// perfect reconstruction with the tap tables below; the value is written into
// file headers so readers know which operator produced the coefficients.
enum class Upsampling : std::uint8_t { kZeroInsertion = 0 };

std::string_view to_string(WaveletName name);
std::string_view to_string(Padding padding);
WaveletName parse_wavelet_name(std::string_view text);
Padding parse_padding(std::string_view text);

struct WaveletSpec {
  WaveletName name = WaveletName::kBior44;
  std::vector<double> analysis_lo;
  std::vector<double> analysis_hi;
  std::vector<double> synthesis_lo;
  std::vector<double> synthesis_hi;
  // Shift aligning the filters so that the lowpass of sample 2n is centred on
  // position 2n (required for symmetric extension).
  int offset = 0;
  Padding padding = Padding::kSymmetric;

  std::size_t filter_length() const { return analysis_lo.size(); }
  bool orthogonal() const;
  bool symmetric_taps() const;

  // Builds the filter bank. Without an explicit padding the family's default
  // is used: symmetric for the symmetric families (haar, bior4.4, rbior4.4),
  // periodic for db4 / coif1. Combinations that cannot reconstruct perfectly
  // throw UnsupportedPadding.
  static WaveletSpec make(WaveletName name, std::optional<Padding> padding = {});
  static Padding default_padding(WaveletName name);
  static bool supports(WaveletName name, Padding padding);
};

enum class SubbandKind : std::uint8_t { kLL = 0, kHL = 1, kLH = 2, kHH = 3 };

struct Subbands2D {
  Matrix ll, hl, lh, hh;
  int level = 1;
};

// Single-level transforms.
Subbands2D dwt2(const Matrix& x, const WaveletSpec& spec);
Matrix idwt2(const Subbands2D& bands, const WaveletSpec& spec);
// Transpose of idwt2 (not the analysis transform for biorthogonal banks).
Subbands2D idwt2_adjoint(const Matrix& g, const WaveletSpec& spec);

// Block of a packed multi-level decomposition.
struct SubbandBlock {
  int level = 0;  // 1 = finest; the approximation block carries level = levels
  SubbandKind kind = SubbandKind::kLL;
  std::size_t row0 = 0, col0 = 0, rows = 0, cols = 0;
};

// All blocks of a packed layout: details from the finest level (HL1, LH1,
// HH1, HL2, ...) followed by the approximation block.
std::vector<SubbandBlock> subband_layout(std::size_t rows, std::size_t cols, int levels);

// Validates that an H x W matrix admits `levels` decomposition levels.
void check_decomposable(std::size_t rows, std::size_t cols, int levels);

struct MultiLevelCoeffs {
  Matrix packed;
  int levels = 0;

  Matrix block(const SubbandBlock& b) const {
    return packed.block(b.row0, b.col0, b.rows, b.cols);
  }
  std::vector<SubbandBlock> layout() const {
    return subband_layout(packed.rows(), packed.cols(), levels);
  }
};

MultiLevelCoeffs wavedec2(const Matrix& x, const WaveletSpec& spec, int levels);
Matrix waverec2(const MultiLevelCoeffs& coeffs, const WaveletSpec& spec);

// In-place variants on packed layouts; these are what the field and the
// gradient engine use.
void wavedec2_inplace(Matrix& m, const WaveletSpec& spec, int levels);
void waverec2_inplace(Matrix& m, const WaveletSpec& spec, int levels);
void waverec2_adjoint_inplace(Matrix& m, const WaveletSpec& spec, int levels);

// 1D building blocks (exposed for tests). `lo` and `hi` have x.size()/2
// entries.
void analysis_1d(std::span<const double> x, const WaveletSpec& spec,
                 std::span<double> lo, std::span<double> hi);
void synthesis_1d(std::span<const double> lo, std::span<const double> hi,
                  const WaveletSpec& spec, std::span<double> x);
void synthesis_1d_adjoint(std::span<const double> g, const WaveletSpec& spec,
                          std::span<double> lo, std::span<double> hi);

// Orthonormal type-II 2D DCT and its inverse.
Matrix dct2(const Matrix& x);
Matrix idct2(const Matrix& x);

}  // namespace mwrf

#endif  // MWRF_WAVELET_HPP
