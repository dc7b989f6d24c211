// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "mwrf/wavelet.hpp"

namespace mwrf {
namespace {

constexpr WaveletName kAll[] = {WaveletName::kHaar, WaveletName::kDb4, WaveletName::kCoif1,
                                WaveletName::kBior44, WaveletName::kRbior44};

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(rng);
  return m;
}

std::vector<Padding> paddings_for(WaveletName n) {
  std::vector<Padding> out;
  for (Padding p : {Padding::kSymmetric, Padding::kPeriodic, Padding::kZero}) {
    if (WaveletSpec::supports(n, p)) out.push_back(p);
  }
  return out;
}

TEST(Wavelet, HaarConstantBlock) {
  const auto spec = WaveletSpec::make(WaveletName::kHaar);
  const Subbands2D b = dwt2(Matrix(2, 2, 1.0), spec);
  EXPECT_NEAR(b.ll(0, 0), 2.0, 1e-12);
  EXPECT_NEAR(b.hl(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(b.lh(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(b.hh(0, 0), 0.0, 1e-12);

  const Matrix x = idwt2(b, spec);
  for (double v : x.values()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Wavelet, HaarCheckerboard) {
  // Hand computation: every 2x2 block of the checkerboard is [[1,0],[0,1]],
  // so LL = (1+0+0+1)/2 = 1, HH = (1-0-0+1)/2 = 1 up to sign, HL = LH = 0.
  Matrix x(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) x(r, c) = (r + c) % 2 == 0 ? 1.0 : 0.0;
  }
  const Subbands2D b = dwt2(x, WaveletSpec::make(WaveletName::kHaar));
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(b.ll.values()[i], 1.0, 1e-12);
    EXPECT_NEAR(std::abs(b.hh.values()[i]), 1.0, 1e-12);
    EXPECT_NEAR(b.hl.values()[i], 0.0, 1e-12);
    EXPECT_NEAR(b.lh.values()[i], 0.0, 1e-12);
  }
}

TEST(Wavelet, HaarImpulseRoundTrip) {
  const auto spec = WaveletSpec::make(WaveletName::kHaar);
  Subbands2D b{Matrix(1, 1), Matrix(1, 1), Matrix(1, 1), Matrix(1, 1), 1};
  b.hl(0, 0) = 1.0;
  const Matrix x = idwt2(b, spec);
  const Subbands2D back = dwt2(x, spec);
  EXPECT_NEAR(back.hl(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(back.ll(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(back.lh(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(back.hh(0, 0), 0.0, 1e-12);
  // Energy 1 spread over four samples of magnitude 1/2.
  for (double v : x.values()) EXPECT_NEAR(std::abs(v), 0.5, 1e-12);
}

TEST(Wavelet, ZeroSubbandsGiveZero) {
  for (WaveletName n : kAll) {
    const auto spec = WaveletSpec::make(n);
    Subbands2D b{Matrix(8, 8), Matrix(8, 8), Matrix(8, 8), Matrix(8, 8), 1};
    const Matrix x = idwt2(b, spec);
    for (double v : x.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Wavelet, FilterBankConditions) {
  for (WaveletName n : kAll) {
    const auto s = WaveletSpec::make(n);
    const std::size_t L = s.filter_length();
    ASSERT_EQ(s.analysis_hi.size(), L);
    ASSERT_EQ(s.synthesis_lo.size(), L);
    ASSERT_EQ(s.synthesis_hi.size(), L);
    // Lowpass DC gain sqrt(2), highpass zero DC gain.
    const double sqrt2 = std::sqrt(2.0);
    EXPECT_NEAR(std::accumulate(s.analysis_lo.begin(), s.analysis_lo.end(), 0.0), sqrt2, 1e-9);
    EXPECT_NEAR(std::accumulate(s.synthesis_lo.begin(), s.synthesis_lo.end(), 0.0), sqrt2, 1e-9);
    EXPECT_NEAR(std::accumulate(s.analysis_hi.begin(), s.analysis_hi.end(), 0.0), 0.0, 1e-9);
    EXPECT_NEAR(std::accumulate(s.synthesis_hi.begin(), s.synthesis_hi.end(), 0.0), 0.0, 1e-9);
    // Biorthogonality of the lowpass pair, with the analysis taps stored
    // reversed: sum_k a[L-1-k] s[k + 2m] = delta[m].
    for (int m = -static_cast<int>(L) / 2; m <= static_cast<int>(L) / 2; ++m) {
      double acc = 0.0;
      for (int k = 0; k < static_cast<int>(L); ++k) {
        const int j = k + 2 * m;
        if (j >= 0 && j < static_cast<int>(L)) acc += s.analysis_lo[L - 1 - static_cast<std::size_t>(k)] * s.synthesis_lo[j];
      }
      EXPECT_NEAR(acc, m == 0 ? 1.0 : 0.0, 1e-8) << to_string(n) << " m=" << m;
    }
    if (s.orthogonal()) {
      for (std::size_t k = 0; k < L; ++k) {
        EXPECT_NEAR(s.synthesis_lo[k], s.analysis_lo[L - 1 - k], 1e-12) << to_string(n);
      }
    }
  }
}

TEST(Wavelet, PerfectReconstructionSingleLevel) {
  for (WaveletName n : kAll) {
    for (Padding p : paddings_for(n)) {
      const auto spec = WaveletSpec::make(n, p);
      const Matrix x = random_matrix(64, 64, 1);
      EXPECT_LE(max_abs_diff(idwt2(dwt2(x, spec), spec), x), 1e-6)
          << to_string(n) << "/" << to_string(p);
    }
  }
}

TEST(Wavelet, PerfectReconstructionMultiLevel) {
  for (WaveletName n : kAll) {
    for (Padding p : paddings_for(n)) {
      const auto spec = WaveletSpec::make(n, p);
      for (int levels = 1; levels <= 4; ++levels) {
        const Matrix x = random_matrix(64, 48, 10 + levels);
        EXPECT_LE(max_abs_diff(waverec2(wavedec2(x, spec, levels), spec), x), 1e-6)
            << to_string(n) << "/" << to_string(p) << " L=" << levels;
      }
    }
  }
}

TEST(Wavelet, OneLevelMatchesSingleLevelPair) {
  const auto spec = WaveletSpec::make(WaveletName::kBior44);
  const Matrix x = random_matrix(32, 32, 3);
  const Subbands2D b = dwt2(x, spec);
  const MultiLevelCoeffs c = wavedec2(x, spec, 1);
  EXPECT_EQ(max_abs_diff(c.packed.block(0, 0, 16, 16), b.ll), 0.0);
  EXPECT_EQ(max_abs_diff(c.packed.block(0, 16, 16, 16), b.hl), 0.0);
  EXPECT_EQ(max_abs_diff(c.packed.block(16, 0, 16, 16), b.lh), 0.0);
  EXPECT_EQ(max_abs_diff(c.packed.block(16, 16, 16, 16), b.hh), 0.0);
}

TEST(Wavelet, SeparableMatches1d) {
  // The 2D pass must equal the 1D analysis applied to rows, then columns.
  for (WaveletName n : kAll) {
    const auto spec = WaveletSpec::make(n);
    const Matrix x = random_matrix(16, 24, 4);
    Matrix rows(16, 24);
    std::vector<double> lo(12), hi(12);
    for (std::size_t r = 0; r < 16; ++r) {
      analysis_1d(x.row(r), spec, lo, hi);
      for (std::size_t c = 0; c < 12; ++c) {
        rows(r, c) = lo[c];
        rows(r, 12 + c) = hi[c];
      }
    }
    Matrix expect(16, 24);
    std::vector<double> col(16), clo(8), chi(8);
    for (std::size_t c = 0; c < 24; ++c) {
      for (std::size_t r = 0; r < 16; ++r) col[r] = rows(r, c);
      analysis_1d(col, spec, clo, chi);
      for (std::size_t r = 0; r < 8; ++r) {
        expect(r, c) = clo[r];
        expect(8 + r, c) = chi[r];
      }
    }
    Matrix got = x;
    wavedec2_inplace(got, spec, 1);
    EXPECT_LE(max_abs_diff(got, expect), 1e-12) << to_string(n);
  }
}

TEST(Wavelet, ShapesOfTwoLevelLayout) {
  const auto layout = subband_layout(16, 16, 2);
  ASSERT_EQ(layout.size(), 7u);
  std::size_t total = 0;
  for (const SubbandBlock& b : layout) {
    total += b.rows * b.cols;
    if (b.level == 1) {
      EXPECT_EQ(b.rows, 8u);
      EXPECT_EQ(b.cols, 8u);
    } else {
      EXPECT_EQ(b.rows, 4u);
      EXPECT_EQ(b.cols, 4u);
    }
  }
  EXPECT_EQ(total, 256u);
  EXPECT_EQ(layout.back().kind, SubbandKind::kLL);
}

TEST(Wavelet, ElementCountConserved) {
  for (int levels = 1; levels <= 5; ++levels) {
    std::size_t total = 0;
    for (const SubbandBlock& b : subband_layout(64, 128, levels)) total += b.rows * b.cols;
    EXPECT_EQ(total, 64u * 128u);
  }
}

TEST(Wavelet, Linearity) {
  for (WaveletName n : kAll) {
    const auto spec = WaveletSpec::make(n);
    const Matrix x = random_matrix(32, 32, 5), y = random_matrix(32, 32, 6);
    Matrix combo(32, 32);
    for (std::size_t i = 0; i < combo.size(); ++i) combo.values()[i] = 2.5 * x.values()[i] - 0.75 * y.values()[i];
    const auto cx = wavedec2(x, spec, 3), cy = wavedec2(y, spec, 3), cc = wavedec2(combo, spec, 3);
    for (std::size_t i = 0; i < combo.size(); ++i) {
      EXPECT_NEAR(cc.packed.values()[i], 2.5 * cx.packed.values()[i] - 0.75 * cy.packed.values()[i], 1e-9);
    }
  }
}

// Dense operator of waverec2 on an r x c grid, one column per unit input.
Matrix dense_synthesis(const WaveletSpec& spec, std::size_t r, std::size_t c, int levels) {
  const std::size_t n = r * c;
  Matrix a(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Matrix e(r, c);
    e.values()[j] = 1.0;
    waverec2_inplace(e, spec, levels);
    for (std::size_t i = 0; i < n; ++i) a(i, j) = e.values()[i];
  }
  return a;
}

TEST(Wavelet, AdjointEqualsDenseTranspose) {
  for (WaveletName n : kAll) {
    for (Padding p : paddings_for(n)) {
      const auto spec = WaveletSpec::make(n, p);
      for (int levels = 1; levels <= 2; ++levels) {
        const Matrix a = dense_synthesis(spec, 8, 8, levels);
        for (std::size_t j = 0; j < 64; ++j) {
          Matrix e(8, 8);
          e.values()[j] = 1.0;
          waverec2_adjoint_inplace(e, spec, levels);
          for (std::size_t i = 0; i < 64; ++i) {
            ASSERT_NEAR(e.values()[i], a(j, i), 1e-12) << to_string(n) << "/" << to_string(p);
          }
        }
      }
    }
  }
}

TEST(Wavelet, AdjointInnerProductIdentity) {
  std::mt19937_64 rng(7);
  for (WaveletName n : kAll) {
    const auto spec = WaveletSpec::make(n);
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix x = random_matrix(32, 32, rng()), g = random_matrix(32, 32, rng());
      Matrix sx = x, ag = g;
      waverec2_inplace(sx, spec, 3);
      waverec2_adjoint_inplace(ag, spec, 3);
      EXPECT_NEAR(dot(sx.span(), g.span()), dot(x.span(), ag.span()), 1e-9);
    }
  }
}

TEST(Wavelet, HaarAdjointIsAnalysis) {
  const auto spec = WaveletSpec::make(WaveletName::kHaar);
  const Matrix g = random_matrix(16, 16, 8);
  const Subbands2D a = idwt2_adjoint(g, spec), d = dwt2(g, spec);
  EXPECT_LE(max_abs_diff(a.ll, d.ll), 1e-12);
  EXPECT_LE(max_abs_diff(a.hl, d.hl), 1e-12);
  EXPECT_LE(max_abs_diff(a.lh, d.lh), 1e-12);
  EXPECT_LE(max_abs_diff(a.hh, d.hh), 1e-12);
}

TEST(Wavelet, BiorAdjointIsNotAnalysis) {
  const auto spec = WaveletSpec::make(WaveletName::kBior44);
  const Matrix g = random_matrix(16, 16, 9);
  EXPECT_GT(max_abs_diff(idwt2_adjoint(g, spec).hh, dwt2(g, spec).hh), 1e-3);
}

TEST(Wavelet, OneDimensionalAdjoint) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (WaveletName n : kAll) {
    const auto spec = WaveletSpec::make(n);
    std::vector<double> lo(16), hi(16), g(32), x(32), alo(16), ahi(16);
    for (double& v : lo) v = u(rng);
    for (double& v : hi) v = u(rng);
    for (double& v : g) v = u(rng);
    synthesis_1d(lo, hi, spec, x);
    synthesis_1d_adjoint(g, spec, alo, ahi);
    EXPECT_NEAR(dot(x, g), dot(lo, alo) + dot(hi, ahi), 1e-10);
  }
}

TEST(Wavelet, Errors) {
  const auto spec = WaveletSpec::make(WaveletName::kBior44);
  try {
    dwt2(Matrix(7, 8), spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOddDimension);
  }
  try {
    wavedec2(Matrix(16, 16), spec, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLevelTooDeep);
  }
  try {
    Subbands2D b{Matrix(2, 2), Matrix(2, 3), Matrix(2, 2), Matrix(2, 2), 1};
    idwt2(b, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  try {
    WaveletSpec::make(WaveletName::kDb4, Padding::kZero);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedPadding);
  }
}

TEST(Wavelet, DefaultPaddings) {
  EXPECT_EQ(WaveletSpec::default_padding(WaveletName::kBior44), Padding::kSymmetric);
  EXPECT_EQ(WaveletSpec::default_padding(WaveletName::kHaar), Padding::kSymmetric);
  EXPECT_EQ(WaveletSpec::default_padding(WaveletName::kDb4), Padding::kPeriodic);
  EXPECT_EQ(WaveletSpec::default_padding(WaveletName::kCoif1), Padding::kPeriodic);
  EXPECT_EQ(parse_wavelet_name("bior4.4"), WaveletName::kBior44);
  EXPECT_EQ(parse_padding("periodic"), Padding::kPeriodic);
}

TEST(Dct, ConstantHasSingleCoefficient) {
  const Matrix c = dct2(Matrix(8, 8, 3.0));
  EXPECT_NEAR(c(0, 0), 3.0 * 8.0, 1e-9);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c.values()[i], 0.0, 1e-9);
}

TEST(Dct, RoundTripAndParseval) {
  const Matrix x = random_matrix(8, 8, 12);
  const Matrix c = dct2(x);
  EXPECT_LE(max_abs_diff(idct2(c), x), 1e-6);
  EXPECT_NEAR(std::sqrt(dot(c.span(), c.span())), std::sqrt(dot(x.span(), x.span())), 1e-6);
  const Matrix y = random_matrix(32, 16, 13);
  EXPECT_LE(max_abs_diff(idct2(dct2(y)), y), 1e-6);
}

}  // namespace
}  // namespace mwrf
