// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/wavelet.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace mwrf {

namespace {

// Published filter-bank tables (decomposition / reconstruction taps in
// convolution order, zero-padded to a common length per family).
constexpr double kHaarDecLo[] = {0.7071067811865476, 0.7071067811865476};
constexpr double kHaarDecHi[] = {-0.7071067811865476, 0.7071067811865476};
constexpr double kHaarRecLo[] = {0.7071067811865476, 0.7071067811865476};
constexpr double kHaarRecHi[] = {0.7071067811865476, -0.7071067811865476};

constexpr double kDb4DecLo[] = {
    -0.010597401785069032, 0.0328830116668852,  0.030841381835560764,
    -0.18703481171909309,  -0.027983769416859854, 0.6308807679298589,
    0.7148465705529157,    0.2303778133088965};
constexpr double kDb4DecHi[] = {
    -0.2303778133088965,   0.7148465705529157,  -0.6308807679298589,
    -0.027983769416859854, 0.18703481171909309, 0.030841381835560764,
    -0.0328830116668852,   -0.010597401785069032};
constexpr double kDb4RecLo[] = {
    0.2303778133088965,    0.7148465705529157,   0.6308807679298589,
    -0.027983769416859854, -0.18703481171909309, 0.030841381835560764,
    0.0328830116668852,    -0.010597401785069032};
constexpr double kDb4RecHi[] = {
    -0.010597401785069032, -0.0328830116668852, 0.030841381835560764,
    0.18703481171909309,   -0.027983769416859854, -0.6308807679298589,
    0.7148465705529157,    -0.2303778133088965};

constexpr double kCoif1DecLo[] = {
    -0.015655728135791993, -0.07273261951252645, 0.3848648468648578,
    0.8525720202116004,    0.3378976624574818,   -0.07273261951252645};
constexpr double kCoif1DecHi[] = {
    0.07273261951252645, 0.3378976624574818,  -0.8525720202116004,
    0.3848648468648578,  0.07273261951252645, -0.015655728135791993};
constexpr double kCoif1RecLo[] = {
    -0.07273261951252645, 0.3378976624574818,   0.8525720202116004,
    0.3848648468648578,   -0.07273261951252645, -0.015655728135791993};
constexpr double kCoif1RecHi[] = {
    -0.015655728135791993, 0.07273261951252645, 0.3848648468648578,
    -0.8525720202116004,   0.3378976624574818,  0.07273261951252645};

// CDF 9/7 ("bior4.4").
constexpr double kB9 = 0.03782845550726404;
constexpr double kB8 = -0.023849465019556843;
constexpr double kB7 = -0.11062440441843718;
constexpr double kB6 = 0.37740285561283066;
constexpr double kB5 = 0.8526986790088938;
constexpr double kC4 = -0.06453888262869706;
constexpr double kC3 = 0.04068941760916406;
constexpr double kC2 = 0.41809227322161724;
constexpr double kC1 = -0.7884856164055829;

constexpr double kBiorDecLo[] = {0.0, kB9, kB8, kB7, kB6, kB5, kB6, kB7, kB8, kB9};
constexpr double kBiorDecHi[] = {0.0, kC4, kC3, kC2, kC1, kC2, kC3, kC4, 0.0, 0.0};
constexpr double kBiorRecLo[] = {0.0, kC4, -kC3, kC2, -kC1, kC2, -kC3, kC4, 0.0, 0.0};
constexpr double kBiorRecHi[] = {0.0, -kB9, kB8, -kB7, kB6, -kB5, kB6, -kB7, kB8, -kB9};

// Reverse biorthogonal 4.4: analysis and synthesis roles swapped.
constexpr double kRbiorDecLo[] = {0.0, 0.0, kC4, -kC3, kC2, -kC1, kC2, -kC3, kC4, 0.0};
constexpr double kRbiorDecHi[] = {-kB9, kB8, -kB7, kB6, -kB5, kB6, -kB7, kB8, -kB9, 0.0};
constexpr double kRbiorRecLo[] = {kB9, kB8, kB7, kB6, kB5, kB6, kB7, kB8, kB9, 0.0};
constexpr double kRbiorRecHi[] = {0.0, 0.0, kC4, kC3, kC2, kC1, kC2, kC3, kC4, 0.0};

template <std::size_t N>
std::vector<double> taps(const double (&arr)[N]) {
  return std::vector<double>(arr, arr + N);
}

bool is_palindrome_up_to_sign(std::span<const double> f) {
  // Trim the zero padding, then test f == reverse(f) or f == -reverse(f).
  std::size_t b = 0, e = f.size();
  while (b < e && f[b] == 0.0) ++b;
  while (e > b && f[e - 1] == 0.0) --e;
  bool sym = true, anti = true;
  for (std::size_t i = b, j = e - 1; i < e; ++i, --j) {
    if (std::abs(f[i] - f[j]) > 1e-12) sym = false;
    if (std::abs(f[i] + f[j]) > 1e-12) anti = false;
  }
  return sym || anti;
}

// Maps an index of the infinite extension onto [0, n); -1 means "zero".
inline std::ptrdiff_t extend_index(std::ptrdiff_t i, std::ptrdiff_t n, Padding p) {
  if (i >= 0 && i < n) return i;
  switch (p) {
    case Padding::kPeriodic: {
      std::ptrdiff_t r = i % n;
      return r < 0 ? r + n : r;
    }
    case Padding::kSymmetric: {
      const std::ptrdiff_t period = 2 * n - 2;
      std::ptrdiff_t r = i % period;
      if (r < 0) r += period;
      return r < n ? r : period - r;
    }
    case Padding::kZero:
      return -1;
  }
  return -1;
}

// Filters in the orientation used by the inner loops.
struct Kernel {
  std::vector<double> a_lo, a_hi;  // reversed decomposition taps (correlation)
  const std::vector<double>* s_lo;
  const std::vector<double>* s_hi;
  std::ptrdiff_t len;
  std::ptrdiff_t off;
  Padding pad;

  explicit Kernel(const WaveletSpec& spec)
      : a_lo(spec.analysis_lo.rbegin(), spec.analysis_lo.rend()),
        a_hi(spec.analysis_hi.rbegin(), spec.analysis_hi.rend()),
        s_lo(&spec.synthesis_lo),
        s_hi(&spec.synthesis_hi),
        len(static_cast<std::ptrdiff_t>(spec.filter_length())),
        off(spec.offset),
        pad(spec.padding) {}
};

// Scratch buffers reused across rows / columns.
struct Scratch {
  std::vector<double> a, b, c, d, e;
};

void analysis_kernel(std::span<const double> x, const Kernel& k, std::span<double> lo,
                     std::span<double> hi, Scratch& s) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t half = n / 2;
  s.a.resize(static_cast<std::size_t>(n + k.len));
  for (std::ptrdiff_t t = 0; t < n + k.len; ++t) {
    const std::ptrdiff_t e = extend_index(t - k.off, n, k.pad);
    s.a[static_cast<std::size_t>(t)] = e < 0 ? 0.0 : x[static_cast<std::size_t>(e)];
  }
  const double* xe = s.a.data();
  const double* fl = k.a_lo.data();
  const double* fh = k.a_hi.data();
  for (std::ptrdiff_t i = 0; i < half; ++i) {
    const double* p = xe + 2 * i;
    double sl = 0.0, sh = 0.0;
    for (std::ptrdiff_t j = 0; j < k.len; ++j) {
      sl += fl[j] * p[j];
      sh += fh[j] * p[j];
    }
    lo[static_cast<std::size_t>(i)] = sl;
    hi[static_cast<std::size_t>(i)] = sh;
  }
}

// Positions touched by synthesis run from qmin = off - len + 1 to n + off.
void synthesis_kernel(std::span<const double> lo, std::span<const double> hi,
                      const Kernel& k, std::span<double> x, Scratch& s) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t qmin = k.off - k.len + 1;
  const std::ptrdiff_t span_len = n + k.len + 1;
  s.a.assign(static_cast<std::size_t>(span_len), 0.0);
  s.b.assign(static_cast<std::size_t>(span_len), 0.0);
  for (std::ptrdiff_t t = 0; t < span_len; ++t) {
    const std::ptrdiff_t e = extend_index(t + qmin, n, k.pad);
    if (e < 0) continue;
    if ((e & 1) == 0) {
      s.a[static_cast<std::size_t>(t)] = lo[static_cast<std::size_t>(e / 2)];
    } else {
      s.b[static_cast<std::size_t>(t)] = hi[static_cast<std::size_t>(e / 2)];
    }
  }
  const double* ul = s.a.data();
  const double* uh = s.b.data();
  const double* fl = k.s_lo->data();
  const double* fh = k.s_hi->data();
  for (std::ptrdiff_t m = 0; m < n; ++m) {
    // ul index m - j + off - qmin, uh index m - j + off + 1 - qmin
    const std::ptrdiff_t bl = m + k.off - qmin;
    // Only taps of one parity meet non-inserted samples.
    double acc = 0.0;
    for (std::ptrdiff_t j = (m + k.off) & 1; j < k.len; j += 2) {
      acc += fl[j] * ul[bl - j] + fh[j] * uh[bl + 1 - j];
    }
    x[static_cast<std::size_t>(m)] = acc;
  }
}

void synthesis_adjoint_kernel(std::span<const double> g, const Kernel& k,
                              std::span<double> lo, std::span<double> hi, Scratch& s) {
  const auto n = static_cast<std::ptrdiff_t>(g.size());
  const std::ptrdiff_t qmin = k.off - k.len + 1;
  const std::ptrdiff_t span_len = n + k.len + 1;
  // Gather form of the transposed synthesis: gp[t] = g[t - len], zero outside.
  s.e.assign(static_cast<std::size_t>(span_len + 2 * k.len + 1), 0.0);
  std::copy(g.begin(), g.end(), s.e.begin() + k.len);
  s.a.resize(static_cast<std::size_t>(span_len));
  s.b.resize(static_cast<std::size_t>(span_len));
  double* gul = s.a.data();
  double* guh = s.b.data();
  const double* gp = s.e.data();
  const double* fl = k.s_lo->data();
  const double* fh = k.s_hi->data();
  // Position u feeds the low band when u + qmin is even, else the high band.
  for (std::ptrdiff_t u = 0; u < span_len; ++u) {
    double acc = 0.0;
    if (((u + qmin) & 1) == 0) {
      for (std::ptrdiff_t j = 0; j < k.len; ++j) acc += fl[j] * gp[u + 1 + j];
      gul[u] = acc;
    } else {
      for (std::ptrdiff_t j = 0; j < k.len; ++j) acc += fh[j] * gp[u + j];
      guh[u] = acc;
    }
  }
  std::fill(lo.begin(), lo.end(), 0.0);
  std::fill(hi.begin(), hi.end(), 0.0);
  for (std::ptrdiff_t t = 0; t < span_len; ++t) {
    const std::ptrdiff_t e = extend_index(t + qmin, n, k.pad);
    if (e < 0) continue;
    if ((e & 1) == 0) {
      lo[static_cast<std::size_t>(e / 2)] += gul[t];
    } else {
      hi[static_cast<std::size_t>(e / 2)] += guh[t];
    }
  }
}

enum class Pass { kAnalysis, kSynthesis, kSynthesisAdjoint };

inline void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// One 1D pass down every column of the top-left h x w region, with the bands
// stacked as [lo ; hi] row blocks. Work is done a whole row at a time so the
// inner loops are contiguous.
void cols_pass(Matrix& m, std::size_t h, std::size_t w, const Kernel& k, Pass pass,
               Scratch& s) {
  const std::size_t stride = m.cols();
  const auto n = static_cast<std::ptrdiff_t>(h);
  const std::ptrdiff_t half = n / 2;
  s.c.assign(h * w, 0.0);
  auto in = [&](std::ptrdiff_t r) { return m.data() + static_cast<std::size_t>(r) * stride; };
  auto out = [&](std::ptrdiff_t r) { return s.c.data() + static_cast<std::size_t>(r) * w; };
  const double* fl = k.s_lo->data();
  const double* fh = k.s_hi->data();
  switch (pass) {
    case Pass::kAnalysis:
      for (std::ptrdiff_t i = 0; i < half; ++i) {
        for (std::ptrdiff_t j = 0; j < k.len; ++j) {
          const std::ptrdiff_t e = extend_index(2 * i + j - k.off, n, k.pad);
          if (e < 0) continue;
          axpy(k.a_lo[static_cast<std::size_t>(j)], in(e), out(i), w);
          axpy(k.a_hi[static_cast<std::size_t>(j)], in(e), out(half + i), w);
        }
      }
      break;
    case Pass::kSynthesis:
      for (std::ptrdiff_t r = 0; r < n; ++r) {
        for (std::ptrdiff_t j = 0; j < k.len; ++j) {
          const std::ptrdiff_t el = extend_index(r + k.off - j, n, k.pad);
          if (el >= 0 && (el & 1) == 0) axpy(fl[j], in(el / 2), out(r), w);
          const std::ptrdiff_t eh = extend_index(r + k.off + 1 - j, n, k.pad);
          if (eh >= 0 && (eh & 1) == 1) axpy(fh[j], in(half + eh / 2), out(r), w);
        }
      }
      break;
    case Pass::kSynthesisAdjoint:
      for (std::ptrdiff_t r = 0; r < n; ++r) {
        for (std::ptrdiff_t j = 0; j < k.len; ++j) {
          const std::ptrdiff_t el = extend_index(r + k.off - j, n, k.pad);
          if (el >= 0 && (el & 1) == 0) axpy(fl[j], in(r), out(el / 2), w);
          const std::ptrdiff_t eh = extend_index(r + k.off + 1 - j, n, k.pad);
          if (eh >= 0 && (eh & 1) == 1) axpy(fh[j], in(r), out(half + eh / 2), w);
        }
      }
      break;
  }
  for (std::size_t r = 0; r < h; ++r) std::copy_n(s.c.data() + r * w, w, m.data() + r * stride);
}

// Blocked transpose of the top-left rows x cols region of src (row stride
// `ss`) into dst (row stride `ds`).
void transpose_block(const double* src, std::size_t ss, double* dst, std::size_t ds,
                     std::size_t rows, std::size_t cols) {
  constexpr std::size_t kTile = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kTile) {
    for (std::size_t c0 = 0; c0 < cols; c0 += kTile) {
      const std::size_t r1 = std::min(rows, r0 + kTile), c1 = std::min(cols, c0 + kTile);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) dst[c * ds + r] = src[r * ss + c];
      }
    }
  }
}

// Rows go through a transposed copy and the column pass.
void rows_pass(Matrix& m, std::size_t h, std::size_t w, const Kernel& k, Pass pass,
               Scratch& s) {
  Matrix t(w, h);
  transpose_block(m.data(), m.cols(), t.data(), h, h, w);
  cols_pass(t, w, h, k, pass, s);
  transpose_block(t.data(), h, m.data(), m.cols(), w, h);
}

void region_pass(Matrix& m, std::size_t h, std::size_t w, const Kernel& k, Pass pass,
                 Scratch& s) {
  rows_pass(m, h, w, k, pass, s);
  cols_pass(m, h, w, k, pass, s);
}

Matrix pack(const Subbands2D& b) {
  const std::size_t h = b.ll.rows(), w = b.ll.cols();
  if (!b.hl.same_shape(b.ll) || !b.lh.same_shape(b.ll) || !b.hh.same_shape(b.ll)) {
    fail(ErrorCode::kShapeMismatch, "subbands must share one shape");
  }
  if (h == 0 || w == 0) fail(ErrorCode::kTooSmall, "empty subbands");
  Matrix m(2 * h, 2 * w);
  m.set_block(0, 0, b.ll);
  m.set_block(0, w, b.hl);
  m.set_block(h, 0, b.lh);
  m.set_block(h, w, b.hh);
  return m;
}

Subbands2D unpack(const Matrix& m) {
  const std::size_t h = m.rows() / 2, w = m.cols() / 2;
  Subbands2D b;
  b.ll = m.block(0, 0, h, w);
  b.hl = m.block(0, w, h, w);
  b.lh = m.block(h, 0, h, w);
  b.hh = m.block(h, w, h, w);
  b.level = 1;
  return b;
}

}  // namespace

std::string_view to_string(WaveletName name) {
  switch (name) {
    case WaveletName::kHaar: return "haar";
    case WaveletName::kDb4: return "db4";
    case WaveletName::kCoif1: return "coif1";
    case WaveletName::kBior44: return "bior4.4";
    case WaveletName::kRbior44: return "rbior4.4";
  }
  return "?";
}

std::string_view to_string(Padding padding) {
  switch (padding) {
    case Padding::kSymmetric: return "symmetric";
    case Padding::kPeriodic: return "periodic";
    case Padding::kZero: return "zero";
  }
  return "?";
}

WaveletName parse_wavelet_name(std::string_view text) {
  for (auto n : {WaveletName::kHaar, WaveletName::kDb4, WaveletName::kCoif1,
                 WaveletName::kBior44, WaveletName::kRbior44}) {
    if (to_string(n) == text) return n;
  }
  if (text == "rbio4.4") return WaveletName::kRbior44;
  fail(ErrorCode::kInvalidArgument, "unknown wavelet '" + std::string(text) + "'");
}

Padding parse_padding(std::string_view text) {
  for (auto p : {Padding::kSymmetric, Padding::kPeriodic, Padding::kZero}) {
    if (to_string(p) == text) return p;
  }
  fail(ErrorCode::kInvalidArgument, "unknown padding '" + std::string(text) + "'");
}

bool WaveletSpec::orthogonal() const {
  if (analysis_lo.size() != synthesis_lo.size()) return false;
  const std::size_t n = analysis_lo.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(synthesis_lo[i] - analysis_lo[n - 1 - i]) > 1e-12) return false;
    if (std::abs(synthesis_hi[i] - analysis_hi[n - 1 - i]) > 1e-12) return false;
  }
  return true;
}

bool WaveletSpec::symmetric_taps() const {
  return is_palindrome_up_to_sign(analysis_lo) && is_palindrome_up_to_sign(analysis_hi) &&
         is_palindrome_up_to_sign(synthesis_lo) && is_palindrome_up_to_sign(synthesis_hi);
}

Padding WaveletSpec::default_padding(WaveletName name) {
  switch (name) {
    case WaveletName::kDb4:
    case WaveletName::kCoif1:
      return Padding::kPeriodic;
    default:
      return Padding::kSymmetric;
  }
}

bool WaveletSpec::supports(WaveletName name, Padding padding) {
  switch (padding) {
    case Padding::kPeriodic:
      return true;
    case Padding::kSymmetric:
      return name == WaveletName::kHaar || name == WaveletName::kBior44 ||
             name == WaveletName::kRbior44;
    case Padding::kZero:
      // Two-tap filters never read past the signal.
      return name == WaveletName::kHaar;
  }
  return false;
}

WaveletSpec WaveletSpec::make(WaveletName name, std::optional<Padding> padding) {
  WaveletSpec s;
  s.name = name;
  s.padding = padding.value_or(default_padding(name));
  if (!supports(name, s.padding)) {
    fail(ErrorCode::kUnsupportedPadding,
         std::string(to_string(name)) + " does not reconstruct perfectly with " +
             std::string(to_string(s.padding)) + " padding");
  }
  switch (name) {
    case WaveletName::kHaar:
      s.analysis_lo = taps(kHaarDecLo);
      s.analysis_hi = taps(kHaarDecHi);
      s.synthesis_lo = taps(kHaarRecLo);
      s.synthesis_hi = taps(kHaarRecHi);
      s.offset = 0;
      break;
    case WaveletName::kDb4:
      s.analysis_lo = taps(kDb4DecLo);
      s.analysis_hi = taps(kDb4DecHi);
      s.synthesis_lo = taps(kDb4RecLo);
      s.synthesis_hi = taps(kDb4RecHi);
      s.offset = 4;
      break;
    case WaveletName::kCoif1:
      s.analysis_lo = taps(kCoif1DecLo);
      s.analysis_hi = taps(kCoif1DecHi);
      s.synthesis_lo = taps(kCoif1RecLo);
      s.synthesis_hi = taps(kCoif1RecHi);
      s.offset = 2;
      break;
    case WaveletName::kBior44:
      s.analysis_lo = taps(kBiorDecLo);
      s.analysis_hi = taps(kBiorDecHi);
      s.synthesis_lo = taps(kBiorRecLo);
      s.synthesis_hi = taps(kBiorRecHi);
      s.offset = 4;
      break;
    case WaveletName::kRbior44:
      s.analysis_lo = taps(kRbiorDecLo);
      s.analysis_hi = taps(kRbiorDecHi);
      s.synthesis_lo = taps(kRbiorRecLo);
      s.synthesis_hi = taps(kRbiorRecHi);
      s.offset = 4;
      break;
  }
  return s;
}

void analysis_1d(std::span<const double> x, const WaveletSpec& spec,
                 std::span<double> lo, std::span<double> hi) {
  if (x.size() % 2 != 0) fail(ErrorCode::kOddDimension, "odd signal length");
  if (x.size() < 2) fail(ErrorCode::kTooSmall, "signal shorter than 2");
  if (lo.size() != x.size() / 2 || hi.size() != x.size() / 2) {
    fail(ErrorCode::kShapeMismatch, "band length must be half the signal length");
  }
  Kernel k(spec);
  Scratch s;
  analysis_kernel(x, k, lo, hi, s);
}

void synthesis_1d(std::span<const double> lo, std::span<const double> hi,
                  const WaveletSpec& spec, std::span<double> x) {
  if (lo.size() != hi.size() || x.size() != 2 * lo.size() || lo.empty()) {
    fail(ErrorCode::kShapeMismatch, "synthesis_1d band/output sizes");
  }
  Kernel k(spec);
  Scratch s;
  synthesis_kernel(lo, hi, k, x, s);
}

void synthesis_1d_adjoint(std::span<const double> g, const WaveletSpec& spec,
                          std::span<double> lo, std::span<double> hi) {
  if (g.size() % 2 != 0) fail(ErrorCode::kOddDimension, "odd signal length");
  if (lo.size() != g.size() / 2 || hi.size() != g.size() / 2 || g.empty()) {
    fail(ErrorCode::kShapeMismatch, "synthesis_1d_adjoint band sizes");
  }
  Kernel k(spec);
  Scratch s;
  synthesis_adjoint_kernel(g, k, lo, hi, s);
}

void check_decomposable(std::size_t rows, std::size_t cols, int levels) {
  if (levels < 1) fail(ErrorCode::kInvalidArgument, "levels must be >= 1");
  if (rows < 2 || cols < 2) fail(ErrorCode::kTooSmall, "dimension smaller than 2");
  if (rows % 2 != 0 || cols % 2 != 0) {
    fail(ErrorCode::kOddDimension,
         "dimensions " + std::to_string(rows) + "x" + std::to_string(cols) + " not even");
  }
  for (int j = 1; j < levels; ++j) {
    const std::size_t h = rows >> j, w = cols >> j;
    if (h < 2 || w < 2 || h % 2 != 0 || w % 2 != 0 || (h << j) != rows ||
        (w << j) != cols) {
      fail(ErrorCode::kLevelTooDeep, std::to_string(levels) + " levels do not fit " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
}

std::vector<SubbandBlock> subband_layout(std::size_t rows, std::size_t cols, int levels) {
  std::vector<SubbandBlock> out;
  out.reserve(static_cast<std::size_t>(3 * levels + 1));
  for (int j = 1; j <= levels; ++j) {
    const std::size_t h = rows >> j, w = cols >> j;
    out.push_back({j, SubbandKind::kHL, 0, w, h, w});
    out.push_back({j, SubbandKind::kLH, h, 0, h, w});
    out.push_back({j, SubbandKind::kHH, h, w, h, w});
  }
  out.push_back({levels, SubbandKind::kLL, 0, 0, rows >> levels, cols >> levels});
  return out;
}

void wavedec2_inplace(Matrix& m, const WaveletSpec& spec, int levels) {
  check_decomposable(m.rows(), m.cols(), levels);
  Kernel k(spec);
  Scratch s;
  for (int j = 0; j < levels; ++j) {
    region_pass(m, m.rows() >> j, m.cols() >> j, k, Pass::kAnalysis, s);
  }
}

void waverec2_inplace(Matrix& m, const WaveletSpec& spec, int levels) {
  check_decomposable(m.rows(), m.cols(), levels);
  Kernel k(spec);
  Scratch s;
  for (int j = levels - 1; j >= 0; --j) {
    region_pass(m, m.rows() >> j, m.cols() >> j, k, Pass::kSynthesis, s);
  }
}

void waverec2_adjoint_inplace(Matrix& m, const WaveletSpec& spec, int levels) {
  check_decomposable(m.rows(), m.cols(), levels);
  Kernel k(spec);
  Scratch s;
  for (int j = 0; j < levels; ++j) {
    region_pass(m, m.rows() >> j, m.cols() >> j, k, Pass::kSynthesisAdjoint, s);
  }
}

Subbands2D dwt2(const Matrix& x, const WaveletSpec& spec) {
  Matrix m = x;
  wavedec2_inplace(m, spec, 1);
  return unpack(m);
}

Matrix idwt2(const Subbands2D& bands, const WaveletSpec& spec) {
  Matrix m = pack(bands);
  waverec2_inplace(m, spec, 1);
  return m;
}

Subbands2D idwt2_adjoint(const Matrix& g, const WaveletSpec& spec) {
  Matrix m = g;
  waverec2_adjoint_inplace(m, spec, 1);
  return unpack(m);
}

MultiLevelCoeffs wavedec2(const Matrix& x, const WaveletSpec& spec, int levels) {
  MultiLevelCoeffs c{x, levels};
  wavedec2_inplace(c.packed, spec, levels);
  return c;
}

Matrix waverec2(const MultiLevelCoeffs& coeffs, const WaveletSpec& spec) {
  Matrix m = coeffs.packed;
  waverec2_inplace(m, spec, coeffs.levels);
  return m;
}

// ---------------------------------------------------------------------------
// DCT (FFTW r2r). Plans are created under a lock; execution with the
// new-array interface is thread safe.

namespace {

enum class DctKind { kForward, kInverse };

fftw_plan dct_plan(std::size_t rows, std::size_t cols, DctKind kind) {
  static std::mutex mu;
  static std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(rows, cols, static_cast<int>(kind));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<double> in(rows * cols), out(rows * cols);
  const fftw_r2r_kind r2r = kind == DctKind::kForward ? FFTW_REDFT10 : FFTW_REDFT01;
  fftw_plan p = fftw_plan_r2r_2d(static_cast<int>(rows), static_cast<int>(cols), in.data(),
                                 out.data(), r2r, r2r, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, p);
  return p;
}

void check_dct_shape(const Matrix& x) {
  if (x.rows() == 0 || x.cols() == 0) fail(ErrorCode::kTooSmall, "empty matrix");
}

}  // namespace

Matrix dct2(const Matrix& x) {
  check_dct_shape(x);
  const std::size_t h = x.rows(), w = x.cols();
  Matrix in = x;
  Matrix out(h, w);
  fftw_execute_r2r(dct_plan(h, w, DctKind::kForward), in.data(), out.data());
  const double r0 = std::sqrt(1.0 / (4.0 * h)), r1 = std::sqrt(1.0 / (2.0 * h));
  const double c0 = std::sqrt(1.0 / (4.0 * w)), c1 = std::sqrt(1.0 / (2.0 * w));
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      out(r, c) *= (r == 0 ? r0 : r1) * (c == 0 ? c0 : c1);
    }
  }
  return out;
}

Matrix idct2(const Matrix& x) {
  check_dct_shape(x);
  const std::size_t h = x.rows(), w = x.cols();
  Matrix in = x;
  const double r0 = std::sqrt(1.0 / h), r1 = std::sqrt(1.0 / (2.0 * h));
  const double c0 = std::sqrt(1.0 / w), c1 = std::sqrt(1.0 / (2.0 * w));
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      in(r, c) *= (r == 0 ? r0 : r1) * (c == 0 ? c0 : c1);
    }
  }
  Matrix out(h, w);
  fftw_execute_r2r(dct_plan(h, w, DctKind::kInverse), in.data(), out.data());
  return out;
}

}  // namespace mwrf
