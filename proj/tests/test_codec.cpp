// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mwrf/codec.hpp"
#include "mwrf/error.hpp"

namespace mwrf {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no exception";
  return ErrorCode::kIo;
}

TEST(Quantize, ConstantArrayIsExact) {
  const std::vector<double> x(10, -0.37);
  const Quantized q = quantize(x, 8);
  for (auto c : q.codes) EXPECT_EQ(c, 0u);
  EXPECT_EQ(dequantize(q), x);
}

TEST(Quantize, ErrorWithinHalfStep) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int bits : {2, 4, 8, 12, 16}) {
    std::vector<double> x(500);
    for (double& v : x) v = n(rng);
    const Quantized q = quantize(x, bits);
    const auto y = dequantize(q);
    const double step = q.step();
    EXPECT_NEAR(step, (q.max - q.min) / ((1 << bits) - 1), 1e-15);
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_LE(std::abs(x[i] - y[i]), 0.5 * step * (1 + 1e-9));
      EXPECT_LT(q.codes[i], 1u << bits);
    }
    // The extremes are represented exactly.
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    EXPECT_DOUBLE_EQ(y[lo - x.begin()], *lo);
    EXPECT_NEAR(y[hi - x.begin()], *hi, 1e-12);
  }
}

TEST(Quantize, InvalidArguments) {
  const std::vector<double> x{1.0, 2.0};
  EXPECT_EQ(code_of([&] { quantize(x, 1); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { quantize(x, 17); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { quantize(std::vector<double>{}, 8); }), ErrorCode::kEmptyInput);
}

TEST(Cast, PacksMsbFirst) {
  const std::vector<std::uint8_t> bits{1, 0, 1, 1, 0, 0, 0, 1, 1, 1};
  const CastSymbols c8 = cast_bits(bits, 8);
  ASSERT_EQ(c8.symbols.size(), 2u);
  EXPECT_EQ(c8.symbols[0], 0xB1);
  EXPECT_EQ(c8.symbols[1], 0xC0);
  EXPECT_EQ(c8.pad, 6);
  EXPECT_EQ(uncast_bits(c8), bits);

  const CastSymbols c4 = cast_bits(bits, 4);
  EXPECT_EQ(c4.symbols, (std::vector<std::uint16_t>{0xB, 0x1, 0xC}));
  EXPECT_EQ(uncast_bits(c4), bits);
  EXPECT_THROW(cast_bits(bits, 5), Error);
}

TEST(Rle, RoundTripAndRuns) {
  const std::vector<std::uint16_t> s{0, 0, 0, 7, 7, 0, 255, 255, 255, 255};
  const auto pairs = rle_encode(s);
  EXPECT_EQ(pairs, (std::vector<RunPair>{{0, 3}, {7, 2}, {0, 1}, {255, 4}}));
  EXPECT_EQ(rle_decode(pairs), s);
  EXPECT_EQ(rle_deserialize(rle_serialize(pairs)), pairs);
  EXPECT_TRUE(rle_encode(std::vector<std::uint16_t>{}).empty());
}

TEST(Rle, RejectsZeroRunAndTruncation) {
  const std::vector<RunPair> bad{{3, 0}};
  EXPECT_EQ(code_of([&] { rle_decode(bad); }), ErrorCode::kCorruptStream);
  auto bytes = rle_serialize(std::vector<RunPair>{{1, 300}, {2, 5}});
  bytes.pop_back();
  EXPECT_EQ(code_of([&] { rle_deserialize(bytes); }), ErrorCode::kCorruptStream);
}

TEST(Huffman, HandBuiltCode) {
  // Frequencies 5, 2, 1, 1 give lengths 1, 2, 3, 3 and canonical codes
  // 0, 10, 110, 111.
  const HuffmanTable t = HuffmanTable::build({{10, 5}, {20, 2}, {30, 1}, {40, 1}});
  EXPECT_EQ(t.lookup(10).length, 1);
  EXPECT_EQ(t.lookup(20).length, 2);
  EXPECT_EQ(t.lookup(30).length, 3);
  EXPECT_EQ(t.lookup(40).length, 3);
  EXPECT_EQ(t.lookup(10).code, 0b0u);
  EXPECT_EQ(t.lookup(20).code, 0b10u);
  EXPECT_EQ(t.lookup(30).code, 0b110u);
  EXPECT_EQ(t.lookup(40).code, 0b111u);
  EXPECT_EQ(code_of([&] { t.lookup(11); }), ErrorCode::kUnknownSymbol);
}

TEST(Huffman, SingleSymbolGetsOneBit) {
  const HuffmanTable t = HuffmanTable::build({{42, 9}});
  ASSERT_EQ(t.codes().size(), 1u);
  EXPECT_EQ(t.lookup(42).length, 1);
}

TEST(Huffman, LengthsAreCappedAndSatisfyKraft) {
  // Fibonacci counts produce a maximally skewed tree deeper than the cap.
  std::map<std::uint16_t, std::uint64_t> f;
  std::uint64_t a = 1, b = 1;
  for (std::uint16_t s = 0; s < 30; ++s) {
    f[s] = a;
    const std::uint64_t c = a + b;
    a = b;
    b = c;
  }
  const HuffmanTable t = HuffmanTable::build(f);
  double kraft = 0.0;
  for (const auto& c : t.codes()) {
    EXPECT_LE(c.length, kMaxCodeLength);
    kraft += std::ldexp(1.0, -c.length);
  }
  EXPECT_LE(kraft, 1.0 + 1e-12);
  EXPECT_EQ(t.codes().size(), 30u);
}

TEST(Huffman, FromLengthsRejectsInvalidCodes) {
  EXPECT_EQ(code_of([] { HuffmanTable::from_lengths({{0, 1}, {1, 1}, {2, 1}}); }),
            ErrorCode::kCorruptStream);
  EXPECT_EQ(code_of([] { HuffmanTable::from_lengths({{0, 1}, {0, 2}}); }), ErrorCode::kCorruptStream);
  EXPECT_EQ(code_of([] { HuffmanTable::from_lengths({{0, 16}}); }), ErrorCode::kCorruptStream);
}

TEST(Huffman, TableSerializationRoundTrip) {
  std::mt19937_64 rng(5);
  std::set<std::uint8_t> modes;
  for (int bits : {4, 8, 16}) {
    const std::uint32_t alphabet = bits == 16 ? 65536u : (1u << bits);
    for (int n : {1, 2, 3, 8, 16, 30, 60, 120, 200, 256}) {
      if (static_cast<std::uint32_t>(n) > alphabet) continue;
      // Clustered symbols favour delta lists, scattered ones the bitmap.
      const std::uint32_t spread = n < 40 ? 40u : alphabet;
      std::map<std::uint16_t, std::uint64_t> f;
      while (static_cast<int>(f.size()) < n) {
        f[static_cast<std::uint16_t>(rng() % std::min(spread, alphabet))] = 1 + rng() % 50;
      }
      const HuffmanTable t = HuffmanTable::build(f);
      std::vector<std::uint8_t> bytes{0xEE};
      t.serialize(bytes, bits);
      modes.insert(bytes[1]);
      std::size_t pos = 1;
      const HuffmanTable u = HuffmanTable::deserialize(bytes, pos, bits);
      EXPECT_EQ(pos, bytes.size());
      ASSERT_EQ(u.codes().size(), t.codes().size());
      for (std::size_t i = 0; i < t.codes().size(); ++i) {
        EXPECT_EQ(u.codes()[i].symbol, t.codes()[i].symbol);
        EXPECT_EQ(u.codes()[i].length, t.codes()[i].length);
        EXPECT_EQ(u.codes()[i].code, t.codes()[i].code);
      }
    }
  }
  // Dense, list, nibble list and bitmap layouts all occur.
  EXPECT_EQ(modes, (std::set<std::uint8_t>{0, 1, 2, 3}));
}

TEST(Huffman, NibbleTableLayout) {
  // Symbols 240 and 255, both length 1: count 2, gaps 240 and 14 in 3-bit
  // groups, lengths 1.
  const HuffmanTable t = HuffmanTable::from_lengths({{240, 1}, {255, 1}});
  std::vector<std::uint8_t> bytes;
  t.serialize(bytes, 8);
  EXPECT_EQ(bytes, (std::vector<std::uint8_t>{0x02, 0x02, 0x8E, 0x31, 0xE1, 0x10}));
}

TEST(Huffman, StreamRoundTripFuzz) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<std::uint8_t> bits(n);
    const double p = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (auto& b : bits) b = std::bernoulli_distribution(p)(rng);
    const int cast_n = std::array<int, 3>{4, 8, 16}[rng() % 3];
    const CastSymbols c = cast_bits(bits, cast_n);
    const auto pairs = rle_encode(c.symbols);
    const HuffmanStream hs = huffman_encode(pairs);
    const auto back = huffman_decode(hs.table, hs.bytes, hs.bit_count, hs.n_pairs);
    ASSERT_EQ(back, pairs);
    CastSymbols d{cast_n, c.pad, rle_decode(back)};
    ASSERT_EQ(uncast_bits(d), bits);
  }
}

TEST(Huffman, TruncatedStreamThrows) {
  const std::vector<RunPair> pairs{{1, 3}, {2, 1}, {1, 7}, {3, 200}};
  const HuffmanStream hs = huffman_encode(pairs);
  EXPECT_EQ(code_of([&] { huffman_decode(hs.table, hs.bytes, hs.bit_count - 3, hs.n_pairs); }),
            ErrorCode::kCorruptStream);
}

TEST(Huffman, EntropyOfKnownStreams) {
  EXPECT_DOUBLE_EQ(entropy_bits(std::vector<std::uint16_t>{1, 1, 1}), 0.0);
  EXPECT_DOUBLE_EQ(entropy_bits(std::vector<std::uint16_t>{1, 2, 3, 4}), 2.0);
}

TensorField trained_like(const FieldConfig& cfg, std::uint64_t seed, double keep) {
  TensorField f = TensorField::random(cfg, seed);
  std::mt19937_64 rng(seed ^ 0x9E37);
  std::bernoulli_distribution k(keep);
  for (std::size_t t = 0; t < f.tensor_count(); ++t) {
    for (double& z : f.tensor(t).logits) z = k(rng) ? 1.5 : -2.0;
  }
  return f;
}

void expect_decoded_matches(const TensorField& a, const TensorField& b, int bits) {
  ASSERT_EQ(a.tensor_count(), b.tensor_count());
  for (std::size_t t = 0; t < a.tensor_count(); ++t) {
    const MaskedArray& x = a.tensor(t);
    const MaskedArray& y = b.tensor(t);
    ASSERT_EQ(x.size(), y.size());
    std::vector<double> kept;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (heaviside(x.logits[i]) > 0) kept.push_back(x.coeffs[i]);
    }
    double step = 0.0;
    if (!kept.empty()) {
      const auto [lo, hi] = std::minmax_element(kept.begin(), kept.end());
      step = (*hi - *lo) / ((1 << bits) - 1);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      ASSERT_EQ(heaviside(x.logits[i]), heaviside(y.logits[i]));
      if (heaviside(x.logits[i]) > 0) {
        EXPECT_LE(std::abs(x.coeffs[i] - y.coeffs[i]), 0.5 * step + 1e-12);
      } else {
        EXPECT_EQ(y.coeffs[i], 0.0);
      }
    }
  }
}

TEST(Container, RoundTripImageAndVolume) {
  const FieldConfig img = FieldConfig::image(32, 32, 3, DomainMode::kWavelet, 3);
  const FieldConfig vol = FieldConfig::volume({16, 8, 16}, 2, 1, DomainMode::kWavelet, 2);
  const FieldConfig dct = FieldConfig::image(12, 10, 1, DomainMode::kDct);
  std::uint64_t seed = 1;
  for (const FieldConfig* c : {&img, &vol, &dct}) {
    for (double keep : {0.0, 0.05, 0.5, 1.0}) {
      for (bool grouped : {true, false}) {
        const TensorField f = trained_like(*c, seed++, keep);
        const CompressedBlob blob = compress(f, CodecOptions{8, 8, grouped});
        const TensorField g = decompress(blob.bytes);
        expect_decoded_matches(f, g, 8);
        const TensorField q = quantize_field(f, 8);
        for (std::size_t t = 0; t < f.tensor_count(); ++t) {
          EXPECT_EQ(q.tensor(t).coeffs, g.tensor(t).coeffs);
        }
        EXPECT_EQ(g.config().levels, c->levels);
        EXPECT_EQ(g.config().domain, c->domain);
      }
    }
  }
}

TEST(Container, SizeReportSumsToTotal) {
  const TensorField f = trained_like(FieldConfig::image(64, 64, 1), 3, 0.1);
  const CompressedBlob blob = compress(f);
  std::size_t sum = 0;
  for (const auto& s : blob.report.sections) sum += s.bytes;
  EXPECT_EQ(sum, blob.report.total);
  EXPECT_EQ(blob.report.total, blob.bytes.size());
  const SizeReport again = size_report(blob.bytes);
  ASSERT_EQ(again.sections.size(), blob.report.sections.size());
  for (std::size_t i = 0; i < again.sections.size(); ++i) {
    EXPECT_EQ(again.sections[i].name, blob.report.sections[i].name);
    EXPECT_EQ(again.sections[i].bytes, blob.report.sections[i].bytes);
  }
  EXPECT_GT(blob.report.mask_bytes(), 0u);
}

TEST(Container, SparseMasksCompressWell) {
  const FieldConfig c = FieldConfig::image(128, 128, 1);
  const CompressedBlob dense = compress(trained_like(c, 4, 0.5));
  const CompressedBlob sparse = compress(trained_like(c, 4, 0.01));
  EXPECT_LT(sparse.report.mask_bytes() * 4, dense.report.mask_bytes());
  EXPECT_LT(sparse.bytes.size(), dense.bytes.size() / 4);
}

TEST(Container, DetectsCorruption) {
  const CompressedBlob blob = compress(trained_like(FieldConfig::image(16, 16, 1), 9, 0.3));
  for (std::size_t i = 10; i < blob.bytes.size(); i += 7) {
    auto bad = blob.bytes;
    bad[i] ^= 0x20;
    EXPECT_EQ(code_of([&] { decompress(bad); }), ErrorCode::kChecksumMismatch) << "byte " << i;
  }
  auto version = blob.bytes;
  version[4] = 2;
  EXPECT_EQ(code_of([&] { decompress(version); }), ErrorCode::kFormatVersionMismatch);
  auto magic = blob.bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of([&] { decompress(magic); }), ErrorCode::kCorruptStream);
  const std::vector<std::uint8_t> truncated(blob.bytes.begin(), blob.bytes.end() - 5);
  EXPECT_EQ(code_of([&] { decompress(truncated); }), ErrorCode::kCorruptStream);
}

TEST(Container, Deterministic) {
  const TensorField f = trained_like(FieldConfig::image(32, 32, 2), 21, 0.2);
  EXPECT_EQ(compress(f).bytes, compress(f).bytes);
}

}  // namespace
}  // namespace mwrf
