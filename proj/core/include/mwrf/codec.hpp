// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Mask and coefficient coding.
//
// A field is stored as its hard masks plus the coefficients that survive
// them. Mask bits are split into groups (one per detail level, the
// approximation, and the lines), each group is packed into n-bit symbols,
// run-length encoded, and the run values are Huffman coded with the run
// lengths following each code as LEB128 bytes. Surviving coefficients are
// quantized per tensor and appended in mask order. See docs/format.md for
// the byte layout.

#ifndef MWRF_CODEC_HPP
#define MWRF_CODEC_HPP

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mwrf/field.hpp"

namespace mwrf {

// ---------------------------------------------------------------------------
// Quantization.

struct Quantized {
  int bits = 8;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::uint32_t> codes;

  double step() const;
};

// Affine map of [min(x), max(x)] onto [0, 2^bits - 1], rounding to nearest.
// A constant array maps to code 0 and dequantizes exactly. Throws
// EmptyInput for an empty x and InvalidArgument unless 2 <= bits <= 16.
Quantized quantize(std::span<const double> x, int bits);
std::vector<double> dequantize(const Quantized& q);
double dequantize_code(std::uint32_t code, double min, double max, int bits);

// ---------------------------------------------------------------------------
// Bit casting and run-length coding.

struct CastSymbols {
  int n = 8;
  int pad = 0;  // zero bits appended to fill the last symbol
  std::vector<std::uint16_t> symbols;
};

// Packs 0/1 values MSB-first into n-bit symbols (n in {4, 8, 16}).
CastSymbols cast_bits(std::span<const std::uint8_t> bits, int n = 8);
std::vector<std::uint8_t> uncast_bits(const CastSymbols& cast);

struct RunPair {
  std::uint16_t value = 0;
  std::uint64_t run = 0;

  bool operator==(const RunPair&) const = default;
};

std::vector<RunPair> rle_encode(std::span<const std::uint16_t> symbols);
// Throws CorruptStream on a zero run length.
std::vector<std::uint16_t> rle_decode(std::span<const RunPair> pairs);

// Standalone byte form: varint pair count, then varint value and varint run
// per pair. Throws CorruptStream on truncation or a zero run.
std::vector<std::uint8_t> rle_serialize(std::span<const RunPair> pairs);
std::vector<RunPair> rle_deserialize(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Canonical Huffman.

inline constexpr int kMaxCodeLength = 15;

struct HuffmanCode {
  std::uint16_t symbol = 0;
  std::uint8_t length = 0;
  std::uint32_t code = 0;  // right-aligned, emitted MSB first
};

class HuffmanTable {
 public:
  HuffmanTable() = default;

  // Builds optimal code lengths for the given frequencies (entries with a
  // zero count are ignored), limited to kMaxCodeLength by flattening the
  // counts when needed. A single symbol gets a 1-bit code.
  static HuffmanTable build(const std::map<std::uint16_t, std::uint64_t>& frequencies);
  // Assigns canonical codes from (symbol, length) pairs. Throws
  // CorruptStream if the lengths do not form a valid prefix code.
  static HuffmanTable from_lengths(std::vector<std::pair<std::uint16_t, std::uint8_t>> lengths);

  // Codes sorted by (length, symbol).
  const std::vector<HuffmanCode>& codes() const { return codes_; }
  bool empty() const { return codes_.empty(); }
  // Throws UnknownSymbol.
  const HuffmanCode& lookup(std::uint16_t symbol) const;
  std::uint8_t length_of(std::uint16_t symbol) const;

  // Compact table bytes: a mode byte, then the shortest of four layouts:
  // dense 4-bit lengths over the 2^n alphabet, a (varint symbol delta,
  // u8 length) list, the same list in nibbles, or a presence bitmap plus
  // length nibbles. Dense and bitmap need n <= 8.
  void serialize(std::vector<std::uint8_t>& out, int symbol_bits) const;
  static HuffmanTable deserialize(std::span<const std::uint8_t> bytes, std::size_t& pos,
                                  int symbol_bits);

 private:
  void assign_codes();

  std::vector<HuffmanCode> codes_;
  std::map<std::uint16_t, std::size_t> index_;
  // Canonical decoding tables indexed by length.
  std::vector<std::uint32_t> first_code_;
  std::vector<std::uint32_t> first_index_;
  std::vector<std::uint32_t> count_;

  friend class HuffmanDecoder;
};

class BitWriter {
 public:
  void write(std::uint32_t code, int length);  // MSB first
  void write_byte(std::uint8_t b) { write(b, 8); }
  void varint(std::uint64_t v);
  std::size_t bit_count() const { return bits_; }
  std::vector<std::uint8_t> finish() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bits_ = 0;
};

class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_count)
      : bytes_(bytes), bits_(bit_count) {}
  // Throws CorruptStream past the end.
  int bit();
  std::uint8_t byte();
  std::uint64_t varint();
  std::size_t position() const { return pos_; }
  std::size_t bit_count() const { return bits_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bits_ = 0;
  std::size_t pos_ = 0;
};

struct HuffmanStream {
  HuffmanTable table;
  std::vector<std::uint8_t> bytes;
  std::size_t bit_count = 0;
  std::size_t value_bits = 0;  // bits spent on Huffman codes alone
  std::size_t n_pairs = 0;
};

// Codes pair values with a table built from their frequencies; each code is
// followed by the run length as LEB128 bytes.
HuffmanStream huffman_encode(std::span<const RunPair> pairs);
// Same, with a caller-provided table. Throws UnknownSymbol.
HuffmanStream huffman_encode(std::span<const RunPair> pairs, const HuffmanTable& table);
// Throws CorruptStream on truncation, invalid codes or zero runs.
std::vector<RunPair> huffman_decode(const HuffmanTable& table, std::span<const std::uint8_t> bytes,
                                    std::size_t bit_count, std::size_t n_pairs);

// Empirical entropy in bits per symbol.
double entropy_bits(std::span<const std::uint16_t> symbols);

// ---------------------------------------------------------------------------
// Container.

inline constexpr std::uint16_t kFormatVersion = 1;

struct CodecOptions {
  int quant_bits = 8;
  int cast_n = 8;
  bool grouped = true;
};

struct SizeSection {
  std::string name;
  std::size_t bytes = 0;
};

struct SizeReport {
  std::vector<SizeSection> sections;  // in file order; sums to total
  std::size_t total = 0;

  std::size_t mask_bytes() const;  // all group sections
};

struct CompressedBlob {
  std::vector<std::uint8_t> bytes;
  SizeReport report;
};

CompressedBlob compress(const TensorField& field, const CodecOptions& options = {});
// Throws FormatVersionMismatch, ChecksumMismatch or CorruptStream.
TensorField decompress(std::span<const std::uint8_t> bytes);
// Section breakdown of an existing blob.
SizeReport size_report(std::span<const std::uint8_t> bytes);

// What decompress(compress(field)) returns: hard masks kept (logits set to
// +1 or -1), surviving coefficients quantize-dequantized per tensor, masked
// coefficients zero.
TensorField quantize_field(const TensorField& field, int bits = 8);

}  // namespace mwrf

#endif  // MWRF_CODEC_HPP
