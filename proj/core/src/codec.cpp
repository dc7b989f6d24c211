// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/codec.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "mwrf/bytes.hpp"
#include "mwrf/error.hpp"

namespace mwrf {

// ---------------------------------------------------------------------------
// Quantization.

namespace {

void check_bits(int bits) {
  if (bits < 2 || bits > 16) fail(ErrorCode::kInvalidArgument, "quantization bits must be in [2, 16]");
}

double levels_of(int bits) { return static_cast<double>((1u << bits) - 1u); }

}  // namespace

double Quantized::step() const { return (max - min) / levels_of(bits); }

Quantized quantize(std::span<const double> x, int bits) {
  check_bits(bits);
  if (x.empty()) fail(ErrorCode::kEmptyInput, "quantize: empty input");
  Quantized q;
  q.bits = bits;
  q.min = q.max = x[0];
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "quantize: non-finite value");
    q.min = std::min(q.min, v);
    q.max = std::max(q.max, v);
  }
  q.codes.resize(x.size(), 0);
  if (q.max == q.min) return q;
  const double levels = levels_of(bits);
  const double scale = levels / (q.max - q.min);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double c = std::round((x[i] - q.min) * scale);
    q.codes[i] = static_cast<std::uint32_t>(std::clamp(c, 0.0, levels));
  }
  return q;
}

double dequantize_code(std::uint32_t code, double min, double max, int bits) {
  if (max == min) return min;
  return min + static_cast<double>(code) * ((max - min) / levels_of(bits));
}

std::vector<double> dequantize(const Quantized& q) {
  std::vector<double> out(q.codes.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dequantize_code(q.codes[i], q.min, q.max, q.bits);
  return out;
}

// ---------------------------------------------------------------------------
// Casting and RLE.

namespace {

void check_cast_n(int n) {
  if (n != 4 && n != 8 && n != 16) fail(ErrorCode::kInvalidArgument, "cast width must be 4, 8 or 16");
}

}  // namespace

CastSymbols cast_bits(std::span<const std::uint8_t> bits, int n) {
  check_cast_n(n);
  CastSymbols out;
  out.n = n;
  const std::size_t un = static_cast<std::size_t>(n);
  const std::size_t count = (bits.size() + un - 1) / un;
  out.pad = static_cast<int>(count * un - bits.size());
  out.symbols.resize(count, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) fail(ErrorCode::kInvalidArgument, "cast_bits: values must be 0 or 1");
    if (bits[i]) out.symbols[i / un] |= static_cast<std::uint16_t>(1u << (un - 1 - i % un));
  }
  return out;
}

std::vector<std::uint8_t> uncast_bits(const CastSymbols& cast) {
  check_cast_n(cast.n);
  const std::size_t un = static_cast<std::size_t>(cast.n);
  const std::size_t total = cast.symbols.size() * un;
  if (cast.pad < 0 || static_cast<std::size_t>(cast.pad) > total ||
      (cast.symbols.size() && static_cast<std::size_t>(cast.pad) >= un)) {
    fail(ErrorCode::kCorruptStream, "invalid pad length");
  }
  std::vector<std::uint8_t> bits(total - static_cast<std::size_t>(cast.pad));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = (cast.symbols[i / un] >> (un - 1 - i % un)) & 1u;
  }
  return bits;
}

std::vector<RunPair> rle_encode(std::span<const std::uint16_t> symbols) {
  std::vector<RunPair> out;
  for (std::uint16_t s : symbols) {
    if (!out.empty() && out.back().value == s) {
      ++out.back().run;
    } else {
      out.push_back({s, 1});
    }
  }
  return out;
}

std::vector<std::uint16_t> rle_decode(std::span<const RunPair> pairs) {
  std::vector<std::uint16_t> out;
  for (const RunPair& p : pairs) {
    if (p.run == 0) fail(ErrorCode::kCorruptStream, "zero run length");
    out.insert(out.end(), p.run, p.value);
  }
  return out;
}

std::vector<std::uint8_t> rle_serialize(std::span<const RunPair> pairs) {
  ByteWriter w;
  w.varint(pairs.size());
  for (const RunPair& p : pairs) {
    w.varint(p.value);
    w.varint(p.run);
  }
  return w.take();
}

std::vector<RunPair> rle_deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::uint64_t n = r.varint();
  if (n > bytes.size()) fail(ErrorCode::kCorruptStream, "pair count exceeds stream");
  std::vector<RunPair> out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint64_t v = r.varint();
    const std::uint64_t run = r.varint();
    if (v > 0xFFFF) fail(ErrorCode::kCorruptStream, "symbol out of range");
    if (run == 0) fail(ErrorCode::kCorruptStream, "zero run length");
    out.push_back({static_cast<std::uint16_t>(v), run});
  }
  if (r.remaining() != 0) fail(ErrorCode::kCorruptStream, "trailing bytes after RLE stream");
  return out;
}

// ---------------------------------------------------------------------------
// Huffman.

namespace {

// Unbounded Huffman code lengths; ties are broken by creation order so the
// result depends only on the frequency table.
std::vector<std::pair<std::uint16_t, std::uint8_t>> huffman_lengths(
    const std::vector<std::pair<std::uint16_t, std::uint64_t>>& freq, int& max_len) {
  struct Node {
    std::uint64_t weight;
    int left, right;
  };
  std::vector<Node> nodes;
  using Item = std::tuple<std::uint64_t, std::size_t>;  // weight, node index
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const auto& [sym, f] : freq) {
    nodes.push_back({f, -1, -1});
    heap.emplace(f, nodes.size() - 1);
  }
  while (heap.size() > 1) {
    const auto [wa, a] = heap.top();
    heap.pop();
    const auto [wb, b] = heap.top();
    heap.pop();
    nodes.push_back({wa + wb, static_cast<int>(a), static_cast<int>(b)});
    heap.emplace(wa + wb, nodes.size() - 1);
  }
  std::vector<int> depth(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > freq.size();) {
    depth[static_cast<std::size_t>(nodes[i].left)] = depth[i] + 1;
    depth[static_cast<std::size_t>(nodes[i].right)] = depth[i] + 1;
  }
  std::vector<std::pair<std::uint16_t, std::uint8_t>> out;
  max_len = 0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const int d = std::max(depth[i], 1);
    max_len = std::max(max_len, d);
    out.emplace_back(freq[i].first, static_cast<std::uint8_t>(std::min(d, 255)));
  }
  return out;
}

}  // namespace

HuffmanTable HuffmanTable::build(const std::map<std::uint16_t, std::uint64_t>& frequencies) {
  std::vector<std::pair<std::uint16_t, std::uint64_t>> freq;
  for (const auto& [s, f] : frequencies) {
    if (f > 0) freq.emplace_back(s, f);
  }
  if (freq.empty()) return {};
  for (;;) {
    int max_len = 0;
    auto lengths = huffman_lengths(freq, max_len);
    if (max_len <= kMaxCodeLength) return from_lengths(std::move(lengths));
    for (auto& [s, f] : freq) f = (f + 1) / 2;
  }
}

HuffmanTable HuffmanTable::from_lengths(std::vector<std::pair<std::uint16_t, std::uint8_t>> lengths) {
  HuffmanTable t;
  double kraft = 0.0;
  for (const auto& [s, len] : lengths) {
    if (len < 1 || len > kMaxCodeLength) fail(ErrorCode::kCorruptStream, "invalid code length");
    if (!t.index_.emplace(s, 0).second) fail(ErrorCode::kCorruptStream, "duplicate symbol");
    kraft += std::ldexp(1.0, -len);
    t.codes_.push_back({s, len, 0});
  }
  if (kraft > 1.0) fail(ErrorCode::kCorruptStream, "code lengths violate the Kraft inequality");
  t.assign_codes();
  return t;
}

void HuffmanTable::assign_codes() {
  std::sort(codes_.begin(), codes_.end(), [](const HuffmanCode& a, const HuffmanCode& b) {
    return std::tie(a.length, a.symbol) < std::tie(b.length, b.symbol);
  });
  count_.assign(kMaxCodeLength + 2, 0);
  for (const HuffmanCode& c : codes_) ++count_[c.length];
  first_code_.assign(kMaxCodeLength + 2, 0);
  first_index_.assign(kMaxCodeLength + 2, 0);
  std::uint32_t code = 0, index = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    first_code_[static_cast<std::size_t>(len)] = code;
    first_index_[static_cast<std::size_t>(len)] = index;
    code = (code + count_[static_cast<std::size_t>(len)]) << 1;
    index += count_[static_cast<std::size_t>(len)];
  }
  std::vector<std::uint32_t> next(first_code_);
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    codes_[i].code = next[codes_[i].length]++;
    index_[codes_[i].symbol] = i;
  }
}

const HuffmanCode& HuffmanTable::lookup(std::uint16_t symbol) const {
  const auto it = index_.find(symbol);
  if (it == index_.end()) fail(ErrorCode::kUnknownSymbol, "symbol " + std::to_string(symbol) + " not in table");
  return codes_[it->second];
}

std::uint8_t HuffmanTable::length_of(std::uint16_t symbol) const {
  const auto it = index_.find(symbol);
  return it == index_.end() ? 0 : codes_[it->second].length;
}

namespace {

constexpr std::uint8_t kTableDense = 0;
constexpr std::uint8_t kTableSparse = 1;
constexpr std::uint8_t kTableNibble = 2;
constexpr std::uint8_t kTableBitmap = 3;

// Nibble stream, high nibble first.
class NibbleWriter {
 public:
  void put(std::uint8_t v) {
    if (odd_) {
      bytes_.back() |= v;
    } else {
      bytes_.push_back(static_cast<std::uint8_t>(v << 4));
    }
    odd_ = !odd_;
  }
  // 3 value bits per nibble, low group first; bit 3 marks a continuation.
  void varint(std::uint64_t v) {
    while (v >= 8) {
      put(static_cast<std::uint8_t>(8 | (v & 7)));
      v >>= 3;
    }
    put(static_cast<std::uint8_t>(v));
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  bool odd_ = false;
};

class NibbleReader {
 public:
  NibbleReader(ByteReader& r) : r_(r) {}
  std::uint8_t get() {
    if (odd_) {
      odd_ = false;
      return cur_ & 0x0F;
    }
    cur_ = r_.u8();
    odd_ = true;
    return cur_ >> 4;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0;; shift += 3) {
      if (shift > 48) fail(ErrorCode::kCorruptStream, "table varint too long");
      const std::uint8_t n = get();
      v |= static_cast<std::uint64_t>(n & 7) << shift;
      if (!(n & 8)) return v;
    }
  }

 private:
  ByteReader& r_;
  std::uint8_t cur_ = 0;
  bool odd_ = false;
};

}  // namespace

void HuffmanTable::serialize(std::vector<std::uint8_t>& out, int symbol_bits) const {
  ByteWriter sparse;
  sparse.u8(kTableSparse);
  sparse.varint(index_.size());
  std::uint32_t prev = 0;
  bool first = true;
  for (const auto& [sym, i] : index_) {
    sparse.varint(first ? sym : sym - prev - 1);
    sparse.u8(codes_[i].length);
    prev = sym;
    first = false;
  }
  std::vector<std::uint8_t> best = sparse.take();

  ByteWriter nibble;
  nibble.u8(kTableNibble);
  nibble.varint(index_.size());
  NibbleWriter nw;
  first = true;
  for (const auto& [sym, i] : index_) {
    nw.varint(first ? sym : sym - prev - 1);
    nw.put(codes_[i].length);
    prev = sym;
    first = false;
  }
  nibble.bytes(nw.bytes());
  if (nibble.size() < best.size()) best = nibble.take();

  if (symbol_bits <= 8) {
    const std::size_t alphabet = std::size_t{1} << symbol_bits;
    std::vector<std::uint8_t> dense(1 + (alphabet + 1) / 2, 0);
    dense[0] = kTableDense;
    for (const auto& [sym, i] : index_) {
      dense[1 + sym / 2] |= static_cast<std::uint8_t>(codes_[i].length << (sym % 2 ? 0 : 4));
    }
    if (dense.size() < best.size()) best = std::move(dense);

    // Presence bitmap (MSB first), then one length nibble per present symbol.
    ByteWriter bitmap;
    bitmap.u8(kTableBitmap);
    std::vector<std::uint8_t> present((alphabet + 7) / 8, 0);
    NibbleWriter lens;
    for (const auto& [sym, i] : index_) {
      present[sym / 8] |= static_cast<std::uint8_t>(0x80u >> (sym % 8));
      lens.put(codes_[i].length);
    }
    bitmap.bytes(present);
    bitmap.bytes(lens.bytes());
    if (bitmap.size() < best.size()) best = bitmap.take();
  }
  out.insert(out.end(), best.begin(), best.end());
}

HuffmanTable HuffmanTable::deserialize(std::span<const std::uint8_t> bytes, std::size_t& pos,
                                       int symbol_bits) {
  ByteReader r(bytes);
  r.seek(pos);
  std::vector<std::pair<std::uint16_t, std::uint8_t>> lengths;
  const std::uint8_t mode = r.u8();
  const std::uint64_t alphabet = std::uint64_t{1} << symbol_bits;
  if (mode == kTableDense) {
    if (symbol_bits > 8) fail(ErrorCode::kCorruptStream, "dense table for a wide alphabet");
    auto packed = r.bytes((alphabet + 1) / 2);
    for (std::uint64_t s = 0; s < alphabet; ++s) {
      const std::uint8_t len = (packed[s / 2] >> (s % 2 ? 0 : 4)) & 0x0F;
      if (len) lengths.emplace_back(static_cast<std::uint16_t>(s), len);
    }
  } else if (mode == kTableSparse) {
    const std::uint64_t n = r.varint();
    if (n > alphabet) fail(ErrorCode::kCorruptStream, "table larger than alphabet");
    std::uint64_t sym = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t d = r.varint();
      sym = i == 0 ? d : sym + d + 1;
      if (sym >= alphabet) fail(ErrorCode::kCorruptStream, "table symbol out of range");
      lengths.emplace_back(static_cast<std::uint16_t>(sym), r.u8());
    }
  } else if (mode == kTableBitmap) {
    if (symbol_bits > 8) fail(ErrorCode::kCorruptStream, "bitmap table for a wide alphabet");
    const auto present = r.bytes((alphabet + 7) / 8);
    NibbleReader nr(r);
    for (std::uint64_t sym = 0; sym < alphabet; ++sym) {
      if (present[sym / 8] & (0x80u >> (sym % 8))) lengths.emplace_back(static_cast<std::uint16_t>(sym), nr.get());
    }
  } else if (mode == kTableNibble) {
    const std::uint64_t n = r.varint();
    if (n > alphabet) fail(ErrorCode::kCorruptStream, "table larger than alphabet");
    NibbleReader nr(r);
    std::uint64_t sym = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      const std::uint64_t d = nr.varint();
      sym = i == 0 ? d : sym + d + 1;
      if (sym >= alphabet) fail(ErrorCode::kCorruptStream, "table symbol out of range");
      lengths.emplace_back(static_cast<std::uint16_t>(sym), nr.get());
    }
  } else {
    fail(ErrorCode::kCorruptStream, "unknown table mode");
  }
  pos = r.position();
  return from_lengths(std::move(lengths));
}

void BitWriter::write(std::uint32_t code, int length) {
  for (int i = length - 1; i >= 0; --i) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((code >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

void BitWriter::varint(std::uint64_t v) {
  do {
    std::uint8_t b = v & 0x7f;
    v >>= 7;
    if (v) b |= 0x80;
    write_byte(b);
  } while (v);
}

int BitReader::bit() {
  if (pos_ >= bits_) fail(ErrorCode::kCorruptStream, "bitstream truncated");
  const int b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
  ++pos_;
  return b;
}

std::uint8_t BitReader::byte() {
  std::uint8_t v = 0;
  for (int i = 0; i < 8; ++i) v = static_cast<std::uint8_t>(v << 1 | bit());
  return v;
}

std::uint64_t BitReader::varint() {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const std::uint8_t b = byte();
    v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
  }
  fail(ErrorCode::kCorruptStream, "varint longer than 64 bits");
}

class HuffmanDecoder {
 public:
  explicit HuffmanDecoder(const HuffmanTable& t) : t_(t) {}

  std::uint16_t next(BitReader& r) const {
    std::uint32_t code = 0;
    for (std::size_t len = 1; len <= static_cast<std::size_t>(kMaxCodeLength); ++len) {
      code = code << 1 | static_cast<std::uint32_t>(r.bit());
      const std::uint32_t off = code - t_.first_code_[len];
      if (code >= t_.first_code_[len] && off < t_.count_[len]) {
        return t_.codes_[t_.first_index_[len] + off].symbol;
      }
    }
    fail(ErrorCode::kCorruptStream, "invalid Huffman code");
  }

 private:
  const HuffmanTable& t_;
};

HuffmanStream huffman_encode(std::span<const RunPair> pairs, const HuffmanTable& table) {
  HuffmanStream out;
  out.table = table;
  BitWriter w;
  for (const RunPair& p : pairs) {
    if (p.run == 0) fail(ErrorCode::kInvalidArgument, "zero run length");
    const HuffmanCode& c = table.lookup(p.value);
    w.write(c.code, c.length);
    out.value_bits += c.length;
    w.varint(p.run);
  }
  out.bit_count = w.bit_count();
  out.bytes = w.finish();
  out.n_pairs = pairs.size();
  return out;
}

HuffmanStream huffman_encode(std::span<const RunPair> pairs) {
  std::map<std::uint16_t, std::uint64_t> freq;
  for (const RunPair& p : pairs) ++freq[p.value];
  return huffman_encode(pairs, HuffmanTable::build(freq));
}

std::vector<RunPair> huffman_decode(const HuffmanTable& table, std::span<const std::uint8_t> bytes,
                                    std::size_t bit_count, std::size_t n_pairs) {
  if (bit_count > bytes.size() * 8) fail(ErrorCode::kCorruptStream, "bit count exceeds stream");
  // Every pair needs at least a 1-bit code and one varint byte.
  if (n_pairs > bit_count / 9 + 1) fail(ErrorCode::kCorruptStream, "pair count exceeds stream");
  if (n_pairs > 0 && table.empty()) fail(ErrorCode::kCorruptStream, "empty Huffman table");
  HuffmanDecoder dec(table);
  BitReader r(bytes, bit_count);
  std::vector<RunPair> out;
  out.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::uint16_t v = dec.next(r);
    const std::uint64_t run = r.varint();
    if (run == 0) fail(ErrorCode::kCorruptStream, "zero run length");
    out.push_back({v, run});
  }
  return out;
}

double entropy_bits(std::span<const std::uint16_t> symbols) {
  if (symbols.empty()) return 0.0;
  std::map<std::uint16_t, std::size_t> freq;
  for (std::uint16_t s : symbols) ++freq[s];
  const double n = static_cast<double>(symbols.size());
  double h = 0.0;
  for (const auto& [s, f] : freq) {
    const double p = static_cast<double>(f) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Container.

std::size_t SizeReport::mask_bytes() const {
  std::size_t n = 0;
  for (const SizeSection& s : sections) {
    if (s.name.rfind("mask:", 0) == 0) n += s.bytes;
  }
  return n;
}

namespace {

constexpr char kMagic[5] = "MWRF";
constexpr std::uint8_t kHuffmanValuesVarintRuns = 0;
constexpr std::uint8_t kFlagLevelScaling = 1;
constexpr std::uint8_t kFlagGrouped = 2;
// Offsets of fixed header fields.
constexpr std::size_t kTotalLengthAt = 6;
// Upper bound on coefficients a header may declare before allocation.
constexpr double kMaxElements = 1u << 30;

struct GroupPlan {
  std::uint8_t id;
  std::vector<MaskRef> elements;
};

std::vector<GroupPlan> plan_groups(const TensorField& field, bool grouped) {
  std::vector<GroupPlan> plan;
  if (grouped) {
    for (std::uint8_t id : mask_groups(field)) plan.push_back({id, group_elements(field, id)});
  } else {
    plan.push_back({group::kAll, group_elements(field, group::kAll)});
  }
  return plan;
}

struct Header {
  FieldConfig config;
  bool grouped = true;
  int cast_n = 8;
  int quant_bits = 8;
  std::vector<std::pair<double, double>> ranges;
};

void write_header(ByteWriter& w, const TensorField& field, const CodecOptions& o,
                  const std::vector<Quantized>& q) {
  const FieldConfig& c = field.config();
  w.tag(kMagic);
  w.u16(kFormatVersion);
  w.u32(0);  // total length, patched at the end
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.u8(static_cast<std::uint8_t>(c.domain));
  w.u8(static_cast<std::uint8_t>(c.wavelet));
  w.u8(static_cast<std::uint8_t>(c.padding));
  w.u8(static_cast<std::uint8_t>(c.levels));
  w.u8(static_cast<std::uint8_t>((c.level_scaling ? kFlagLevelScaling : 0) |
                                 (o.grouped ? kFlagGrouped : 0)));
  w.u8(static_cast<std::uint8_t>(Upsampling::kZeroInsertion));
  w.u8(static_cast<std::uint8_t>(o.cast_n));
  w.u8(static_cast<std::uint8_t>(o.quant_bits));
  w.u8(kHuffmanValuesVarintRuns);
  w.u32(static_cast<std::uint32_t>(c.n_rank));
  for (std::size_t r : c.resolution) w.u32(static_cast<std::uint32_t>(r));
  w.u32(static_cast<std::uint32_t>(c.channels));
  w.u32(static_cast<std::uint32_t>(q.size()));
  for (const Quantized& t : q) {
    w.f64(t.min);
    w.f64(t.max);
  }
}

Header read_header(ByteReader& r) {
  Header h;
  FieldConfig& c = h.config;
  const std::uint8_t kind = r.u8(), domain = r.u8(), wavelet = r.u8(), padding = r.u8();
  const std::uint8_t levels = r.u8(), flags = r.u8(), upsampling = r.u8();
  h.cast_n = r.u8();
  h.quant_bits = r.u8();
  const std::uint8_t huffman_mode = r.u8();
  if (kind > 1 || domain > 2 || wavelet > 4 || padding > 2 || flags > 3 ||
      upsampling != static_cast<std::uint8_t>(Upsampling::kZeroInsertion) ||
      huffman_mode != kHuffmanValuesVarintRuns) {
    fail(ErrorCode::kCorruptStream, "invalid header enum");
  }
  if (h.cast_n != 4 && h.cast_n != 8 && h.cast_n != 16) fail(ErrorCode::kCorruptStream, "cast width");
  if (h.quant_bits < 2 || h.quant_bits > 16) fail(ErrorCode::kCorruptStream, "quantization bits");
  c.kind = static_cast<FieldKind>(kind);
  c.domain = static_cast<DomainMode>(domain);
  c.wavelet = static_cast<WaveletName>(wavelet);
  c.padding = static_cast<Padding>(padding);
  c.levels = levels;
  c.level_scaling = flags & kFlagLevelScaling;
  h.grouped = flags & kFlagGrouped;
  c.n_rank = static_cast<int>(r.u32());
  for (std::size_t& v : c.resolution) v = r.u32();
  c.channels = static_cast<int>(r.u32());
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kCorruptStream, std::string("header describes an invalid field: ") + e.what());
  }
  const auto p = c.padded_resolution();
  const double per = c.kind == FieldKind::kImage
                         ? static_cast<double>(p[0]) * static_cast<double>(p[1])
                         : 3.0 * c.n_rank *
                               (static_cast<double>(p[0]) * p[1] + static_cast<double>(p[1]) * p[2] +
                                static_cast<double>(p[0]) * p[2] + p[0] + p[1] + p[2]);
  if (per * c.channels > kMaxElements) fail(ErrorCode::kCorruptStream, "field too large");
  const std::uint32_t n = r.u32();
  if (static_cast<std::size_t>(n) * 16 > r.remaining()) fail(ErrorCode::kCorruptStream, "tensor count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const double lo = r.f64(), hi = r.f64();
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      fail(ErrorCode::kCorruptStream, "invalid tensor range");
    }
    h.ranges.emplace_back(lo, hi);
  }
  return h;
}

// Checks magic, version, length and CRC. Returns a reader positioned after
// the total-length field.
ByteReader open_blob(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || !r.tag(kMagic)) fail(ErrorCode::kCorruptStream, "not an mwrf file");
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    fail(ErrorCode::kFormatVersionMismatch,
         "format version " + std::to_string(version) + ", expected " + std::to_string(kFormatVersion));
  }
  const std::uint32_t total = r.u32();
  if (total != bytes.size()) fail(ErrorCode::kCorruptStream, "length field does not match file size");
  if (bytes.size() < r.position() + 4) fail(ErrorCode::kCorruptStream, "truncated file");
  const std::size_t body = bytes.size() - 4;
  ByteReader tail(bytes.subspan(body));
  if (tail.u32() != crc32(bytes.first(body))) fail(ErrorCode::kChecksumMismatch, "checksum mismatch");
  return r;
}

struct Directory {
  std::uint8_t id;
  std::uint32_t offset;
  std::uint32_t length;
};

std::vector<Directory> read_directory(ByteReader& r) {
  const std::uint16_t n = r.u16();
  std::vector<Directory> dir(n);
  for (Directory& d : dir) {
    d.id = r.u8();
    d.offset = r.u32();
    d.length = r.u32();
  }
  return dir;
}

}  // namespace

CompressedBlob compress(const TensorField& field, const CodecOptions& options) {
  check_bits(options.quant_bits);
  check_cast_n(options.cast_n);
  const std::size_t n_tensors = field.tensor_count();

  // Per-tensor quantization over surviving coefficients.
  std::vector<Quantized> quant(n_tensors);
  std::vector<std::vector<std::uint32_t>> code_at(n_tensors);
  for (std::size_t t = 0; t < n_tensors; ++t) {
    const MaskedArray& a = field.tensor(t);
    std::vector<double> kept;
    std::vector<std::size_t> where;
    for (std::size_t e = 0; e < a.size(); ++e) {
      if (heaviside(a.logits[e]) != 0.0) {
        kept.push_back(a.coeffs[e]);
        where.push_back(e);
      }
    }
    quant[t].bits = options.quant_bits;
    code_at[t].assign(a.size(), 0);
    if (kept.empty()) continue;
    quant[t] = quantize(kept, options.quant_bits);
    for (std::size_t i = 0; i < where.size(); ++i) code_at[t][where[i]] = quant[t].codes[i];
  }

  ByteWriter w;
  SizeReport rep;
  write_header(w, field, options, quant);
  rep.sections.push_back({"header", w.size()});

  const auto plan = plan_groups(field, options.grouped);
  const std::size_t dir_start = w.size();
  w.u16(static_cast<std::uint16_t>(plan.size()));
  for (const GroupPlan& g : plan) {
    w.u8(g.id);
    w.u32(0);
    w.u32(0);
  }
  rep.sections.push_back({"directory", w.size() - dir_start});

  for (std::size_t gi = 0; gi < plan.size(); ++gi) {
    const GroupPlan& g = plan[gi];
    const std::size_t start = w.size();
    std::vector<std::uint8_t> bits(g.elements.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const MaskRef& m = g.elements[i];
      bits[i] = heaviside(field.tensor(m.tensor).logits[m.element]) != 0.0;
    }
    const CastSymbols cast = cast_bits(bits, options.cast_n);
    const auto pairs = rle_encode(cast.symbols);
    const HuffmanStream hs = huffman_encode(pairs);
    hs.table.serialize(w.buffer(), options.cast_n);
    w.varint(hs.n_pairs);
    w.varint(hs.bytes.size());
    w.bytes(hs.bytes);
    const std::size_t entry = dir_start + 2 + gi * 9;
    w.patch_u32(entry + 1, static_cast<std::uint32_t>(start));
    w.patch_u32(entry + 5, static_cast<std::uint32_t>(w.size() - start));
    rep.sections.push_back({"mask:" + group_name(g.id), w.size() - start});
  }

  const std::size_t payload_start = w.size();
  std::vector<std::uint32_t> payload;
  for (const GroupPlan& g : plan) {
    for (const MaskRef& m : g.elements) {
      if (heaviside(field.tensor(m.tensor).logits[m.element]) != 0.0) {
        payload.push_back(code_at[m.tensor][m.element]);
      }
    }
  }
  w.u32(static_cast<std::uint32_t>(payload.size()));
  for (std::uint32_t c : payload) {
    if (options.quant_bits <= 8) {
      w.u8(static_cast<std::uint8_t>(c));
    } else {
      w.u16(static_cast<std::uint16_t>(c));
    }
  }
  rep.sections.push_back({"payload", w.size() - payload_start});

  w.patch_u32(kTotalLengthAt, static_cast<std::uint32_t>(w.size() + 4));
  const std::uint32_t crc = crc32(w.buffer());
  w.u32(crc);
  rep.sections.push_back({"checksum", 4});
  rep.total = w.size();
  return {w.take(), rep};
}

TensorField decompress(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_blob(bytes);
  const Header h = read_header(r);
  TensorField field(h.config);
  if (h.ranges.size() != field.tensor_count()) fail(ErrorCode::kCorruptStream, "tensor count mismatch");

  const auto plan = plan_groups(field, h.grouped);
  const auto dir = read_directory(r);
  if (dir.size() != plan.size()) fail(ErrorCode::kCorruptStream, "group count mismatch");

  std::size_t expected = r.position();
  std::size_t kept = 0;
  for (std::size_t gi = 0; gi < plan.size(); ++gi) {
    const GroupPlan& g = plan[gi];
    if (dir[gi].id != g.id || dir[gi].offset != expected) {
      fail(ErrorCode::kCorruptStream, "group directory mismatch");
    }
    if (dir[gi].length > bytes.size() - 4 - expected) fail(ErrorCode::kCorruptStream, "group overruns file");
    const auto section = bytes.subspan(dir[gi].offset, dir[gi].length);
    ByteReader s(section);
    // The bit count and pad follow from the field layout.
    const std::size_t n_bits = g.elements.size();
    CastSymbols cast;
    cast.n = h.cast_n;
    cast.pad = static_cast<int>((h.cast_n - n_bits % h.cast_n) % h.cast_n);
    std::size_t pos = 0;
    const HuffmanTable table = HuffmanTable::deserialize(section, pos, h.cast_n);
    s.seek(pos);
    const std::uint64_t n_pairs = s.varint();
    const std::uint64_t n_bytes = s.varint();
    if (n_pairs > n_bits / static_cast<std::uint64_t>(h.cast_n) + 1 || n_bytes > s.remaining()) {
      fail(ErrorCode::kCorruptStream, "group counts out of range");
    }
    const auto stream = s.bytes(n_bytes);
    if (s.remaining() != 0) fail(ErrorCode::kCorruptStream, "trailing bytes in group");
    const auto pairs = huffman_decode(table, stream, stream.size() * 8, n_pairs);
    std::uint64_t n_symbols = 0;
    for (const RunPair& p : pairs) {
      n_symbols += p.run;
      if (n_symbols > n_bits / static_cast<std::uint64_t>(h.cast_n) + 1) {
        fail(ErrorCode::kCorruptStream, "run lengths exceed group size");
      }
    }
    cast.symbols = rle_decode(pairs);
    const auto bits = uncast_bits(cast);
    if (bits.size() != n_bits) fail(ErrorCode::kCorruptStream, "decoded mask length mismatch");
    for (std::size_t i = 0; i < bits.size(); ++i) {
      const MaskRef& m = g.elements[i];
      field.tensor(m.tensor).logits[m.element] = bits[i] ? 1.0 : -1.0;
      kept += bits[i];
    }
    expected += dir[gi].length;
  }

  r.seek(expected);
  const std::uint32_t n_codes = r.u32();
  if (n_codes != kept) fail(ErrorCode::kCorruptStream, "payload count does not match masks");
  const std::size_t width = h.quant_bits <= 8 ? 1 : 2;
  if (r.remaining() != static_cast<std::size_t>(n_codes) * width + 4) {
    fail(ErrorCode::kCorruptStream, "payload size mismatch");
  }
  const std::uint32_t max_code = (1u << h.quant_bits) - 1u;
  for (const GroupPlan& g : plan) {
    for (const MaskRef& m : g.elements) {
      MaskedArray& a = field.tensor(m.tensor);
      if (a.logits[m.element] < 0.0) continue;
      const std::uint32_t code = width == 1 ? r.u8() : r.u16();
      if (code > max_code) fail(ErrorCode::kCorruptStream, "code exceeds quantization range");
      const auto [lo, hi] = h.ranges[m.tensor];
      a.coeffs[m.element] = dequantize_code(code, lo, hi, h.quant_bits);
    }
  }
  return field;
}

SizeReport size_report(std::span<const std::uint8_t> bytes) {
  ByteReader r = open_blob(bytes);
  read_header(r);
  SizeReport rep;
  rep.sections.push_back({"header", r.position()});
  const std::size_t dir_start = r.position();
  const auto dir = read_directory(r);
  rep.sections.push_back({"directory", r.position() - dir_start});
  std::size_t end = r.position();
  for (const Directory& d : dir) {
    if (d.offset != end) fail(ErrorCode::kCorruptStream, "group directory mismatch");
    rep.sections.push_back({"mask:" + group_name(d.id), d.length});
    end += d.length;
  }
  if (end > bytes.size() - 4) fail(ErrorCode::kCorruptStream, "group overruns file");
  rep.sections.push_back({"payload", bytes.size() - 4 - end});
  rep.sections.push_back({"checksum", 4});
  rep.total = bytes.size();
  return rep;
}

TensorField quantize_field(const TensorField& field, int bits) {
  check_bits(bits);
  TensorField out = field;
  for (std::size_t t = 0; t < out.tensor_count(); ++t) {
    MaskedArray& a = out.tensor(t);
    std::vector<double> kept;
    for (std::size_t e = 0; e < a.size(); ++e) {
      if (heaviside(a.logits[e]) != 0.0) kept.push_back(a.coeffs[e]);
    }
    Quantized q;
    if (!kept.empty()) q = quantize(kept, bits);
    std::size_t k = 0;
    for (std::size_t e = 0; e < a.size(); ++e) {
      if (heaviside(a.logits[e]) != 0.0) {
        a.coeffs[e] = dequantize_code(q.codes[k++], q.min, q.max, bits);
        a.logits[e] = 1.0;
      } else {
        a.coeffs[e] = 0.0;
        a.logits[e] = -1.0;
      }
    }
  }
  return out;
}

}  // namespace mwrf
