// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/field.hpp"

#include <algorithm>
#include <random>

#include "mwrf/bytes.hpp"

namespace mwrf {

std::string_view to_string(DomainMode mode) {
  switch (mode) {
    case DomainMode::kWavelet: return "wavelet";
    case DomainMode::kDct: return "dct";
    case DomainMode::kSpatial: return "spatial";
  }
  return "?";
}

DomainMode parse_domain_mode(std::string_view text) {
  for (auto m : {DomainMode::kWavelet, DomainMode::kDct, DomainMode::kSpatial}) {
    if (to_string(m) == text) return m;
  }
  fail(ErrorCode::kInvalidArgument, "unknown domain mode '" + std::string(text) + "'");
}

namespace {

std::size_t round_up(std::size_t n, std::size_t multiple) {
  return (n + multiple - 1) / multiple * multiple;
}

std::array<std::size_t, 2> plane_shape(const std::array<std::size_t, 3>& r, Axis a) {
  switch (a) {
    case Axis::kX: return {r[0], r[1]};
    case Axis::kY: return {r[1], r[2]};
    case Axis::kZ: return {r[0], r[2]};
  }
  return {0, 0};
}

std::size_t line_length(const std::array<std::size_t, 3>& r, Axis a) {
  switch (a) {
    case Axis::kX: return r[2];
    case Axis::kY: return r[0];
    case Axis::kZ: return r[1];
  }
  return 0;
}

constexpr Axis kAxes[] = {Axis::kX, Axis::kY, Axis::kZ};

}  // namespace

std::array<std::size_t, 3> FieldConfig::padded_resolution() const {
  std::array<std::size_t, 3> p = resolution;
  if (domain == DomainMode::kWavelet) {
    const std::size_t m = std::size_t{1} << levels;
    p[0] = round_up(p[0], m);
    p[1] = round_up(p[1], m);
    if (kind == FieldKind::kVolume) p[2] = round_up(p[2], m);
  }
  return p;
}

void FieldConfig::validate() const {
  if (channels < 1) fail(ErrorCode::kInvalidArgument, "channels must be >= 1");
  if (n_rank < 1) fail(ErrorCode::kInvalidArgument, "n_rank must be >= 1");
  for (auto r : resolution) {
    if (r < 1) fail(ErrorCode::kInvalidArgument, "resolution must be positive");
  }
  if (kind == FieldKind::kImage && (n_rank != 1 || resolution[2] != 1)) {
    fail(ErrorCode::kInvalidArgument, "image fields use n_rank 1 and depth 1");
  }
  if (domain == DomainMode::kWavelet) {
    if (levels < 1 || levels > 12) fail(ErrorCode::kInvalidArgument, "levels out of range");
    (void)wavelet_spec();
  }
}

FieldConfig FieldConfig::image(std::size_t height, std::size_t width, int channels,
                               DomainMode domain, int levels, WaveletName wavelet) {
  FieldConfig c;
  c.kind = FieldKind::kImage;
  c.domain = domain;
  c.wavelet = wavelet;
  c.padding = WaveletSpec::default_padding(wavelet);
  c.levels = levels;
  c.n_rank = 1;
  c.resolution = {height, width, 1};
  c.channels = channels;
  return c;
}

FieldConfig FieldConfig::volume(std::array<std::size_t, 3> resolution, int n_rank,
                                int channels, DomainMode domain, int levels,
                                WaveletName wavelet) {
  FieldConfig c;
  c.kind = FieldKind::kVolume;
  c.domain = domain;
  c.wavelet = wavelet;
  c.padding = WaveletSpec::default_padding(wavelet);
  c.levels = levels;
  c.n_rank = n_rank;
  c.resolution = resolution;
  c.channels = channels;
  return c;
}

std::vector<SubbandScale> scale_table(int levels) {
  if (levels < 1) fail(ErrorCode::kInvalidArgument, "levels must be >= 1");
  std::vector<SubbandScale> out;
  for (int j = 1; j <= levels; ++j) {
    const double s = 1.0 / static_cast<double>(levels - j + 2);
    for (auto k : {SubbandKind::kHL, SubbandKind::kLH, SubbandKind::kHH}) {
      out.push_back({j, k, s});
    }
  }
  out.push_back({levels, SubbandKind::kLL, 1.0});
  return out;
}

Matrix scale_matrix(std::size_t rows, std::size_t cols, int levels, bool enabled) {
  Matrix m(rows, cols, 1.0);
  if (!enabled) return m;
  const auto table = scale_table(levels);
  const auto layout = subband_layout(rows, cols, levels);
  for (std::size_t b = 0; b < layout.size(); ++b) {
    const auto& blk = layout[b];
    for (std::size_t r = 0; r < blk.rows; ++r) {
      for (std::size_t c = 0; c < blk.cols; ++c) {
        m(blk.row0 + r, blk.col0 + c) = table[b].scale;
      }
    }
  }
  return m;
}

TensorField::TensorField(const FieldConfig& config) : config_(config) {
  config_.validate();
  wavelet_ = config_.wavelet_spec();
  padded_ = config_.padded_resolution();
  const bool wavelet = config_.domain == DomainMode::kWavelet;
  const bool scaled = wavelet && config_.level_scaling;

  auto make_plane = [&](std::size_t rows, std::size_t cols) {
    if (wavelet) check_decomposable(rows, cols, config_.levels);
    MaskedArray a;
    a.rows = rows;
    a.cols = cols;
    a.coeffs.assign(rows * cols, 0.0);
    a.logits.assign(rows * cols, 1.0);
    return a;
  };

  if (config_.kind == FieldKind::kImage) {
    for (int c = 0; c < config_.channels; ++c) {
      planes_.push_back(make_plane(padded_[0], padded_[1]));
    }
    scales_[0] = scale_matrix(padded_[0], padded_[1], config_.levels, scaled);
    return;
  }

  for (int c = 0; c < config_.channels; ++c) {
    for (Axis a : kAxes) {
      const auto shape = plane_shape(padded_, a);
      for (int r = 0; r < config_.n_rank; ++r) planes_.push_back(make_plane(shape[0], shape[1]));
    }
  }
  for (int c = 0; c < config_.channels; ++c) {
    for (Axis a : kAxes) {
      const std::size_t n = line_length(padded_, a);
      for (int r = 0; r < config_.n_rank; ++r) {
        MaskedArray l;
        l.rows = n;
        l.cols = 1;
        l.coeffs.assign(n, 0.0);
        l.logits.assign(n, 1.0);
        lines_.push_back(std::move(l));
      }
    }
  }
  for (Axis a : kAxes) {
    const auto shape = plane_shape(padded_, a);
    scales_[static_cast<int>(a)] = scale_matrix(shape[0], shape[1], config_.levels, scaled);
  }
}

TensorField TensorField::random(const FieldConfig& config, std::uint64_t seed, double range) {
  TensorField f(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t p = 0; p < f.planes_.size(); ++p) {
    const Matrix& s = f.plane_scale(p);
    auto& coeffs = f.planes_[p].coeffs;
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = u(rng) * range / s.values()[i];
  }
  for (auto& l : f.lines_) {
    for (auto& v : l.coeffs) v = u(rng) * range;
  }
  return f;
}

std::size_t TensorField::plane_index(int channel, Axis axis, int rank) const {
  if (config_.kind == FieldKind::kImage) return static_cast<std::size_t>(channel);
  return (static_cast<std::size_t>(channel) * 3 + static_cast<std::size_t>(axis)) *
             static_cast<std::size_t>(config_.n_rank) +
         static_cast<std::size_t>(rank);
}

std::size_t TensorField::line_index(int channel, Axis axis, int rank) const {
  return (static_cast<std::size_t>(channel) * 3 + static_cast<std::size_t>(axis)) *
             static_cast<std::size_t>(config_.n_rank) +
         static_cast<std::size_t>(rank);
}

Axis TensorField::plane_axis(std::size_t plane_index) const {
  if (config_.kind == FieldKind::kImage) return Axis::kX;
  return static_cast<Axis>((plane_index / static_cast<std::size_t>(config_.n_rank)) % 3);
}

int TensorField::plane_channel(std::size_t plane_index) const {
  if (config_.kind == FieldKind::kImage) return static_cast<int>(plane_index);
  return static_cast<int>(plane_index / (3 * static_cast<std::size_t>(config_.n_rank)));
}

const Matrix& TensorField::plane_scale(std::size_t plane_index) const {
  return scales_[static_cast<int>(plane_axis(plane_index))];
}

std::size_t TensorField::mask_element_count() const {
  std::size_t n = 0;
  for (const auto& p : planes_) n += p.size();
  for (const auto& l : lines_) n += l.size();
  return n;
}

std::vector<double> apply_mask(std::span<const double> params,
                               std::span<const double> logits) {
  if (params.size() != logits.size()) fail(ErrorCode::kShapeMismatch, "mask shape");
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = heaviside(logits[i]) * params[i];
  return out;
}

Matrix plane_to_spatial(Matrix coeffs, const FieldConfig& config, const WaveletSpec& spec) {
  switch (config.domain) {
    case DomainMode::kWavelet:
      waverec2_inplace(coeffs, spec, config.levels);
      return coeffs;
    case DomainMode::kDct:
      return idct2(coeffs);
    case DomainMode::kSpatial:
      return coeffs;
  }
  return coeffs;
}

Matrix reconstruct_plane(const TensorField& field, std::size_t plane_index) {
  const MaskedArray& p = field.planes().at(plane_index);
  const Matrix& s = field.plane_scale(plane_index);
  Matrix m(p.rows, p.cols);
  for (std::size_t i = 0; i < p.size(); ++i) {
    m.values()[i] = heaviside(p.logits[i]) * p.coeffs[i] * s.values()[i];
  }
  return plane_to_spatial(std::move(m), field.config(), field.wavelet());
}

std::vector<double> masked_line(const TensorField& field, std::size_t line_index) {
  const MaskedArray& l = field.lines().at(line_index);
  return apply_mask(l.coeffs, l.logits);
}

Lerp1 lerp_coords(double p, std::size_t n) {
  if (n <= 1) return {0, 0, 0.0};
  const double u = p * static_cast<double>(n - 1);
  auto i0 = static_cast<std::size_t>(std::floor(u));
  if (i0 >= n - 1) i0 = n - 2;
  return {i0, i0 + 1, u - static_cast<double>(i0)};
}

double Grid3::trilinear(const std::array<double, 3>& p) const {
  const Lerp1 a = lerp_coords(p[0], h), b = lerp_coords(p[1], w), c = lerp_coords(p[2], d);
  double v = 0.0;
  for (int di = 0; di < 2; ++di) {
    const double wi = di ? a.t : 1.0 - a.t;
    const std::size_t i = di ? a.i1 : a.i0;
    for (int dj = 0; dj < 2; ++dj) {
      const double wj = dj ? b.t : 1.0 - b.t;
      const std::size_t j = dj ? b.i1 : b.i0;
      for (int dk = 0; dk < 2; ++dk) {
        const double wk = dk ? c.t : 1.0 - c.t;
        const std::size_t k = dk ? c.i1 : c.i0;
        v += wi * wj * wk * at(i, j, k);
      }
    }
  }
  return v;
}

SpatialField::SpatialField(const TensorField& field)
    : config_(field.config()), n_rank_(static_cast<std::size_t>(field.config().n_rank)) {
  planes_.reserve(field.planes().size());
  for (std::size_t p = 0; p < field.planes().size(); ++p) {
    planes_.push_back(reconstruct_plane(field, p));
  }
  lines_.reserve(field.lines().size());
  for (std::size_t l = 0; l < field.lines().size(); ++l) {
    lines_.push_back(masked_line(field, l));
  }
}

namespace {

inline double bilerp(const Matrix& m, const Lerp1& a, const Lerp1& b) {
  return (1.0 - a.t) * ((1.0 - b.t) * m(a.i0, b.i0) + b.t * m(a.i0, b.i1)) +
         a.t * ((1.0 - b.t) * m(a.i1, b.i0) + b.t * m(a.i1, b.i1));
}

inline double lerp(const std::vector<double>& v, const Lerp1& a) {
  return (1.0 - a.t) * v[a.i0] + a.t * v[a.i1];
}

}  // namespace

void SpatialField::sample(const Point3& p_in, std::span<double> out, bool clamp) const {
  Point3 p = p_in;
  for (double& c : p) {
    if (!(c >= 0.0 && c <= 1.0)) {
      if (!clamp) fail(ErrorCode::kOutOfDomain, "sample point outside [0,1]^3");
      c = std::clamp(std::isnan(c) ? 0.0 : c, 0.0, 1.0);
    }
  }
  const auto& res = config_.resolution;
  const Lerp1 li = lerp_coords(p[0], res[0]);
  const Lerp1 lj = lerp_coords(p[1], res[1]);
  if (config_.kind == FieldKind::kImage) {
    for (int c = 0; c < config_.channels; ++c) out[c] = bilerp(planes_[c], li, lj);
    return;
  }
  const Lerp1 lk = lerp_coords(p[2], res[2]);
  const std::size_t r = n_rank_;
  for (int c = 0; c < config_.channels; ++c) {
    double acc = 0.0;
    const std::size_t base = static_cast<std::size_t>(c) * 3 * r;
    for (std::size_t q = 0; q < r; ++q) {
      acc += bilerp(planes_[base + q], li, lj) * lerp(lines_[base + q], lk);
      acc += bilerp(planes_[base + r + q], lj, lk) * lerp(lines_[base + r + q], li);
      acc += bilerp(planes_[base + 2 * r + q], li, lk) * lerp(lines_[base + 2 * r + q], lj);
    }
    out[c] = acc;
  }
}

std::vector<Grid3> reconstruct_grid(const TensorField& field) {
  const auto& cfg = field.config();
  if (cfg.kind != FieldKind::kVolume) {
    fail(ErrorCode::kInvalidArgument, "reconstruct_grid needs a volume field");
  }
  const SpatialField sf(field);
  const auto [h, w, d] = cfg.resolution;
  const std::size_t r = static_cast<std::size_t>(cfg.n_rank);
  std::vector<Grid3> out;
  for (int c = 0; c < cfg.channels; ++c) {
    Grid3 g(h, w, d);
    const std::size_t base = static_cast<std::size_t>(c) * 3 * r;
    for (std::size_t q = 0; q < r; ++q) {
      const Matrix& px = sf.planes()[base + q];
      const Matrix& py = sf.planes()[base + r + q];
      const Matrix& pz = sf.planes()[base + 2 * r + q];
      const auto& lx = sf.lines()[base + q];
      const auto& ly = sf.lines()[base + r + q];
      const auto& lz = sf.lines()[base + 2 * r + q];
      for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
          double* row = &g.at(i, j, 0);
          const double a = px(i, j);
          const double bz = lz[j];
          for (std::size_t k = 0; k < d; ++k) {
            row[k] += a * lx[k] + py(j, k) * ly[i] + pz(i, k) * bz;
          }
        }
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<Matrix> reconstruct_image(const TensorField& field) {
  const auto& cfg = field.config();
  if (cfg.kind != FieldKind::kImage) {
    fail(ErrorCode::kInvalidArgument, "reconstruct_image needs an image field");
  }
  std::vector<Matrix> out;
  for (std::size_t p = 0; p < field.planes().size(); ++p) {
    Matrix m = reconstruct_plane(field, p);
    if (m.rows() != cfg.resolution[0] || m.cols() != cfg.resolution[1]) {
      m = m.block(0, 0, cfg.resolution[0], cfg.resolution[1]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

Matrix sample(const TensorField& field, std::span<const Point3> points, bool clamp) {
  const SpatialField sf(field);
  Matrix out(points.size(), static_cast<std::size_t>(field.config().channels));
  for (std::size_t i = 0; i < points.size(); ++i) sf.sample(points[i], out.row(i), clamp);
  return out;
}

double sparsity_loss(const TensorField& field) {
  double s = 0.0;
  for (std::size_t t = 0; t < field.tensor_count(); ++t) {
    for (double z : field.tensor(t).logits) s += sigmoid(z);
  }
  return s;
}

double hard_mask_sum(const TensorField& field) {
  double s = 0.0;
  for (std::size_t t = 0; t < field.tensor_count(); ++t) {
    for (double z : field.tensor(t).logits) s += heaviside(z);
  }
  return s;
}

std::string group_name(std::uint8_t id) {
  if (id == group::kApprox) return "approx";
  if (id == group::kLines) return "lines";
  if (id == group::kAll) return "all";
  return "detail" + std::to_string(id);
}

std::vector<std::uint8_t> mask_groups(const TensorField& field) {
  std::vector<std::uint8_t> g;
  if (field.config().domain == DomainMode::kWavelet) {
    for (int j = 1; j <= field.config().levels; ++j) g.push_back(static_cast<std::uint8_t>(j));
  }
  g.push_back(group::kApprox);
  if (!field.lines().empty()) g.push_back(group::kLines);
  return g;
}

std::vector<MaskRef> group_elements(const TensorField& field, std::uint8_t group_id) {
  std::vector<MaskRef> out;
  const auto& planes = field.planes();
  const bool wavelet = field.config().domain == DomainMode::kWavelet;
  const int levels = field.config().levels;

  auto whole_plane = [&](std::size_t p) {
    for (std::size_t e = 0; e < planes[p].size(); ++e) {
      out.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(e)});
    }
  };
  auto lines = [&] {
    for (std::size_t l = 0; l < field.lines().size(); ++l) {
      const auto t = static_cast<std::uint32_t>(planes.size() + l);
      for (std::size_t e = 0; e < field.lines()[l].size(); ++e) {
        out.push_back({t, static_cast<std::uint32_t>(e)});
      }
    }
  };

  if (group_id == group::kAll) {
    for (std::size_t p = 0; p < planes.size(); ++p) whole_plane(p);
    lines();
    return out;
  }
  if (group_id == group::kLines) {
    lines();
    return out;
  }
  if (!wavelet) {
    if (group_id != group::kApprox) fail(ErrorCode::kInvalidArgument, "no such group");
    for (std::size_t p = 0; p < planes.size(); ++p) whole_plane(p);
    return out;
  }
  if (group_id != group::kApprox && group_id > levels) {
    fail(ErrorCode::kInvalidArgument, "no such group");
  }
  for (std::size_t p = 0; p < planes.size(); ++p) {
    const auto layout = subband_layout(planes[p].rows, planes[p].cols, levels);
    for (const auto& blk : layout) {
      const bool take = group_id == group::kApprox ? blk.kind == SubbandKind::kLL
                                                   : (blk.kind != SubbandKind::kLL &&
                                                      blk.level == group_id);
      if (!take) continue;
      for (std::size_t r = 0; r < blk.rows; ++r) {
        for (std::size_t c = 0; c < blk.cols; ++c) {
          out.push_back({static_cast<std::uint32_t>(p),
                         static_cast<std::uint32_t>((blk.row0 + r) * planes[p].cols +
                                                    blk.col0 + c)});
        }
      }
    }
  }
  return out;
}

SparsityReport sparsity_report(const TensorField& field) {
  SparsityReport rep;
  rep.soft_sum = sparsity_loss(field);
  for (std::uint8_t id : mask_groups(field)) {
    GroupSparsity g;
    g.id = id;
    for (const MaskRef& m : group_elements(field, id)) {
      ++g.count;
      if (field.tensor(m.tensor).logits[m.element] < 0.0) ++g.zeros;
    }
    rep.zeros += g.zeros;
    rep.count += g.count;
    rep.groups.push_back(g);
  }
  rep.hard_sum = static_cast<double>(rep.count - rep.zeros);
  rep.total = rep.count ? static_cast<double>(rep.zeros) / rep.count : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization.

namespace {

constexpr char kFieldMagic[5] = "MWFD";
constexpr std::uint16_t kFieldVersion = 1;

}  // namespace

std::vector<std::uint8_t> serialize_field(const TensorField& field) {
  const auto& c = field.config();
  ByteWriter w;
  w.tag(kFieldMagic);
  w.u16(kFieldVersion);
  w.u8(static_cast<std::uint8_t>(c.kind));
  w.u8(static_cast<std::uint8_t>(c.domain));
  w.u8(static_cast<std::uint8_t>(c.wavelet));
  w.u8(static_cast<std::uint8_t>(c.padding));
  w.u8(static_cast<std::uint8_t>(c.levels));
  w.u8(c.level_scaling ? 1 : 0);
  w.u8(static_cast<std::uint8_t>(Upsampling::kZeroInsertion));
  w.u8(0);
  w.u32(static_cast<std::uint32_t>(c.n_rank));
  w.u32(static_cast<std::uint32_t>(c.resolution[0]));
  w.u32(static_cast<std::uint32_t>(c.resolution[1]));
  w.u32(static_cast<std::uint32_t>(c.resolution[2]));
  w.u32(static_cast<std::uint32_t>(c.channels));
  for (std::size_t t = 0; t < field.tensor_count(); ++t) {
    const auto& a = field.tensor(t);
    for (double v : a.coeffs) w.f32(static_cast<float>(v));
    for (double v : a.logits) w.f32(static_cast<float>(v));
  }
  return w.take();
}

TensorField deserialize_field(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.tag(kFieldMagic)) fail(ErrorCode::kCorruptStream, "not a field file (bad magic)");
  const auto version = r.u16();
  if (version != kFieldVersion) {
    fail(ErrorCode::kFormatVersionMismatch, "field version " + std::to_string(version));
  }
  FieldConfig c;
  c.kind = static_cast<FieldKind>(r.u8());
  c.domain = static_cast<DomainMode>(r.u8());
  c.wavelet = static_cast<WaveletName>(r.u8());
  c.padding = static_cast<Padding>(r.u8());
  c.levels = r.u8();
  c.level_scaling = r.u8() != 0;
  if (r.u8() != static_cast<std::uint8_t>(Upsampling::kZeroInsertion)) {
    fail(ErrorCode::kFormatVersionMismatch, "unknown upsampling mode");
  }
  r.u8();
  c.n_rank = static_cast<int>(r.u32());
  c.resolution[0] = r.u32();
  c.resolution[1] = r.u32();
  c.resolution[2] = r.u32();
  c.channels = static_cast<int>(r.u32());
  if (static_cast<std::uint8_t>(c.kind) > 1 || static_cast<std::uint8_t>(c.domain) > 2 ||
      static_cast<std::uint8_t>(c.wavelet) > 4 || static_cast<std::uint8_t>(c.padding) > 2) {
    fail(ErrorCode::kCorruptStream, "bad enum in field header");
  }
  {
    // Reject headers whose arrays cannot fit in the remaining bytes before
    // allocating anything.
    c.validate();
    const auto p = c.padded_resolution();
    const double per_channel =
        c.kind == FieldKind::kImage
            ? static_cast<double>(p[0]) * p[1]
            : static_cast<double>(c.n_rank) *
                  (double(p[0]) * p[1] + double(p[1]) * p[2] + double(p[0]) * p[2] + p[0] +
                   p[1] + p[2]);
    if (per_channel * c.channels * 8.0 != static_cast<double>(r.remaining())) {
      fail(ErrorCode::kCorruptStream, "field payload size does not match header");
    }
  }
  TensorField f(c);
  for (std::size_t t = 0; t < f.tensor_count(); ++t) {
    auto& a = f.tensor(t);
    for (double& v : a.coeffs) v = r.f32();
    for (double& v : a.logits) v = r.f32();
  }
  if (r.remaining() != 0) fail(ErrorCode::kCorruptStream, "trailing bytes in field file");
  return f;
}

void save_field(const TensorField& field, const std::filesystem::path& path) {
  write_file(path, serialize_field(field));
}

TensorField load_field(const std::filesystem::path& path) {
  return deserialize_field(read_file(path));
}

}  // namespace mwrf
