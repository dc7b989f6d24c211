// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>

#include "mwrf/bytes.hpp"
#include "mwrf/error.hpp"

namespace mwrf {

Matrix Image::channel(int c) const {
  Matrix m(height, width);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) m(y, x) = at(y, x, c);
  }
  return m;
}

Image Image::from_channels(std::span<const Matrix> channels) {
  if (channels.empty()) fail(ErrorCode::kEmptyInput, "no channels");
  Image img(channels[0].rows(), channels[0].cols(), static_cast<int>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    if (!channels[c].same_shape(channels[0])) fail(ErrorCode::kShapeMismatch, "channel shapes");
    for (std::size_t y = 0; y < img.height; ++y) {
      for (std::size_t x = 0; x < img.width; ++x) img.at(y, x, static_cast<int>(c)) = channels[c](y, x);
    }
  }
  return img;
}

namespace {

std::string lower_ext(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) fail(ErrorCode::kIo, "cannot open " + path.string());
  return f;
}

[[noreturn]] void png_error_fn(png_structp, png_const_charp msg) {
  throw Error(ErrorCode::kIo, std::string("png: ") + msg);
}
void png_warning_fn(png_structp, png_const_charp) {}

Image read_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) fail(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // little-endian u16 rows
  png_read_update_info(png, info);

  const std::size_t w = png_get_image_width(png, info);
  const std::size_t h = png_get_image_height(png, info);
  const int channels = png_get_channels(png, info);
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buf(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (std::size_t y = 0; y < h; ++y) rows[y] = buf.data() + y * rowbytes;
  png_read_image(png, rows.data());

  Image img(h, w, channels);
  const double maxv = out_depth == 16 ? 65535.0 : 255.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t i = 0; i < w * static_cast<std::size_t>(channels); ++i) {
      const double v = out_depth == 16
                           ? static_cast<double>(rows[y][2 * i] | (rows[y][2 * i + 1] << 8))
                           : static_cast<double>(rows[y][i]);
      img.data[y * w * static_cast<std::size_t>(channels) + i] = v / maxv;
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img,
               const std::vector<std::uint8_t>& codes) {
  if (img.channels != 1 && img.channels != 3) fail(ErrorCode::kIo, "png: 1 or 3 channels");
  FilePtr f = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (!png) fail(ErrorCode::kIo, "png: out of memory");
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};

  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height),
               8, img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = img.width * static_cast<std::size_t>(img.channels);
  for (std::size_t y = 0; y < img.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(codes.data() + y * stride));
  }
  png_write_end(png, nullptr);
}

// Skips whitespace and '#' comments in a PNM header.
int pnm_int(std::FILE* f) {
  int c = std::fgetc(f);
  while (c != EOF && (std::isspace(c) || c == '#')) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = std::fgetc(f);
    }
    c = std::fgetc(f);
  }
  long v = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > std::numeric_limits<int>::max()) fail(ErrorCode::kIo, "pnm: header value too large");
    any = true;
    c = std::fgetc(f);
  }
  if (!any) fail(ErrorCode::kIo, "pnm: malformed header");
  return static_cast<int>(v);
}

Image read_pnm(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  char magic[2];
  if (std::fread(magic, 1, 2, f.get()) != 2 || magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    fail(ErrorCode::kIo, "pnm: only binary P5/P6 supported");
  }
  const int channels = magic[1] == '5' ? 1 : 3;
  const int w = pnm_int(f.get());
  const int h = pnm_int(f.get());
  const int maxv = pnm_int(f.get());
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 65535) fail(ErrorCode::kIo, "pnm: bad header");
  Image img(static_cast<std::size_t>(h), static_cast<std::size_t>(w), channels);
  const std::size_t n = img.data.size();
  const std::size_t bpp = maxv > 255 ? 2 : 1;
  std::vector<std::uint8_t> raw(n * bpp);
  if (std::fread(raw.data(), 1, raw.size(), f.get()) != raw.size()) {
    fail(ErrorCode::kIo, "pnm: truncated pixel data");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double v = bpp == 2 ? (raw[2 * i] << 8 | raw[2 * i + 1]) : raw[i];
    img.data[i] = v / maxv;
  }
  return img;
}

std::vector<std::uint8_t> to_codes(const Image& img, Transfer transfer) {
  std::vector<std::uint8_t> codes(img.data.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    double v = std::clamp(img.data[i], 0.0, 1.0);
    if (transfer == Transfer::kSrgb) v = linear_to_srgb(v);
    codes[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return codes;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::kIo, "no such file: " + path.string());
  const std::string ext = lower_ext(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
  return read_png(path);
}

void write_image(const std::filesystem::path& path, const Image& image, Transfer transfer) {
  const auto codes = to_codes(image, transfer);
  const std::string ext = lower_ext(path);
  if (ext == ".png") {
    write_png(path, image, codes);
    return;
  }
  if (ext != ".pgm" && ext != ".ppm") fail(ErrorCode::kIo, "unsupported image extension " + ext);
  if ((ext == ".pgm") != (image.channels == 1) || (image.channels != 1 && image.channels != 3)) {
    fail(ErrorCode::kIo, "channel count does not match " + ext);
  }
  FilePtr f = open_file(path, "wb");
  std::fprintf(f.get(), "P%c\n%zu %zu\n255\n", image.channels == 1 ? '5' : '6', image.width,
               image.height);
  if (std::fwrite(codes.data(), 1, codes.size(), f.get()) != codes.size()) {
    fail(ErrorCode::kIo, "short write to " + path.string());
  }
}

Image to_gray(const Image& image) {
  if (image.channels == 1) return image;
  if (image.channels < 3) fail(ErrorCode::kInvalidArgument, "to_gray needs 1 or 3+ channels");
  Image g(image.height, image.width, 1);
  for (std::size_t y = 0; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      g.at(y, x, 0) = 0.299 * image.at(y, x, 0) + 0.587 * image.at(y, x, 1) + 0.114 * image.at(y, x, 2);
    }
  }
  return g;
}

double linear_to_srgb(double v) {
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

double mse(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::kShapeMismatch, "mse: size mismatch");
  if (a.empty()) fail(ErrorCode::kEmptyInput, "mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(std::span<const double> a, std::span<const double> b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double psnr(const Image& a, const Image& b) {
  if (a.height != b.height || a.width != b.width || a.channels != b.channels) {
    fail(ErrorCode::kShapeMismatch, "psnr: image shapes differ");
  }
  return psnr(a.data, b.data);
}

std::vector<Grid3> read_volume(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  if (!r.tag("MWVG")) fail(ErrorCode::kCorruptStream, "not a volume file");
  const std::uint16_t version = r.u16();
  if (version != 1) fail(ErrorCode::kFormatVersionMismatch, "volume version");
  const std::size_t h = r.u32(), w = r.u32(), d = r.u32(), c = r.u32();
  if (h == 0 || w == 0 || d == 0 || c == 0) fail(ErrorCode::kCorruptStream, "empty volume");
  // Divide down instead of multiplying so hostile headers cannot overflow.
  std::size_t n = r.remaining();
  bool ok = n % 4 == 0;
  n /= 4;
  for (std::size_t dim : {c, h, w}) {
    ok = ok && n % dim == 0;
    n /= dim;
  }
  if (!ok || n != d) fail(ErrorCode::kCorruptStream, "volume payload size");
  std::vector<Grid3> out;
  for (std::size_t ch = 0; ch < c; ++ch) {
    Grid3 g(h, w, d);
    for (double& v : g.values) v = r.f32();
    out.push_back(std::move(g));
  }
  return out;
}

void write_volume(const std::filesystem::path& path, std::span<const Grid3> channels) {
  if (channels.empty()) fail(ErrorCode::kEmptyInput, "no channels");
  ByteWriter w;
  w.tag("MWVG");
  w.u16(1);
  const Grid3& g0 = channels[0];
  w.u32(static_cast<std::uint32_t>(g0.h));
  w.u32(static_cast<std::uint32_t>(g0.w));
  w.u32(static_cast<std::uint32_t>(g0.d));
  w.u32(static_cast<std::uint32_t>(channels.size()));
  for (const Grid3& g : channels) {
    if (g.h != g0.h || g.w != g0.w || g.d != g0.d) fail(ErrorCode::kShapeMismatch, "channel shapes");
    for (double v : g.values) w.f32(static_cast<float>(v));
  }
  write_file(path, w.buffer());
}

}  // namespace mwrf
