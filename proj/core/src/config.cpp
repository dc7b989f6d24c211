// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mwrf/csv.hpp"

namespace mwrf {

using nlohmann::json;

void RunConfig::validate() const {
  if ((task == FitTask::kVolume3d || task == FitTask::kRender) && n_rank < 1) {
    fail(ErrorCode::kInvalidArgument, "n_rank is required for volume3d and render");
  }
  if (task != FitTask::kRender && target.empty()) fail(ErrorCode::kInvalidArgument, "target is required");
  if (train.iters == 0) fail(ErrorCode::kInvalidArgument, "iters must be positive");
  if (train.batch == 0) fail(ErrorCode::kInvalidArgument, "batch must be positive");
  if (!(train.lambda_m >= 0.0)) fail(ErrorCode::kInvalidArgument, "lambda_m must be >= 0");
  if (!(train.lr > 0.0)) fail(ErrorCode::kInvalidArgument, "lr must be positive");
  if (!(train.lr_final_ratio > 0.0)) fail(ErrorCode::kInvalidArgument, "lr_final_ratio must be positive");
  if (domain == DomainMode::kWavelet && (levels < 1 || levels > 12)) {
    fail(ErrorCode::kInvalidArgument, "levels must be in [1, 12]");
  }
  if (padding && !WaveletSpec::supports(wavelet, *padding)) {
    fail(ErrorCode::kUnsupportedPadding, std::string(to_string(*padding)) + " padding is not supported by " +
                                             std::string(to_string(wavelet)));
  }
  if (task == FitTask::kRender && (views == 0 || view_size == 0 || scene_resolution < 2)) {
    fail(ErrorCode::kInvalidArgument, "render task needs views, view_size and scene_resolution");
  }
}

namespace {

template <typename T>
void get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "config must be a JSON object");
    static const char* kKeys[] = {"task", "target", "n_rank", "resolution", "levels", "wavelet",
                                  "padding", "domain", "level_scaling", "gray", "iters", "batch",
                                  "seed", "lambda_m", "lr", "lr_final_ratio", "mask_lr", "adam_eps",
                                  "log_every", "render_samples", "scene_resolution", "views",
                                  "view_size", "output", "trace_csv"};
    for (const auto& [k, v] : j.items()) {
      if (std::find(std::begin(kKeys), std::end(kKeys), k) == std::end(kKeys)) {
        fail(ErrorCode::kInvalidArgument, "unknown config key '" + k + "'");
      }
    }
    if (j.contains("task")) c.task = parse_fit_task(j["task"].get<std::string>());
    if (j.contains("target")) c.target = j["target"].get<std::string>();
    get(j, "n_rank", c.n_rank);
    if (j.contains("resolution")) {
      const auto r = j["resolution"].get<std::vector<std::size_t>>();
      if (r.size() < 2 || r.size() > 3) fail(ErrorCode::kInvalidArgument, "resolution needs 2 or 3 values");
      c.resolution = {r[0], r[1], r.size() == 3 ? r[2] : 1};
    }
    get(j, "levels", c.levels);
    if (j.contains("wavelet")) c.wavelet = parse_wavelet_name(j["wavelet"].get<std::string>());
    if (j.contains("padding")) c.padding = parse_padding(j["padding"].get<std::string>());
    if (j.contains("domain")) c.domain = parse_domain_mode(j["domain"].get<std::string>());
    get(j, "level_scaling", c.level_scaling);
    get(j, "gray", c.gray);
    get(j, "iters", c.train.iters);
    get(j, "batch", c.train.batch);
    get(j, "seed", c.train.seed);
    get(j, "lambda_m", c.train.lambda_m);
    get(j, "lr", c.train.lr);
    get(j, "lr_final_ratio", c.train.lr_final_ratio);
    get(j, "mask_lr", c.train.mask_lr);
    get(j, "adam_eps", c.train.adam.eps);
    get(j, "log_every", c.train.log_every);
    get(j, "render_samples", c.train.render_samples);
    get(j, "scene_resolution", c.scene_resolution);
    get(j, "views", c.views);
    get(j, "view_size", c.view_size);
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("trace_csv")) c.trace_csv = j["trace_csv"].get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["task"] = std::string(to_string(c.task));
  j["target"] = c.target.string();
  j["n_rank"] = c.n_rank;
  j["resolution"] = c.resolution;
  j["levels"] = c.levels;
  j["wavelet"] = std::string(to_string(c.wavelet));
  if (c.padding) j["padding"] = std::string(to_string(*c.padding));
  j["domain"] = std::string(to_string(c.domain));
  j["level_scaling"] = c.level_scaling;
  j["gray"] = c.gray;
  j["iters"] = c.train.iters;
  j["batch"] = c.train.batch;
  j["seed"] = c.train.seed;
  j["lambda_m"] = c.train.lambda_m;
  j["lr"] = c.train.lr;
  j["lr_final_ratio"] = c.train.lr_final_ratio;
  j["mask_lr"] = c.train.mask_lr;
  j["adam_eps"] = c.train.adam.eps;
  j["log_every"] = c.train.log_every;
  j["render_samples"] = c.train.render_samples;
  j["scene_resolution"] = c.scene_resolution;
  j["views"] = c.views;
  j["view_size"] = c.view_size;
  j["output"] = c.output.string();
  j["trace_csv"] = c.trace_csv.string();
  return j.dump(2);
}

namespace {

void apply_field_options(const RunConfig& run, FieldConfig& f) {
  f.domain = run.domain;
  f.levels = run.levels;
  f.wavelet = run.wavelet;
  f.padding = run.padding.value_or(WaveletSpec::default_padding(run.wavelet));
  f.level_scaling = run.level_scaling;
  f.validate();
}

}  // namespace

FieldConfig image_field_config(const RunConfig& run, std::size_t height, std::size_t width,
                               int channels) {
  if ((run.resolution[0] && run.resolution[0] != height) || (run.resolution[1] && run.resolution[1] != width)) {
    fail(ErrorCode::kShapeMismatch, "resolution does not match the target image");
  }
  FieldConfig f = FieldConfig::image(height, width, channels);
  apply_field_options(run, f);
  return f;
}

FieldConfig volume_field_config(const RunConfig& run, std::array<std::size_t, 3> resolution,
                                int channels) {
  FieldConfig f = FieldConfig::volume(resolution, run.n_rank, channels);
  for (int a = 0; a < 3; ++a) {
    if (run.resolution[static_cast<std::size_t>(a)]) {
      f.resolution[static_cast<std::size_t>(a)] = run.resolution[static_cast<std::size_t>(a)];
    }
  }
  apply_field_options(run, f);
  return f;
}

Image load_image_target(const RunConfig& run) {
  Image img = read_image(run.target);
  return run.gray ? to_gray(img) : img;
}

std::string SweepVariant::label() const {
  switch (domain) {
    case DomainMode::kSpatial: return "spatial";
    case DomainMode::kDct: return "dct";
    case DomainMode::kWavelet: break;
  }
  std::string s = "wavelet-L" + std::to_string(levels) + ":" + std::string(to_string(wavelet));
  if (!level_scaling) s += ":noscale";
  return s;
}

SweepVariant SweepVariant::parse(const std::string& text) {
  SweepVariant v;
  if (text == "spatial") {
    v.domain = DomainMode::kSpatial;
    return v;
  }
  if (text == "dct") {
    v.domain = DomainMode::kDct;
    return v;
  }
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty() || parts[0].rfind("wavelet-L", 0) != 0) {
    fail(ErrorCode::kInvalidArgument, "bad sweep variant '" + text + "'");
  }
  try {
    std::size_t used = 0;
    v.levels = std::stoi(parts[0].substr(9), &used);
    if (used != parts[0].size() - 9) throw std::invalid_argument("levels");
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, "bad level count in '" + text + "'");
  }
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i] == "noscale") {
      v.level_scaling = false;
    } else {
      v.wavelet = parse_wavelet_name(parts[i]);
    }
  }
  return v;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  SweepConfig s;
  try {
    const json j = json::parse(in);
    if (j.contains("base")) s.base = parse_run_config(j["base"].dump());
    if (j.contains("variants")) {
      for (const auto& v : j["variants"]) s.variants.push_back(SweepVariant::parse(v.get<std::string>()));
    }
    get(j, "lambdas", s.lambdas);
    get(j, "quant_bits", s.codec.quant_bits);
    get(j, "cast_n", s.codec.cast_n);
    get(j, "grouped", s.codec.grouped);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("sweep config: ") + e.what());
  }
  return s;
}

std::vector<SweepRow> rd_sweep(const SweepConfig& config,
                               const std::function<void(const SweepRow&)>& on_row) {
  const RunConfig& base = config.base;
  if (base.task == FitTask::kRender) fail(ErrorCode::kInvalidArgument, "rd-sweep supports image2d and volume3d");
  if (config.variants.empty() || config.lambdas.empty()) {
    fail(ErrorCode::kInvalidArgument, "rd-sweep needs at least one variant and one lambda");
  }
  base.validate();
  Image image;
  std::vector<Grid3> volume;
  if (base.task == FitTask::kImage2d) {
    image = load_image_target(base);
  } else {
    volume = read_volume(base.target);
  }

  std::vector<SweepRow> rows;
  for (const SweepVariant& v : config.variants) {
    for (double lambda : config.lambdas) {
      RunConfig run = base;
      run.domain = v.domain;
      run.levels = v.levels;
      run.wavelet = v.wavelet;
      run.level_scaling = v.level_scaling;
      run.padding.reset();
      run.train.lambda_m = lambda;
      run.validate();

      FitResult fit;
      if (base.task == FitTask::kImage2d) {
        fit = fit_image(image, image_field_config(run, image.height, image.width, image.channels), run.train);
      } else {
        const Grid3& g = volume.at(0);
        fit = fit_volume(volume, volume_field_config(run, {g.h, g.w, g.d}, static_cast<int>(volume.size())),
                         run.train);
      }
      const CompressedBlob blob = compress(fit.field, config.codec);
      const TensorField back = decompress(blob.bytes);

      SweepRow row;
      row.variant = v;
      row.lambda_m = lambda;
      row.seed = run.train.seed;
      row.iters = run.train.iters;
      row.size_bytes = blob.bytes.size();
      row.mask_bytes = blob.report.mask_bytes();
      for (const SizeSection& s : blob.report.sections) {
        if (s.name == "payload") row.payload_bytes = s.bytes;
      }
      row.psnr = fit.final_psnr;
      row.psnr_quantized = base.task == FitTask::kImage2d ? field_psnr(back, image) : field_psnr(back, volume);
      row.sparsity = sparsity_report(fit.field).total;
      if (on_row) on_row(row);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows, bool append) {
  const std::string header =
      "variant,domain,levels,wavelet,level_scaling,lambda_m,seed,iters,size_bytes,mask_bytes,"
      "payload_bytes,psnr,psnr_quantized,sparsity";
  std::vector<std::string> lines;
  for (const SweepRow& r : rows) {
    const SweepVariant& v = r.variant;
    lines.push_back(v.label() + "," + std::string(to_string(v.domain)) + "," + std::to_string(v.levels) + "," +
                    std::string(to_string(v.wavelet)) + "," + (v.level_scaling ? "1" : "0") + "," +
                    csv_number(r.lambda_m) + "," + std::to_string(r.seed) + "," + std::to_string(r.iters) + "," +
                    std::to_string(r.size_bytes) + "," + std::to_string(r.mask_bytes) + "," +
                    std::to_string(r.payload_bytes) + "," + csv_number(r.psnr) + "," +
                    csv_number(r.psnr_quantized) + "," + csv_number(r.sparsity));
  }
  write_csv(path, "# mwrf-rd-sweep v1", header, lines, append);
}

}  // namespace mwrf
