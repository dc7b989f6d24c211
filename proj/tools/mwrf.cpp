// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// mwrf: fit, compress, evaluate and render masked wavelet fields.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mwrf/bytes.hpp"
#include "mwrf/codec.hpp"
#include "mwrf/config.hpp"
#include "mwrf/csv.hpp"
#include "mwrf/fit.hpp"
#include "mwrf/image_io.hpp"
#include "mwrf/render.hpp"

namespace {

using namespace mwrf;
namespace fs = std::filesystem;

// Flags that override a RunConfig loaded from --config.
struct RunFlags {
  std::string config;
  std::optional<std::string> task, target, wavelet, padding, domain, output, trace;
  std::optional<int> n_rank, levels, render_samples;
  std::vector<std::size_t> resolution;
  std::optional<std::size_t> iters, batch, log_every, views, view_size, scene_resolution;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda_m, lr, lr_final_ratio, mask_lr, adam_eps;
  bool no_level_scaling = false;
  bool gray = false;

  void add_to(CLI::App& app, bool with_outputs) {
    app.add_option("--config", config, "JSON run configuration; flags override its values")
        ->check(CLI::ExistingFile);
    app.add_option("--task", task, "image2d, volume3d or render");
    app.add_option("--target", target, "Target image (PNG/PGM/PPM) or MWVG volume");
    app.add_option("--n-rank", n_rank, "Ranks per axis (volume3d, render)");
    app.add_option("--resolution", resolution, "Field resolution H W [D]")->expected(2, 3);
    app.add_option("--levels", levels, "Wavelet decomposition levels");
    app.add_option("--wavelet", wavelet, "haar, db4, coif1, bior4.4 or rbior4.4");
    app.add_option("--padding", padding, "symmetric, periodic or zero");
    app.add_option("--domain", domain, "wavelet, dct or spatial");
    app.add_flag("--no-level-scaling", no_level_scaling, "Disable per-level coefficient scaling");
    app.add_flag("--gray", gray, "Convert an RGB image target to luma");
    app.add_option("--iters", iters, "Training iterations");
    app.add_option("--batch", batch, "Points or rays per step");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--lambda-m", lambda_m, "Mask sparsity weight");
    app.add_option("--lr", lr, "Initial learning rate");
    app.add_option("--lr-final-ratio", lr_final_ratio, "Final / initial learning rate");
    app.add_option("--mask-lr", mask_lr, "Mask logit learning rate (default: --lr)");
    app.add_option("--adam-eps", adam_eps, "Adam epsilon");
    app.add_option("--log-every", log_every, "Trace cadence in iterations");
    app.add_option("--render-samples", render_samples, "Samples per ray (render task)");
    app.add_option("--views", views, "Training views (render task)");
    app.add_option("--view-size", view_size, "Training view width and height (render task)");
    app.add_option("--scene-resolution", scene_resolution, "Synthetic scene grid size (render task)");
    if (with_outputs) {
      app.add_option("-o,--output", output, "Output field file");
      app.add_option("--trace", trace, "Metrics CSV");
    }
  }

  RunConfig resolve() const { return apply(config.empty() ? RunConfig{} : load_run_config(config)); }

  RunConfig apply(RunConfig c) const {
    if (task) c.task = parse_fit_task(*task);
    if (target) c.target = *target;
    if (n_rank) c.n_rank = *n_rank;
    if (!resolution.empty()) c.resolution = {resolution[0], resolution[1], resolution.size() > 2 ? resolution[2] : 1};
    if (levels) c.levels = *levels;
    if (wavelet) c.wavelet = parse_wavelet_name(*wavelet);
    if (padding) c.padding = parse_padding(*padding);
    if (domain) c.domain = parse_domain_mode(*domain);
    if (no_level_scaling) c.level_scaling = false;
    if (gray) c.gray = true;
    if (iters) c.train.iters = *iters;
    if (batch) c.train.batch = *batch;
    if (seed) c.train.seed = *seed;
    if (lambda_m) c.train.lambda_m = *lambda_m;
    if (lr) c.train.lr = *lr;
    if (lr_final_ratio) c.train.lr_final_ratio = *lr_final_ratio;
    if (mask_lr) c.train.mask_lr = *mask_lr;
    if (adam_eps) c.train.adam.eps = *adam_eps;
    if (log_every) c.train.log_every = *log_every;
    if (render_samples) c.train.render_samples = *render_samples;
    if (views) c.views = *views;
    if (view_size) c.view_size = *view_size;
    if (scene_resolution) c.scene_resolution = *scene_resolution;
    if (output) c.output = *output;
    if (trace) c.trace_csv = *trace;
    c.validate();
    return c;
  }
};

std::string fmt_psnr(double p) { return csv_number(p); }

void print_sparsity(const TensorField& f) {
  const SparsityReport r = sparsity_report(f);
  std::printf("sparsity %.6f (%zu of %zu masked)\n", r.total, r.zeros, r.count);
  for (const GroupSparsity& g : r.groups) {
    std::printf("  %-8s %.6f (%zu of %zu)\n", group_name(g.id).c_str(), g.fraction(), g.zeros, g.count);
  }
}

void print_report(const SizeReport& rep) {
  for (const SizeSection& s : rep.sections) std::printf("  %-16s %10zu bytes\n", s.name.c_str(), s.bytes);
  std::printf("  %-16s %10zu bytes\n", "total", rep.total);
}

// Reads a field file, a compressed blob, or (for eval) an image.
TensorField load_any_field(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "MWRF")) return decompress(bytes);
  return deserialize_field(bytes);
}

bool is_image_path(const fs::path& p) {
  std::string e = p.extension().string();
  for (char& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e == ".png" || e == ".pgm" || e == ".ppm" || e == ".pnm";
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p += suffix;
  return p;
}

int cmd_fit(const RunFlags& flags) {
  const RunConfig run = flags.resolve();
  if (run.output.empty()) fail(ErrorCode::kInvalidArgument, "--output is required");
  switch (run.task) {
    case FitTask::kImage2d: {
      const Image img = load_image_target(run);
      const FitResult r = fit_image(img, image_field_config(run, img.height, img.width, img.channels), run.train);
      save_field(r.field, run.output);
      if (!run.trace_csv.empty()) r.trace.write_csv(run.trace_csv);
      std::printf("psnr %s dB\n", fmt_psnr(r.final_psnr).c_str());
      print_sparsity(r.field);
      break;
    }
    case FitTask::kVolume3d: {
      const auto vol = read_volume(run.target);
      const Grid3& g = vol.at(0);
      const FitResult r = fit_volume(vol, volume_field_config(run, {g.h, g.w, g.d}, static_cast<int>(vol.size())),
                                     run.train);
      save_field(r.field, run.output);
      if (!run.trace_csv.empty()) r.trace.write_csv(run.trace_csv);
      std::printf("psnr %s dB\n", fmt_psnr(r.final_psnr).c_str());
      print_sparsity(r.field);
      break;
    }
    case FitTask::kRender: {
      const VoxelScene scene = make_synthetic_scene(run.scene_resolution, run.train.seed);
      RenderOptions opts;
      opts.n_samples = run.train.render_samples;
      const RenderTarget target = make_render_target(
          scene.radiance(), orbit_cameras(run.views, 1.8, 0.6, run.view_size, run.view_size), opts);
      const std::size_t n = run.resolution[0] ? run.resolution[0] : run.scene_resolution;
      const std::array<std::size_t, 3> res{n, run.resolution[1] ? run.resolution[1] : n,
                                           run.resolution[2] ? run.resolution[2] : n};
      RunConfig field_run = run;
      field_run.resolution = {0, 0, 0};
      const RenderFitResult r = fit_render(target, volume_field_config(field_run, res, 1),
                                           volume_field_config(field_run, res, 3), run.train);
      save_field(r.density, sibling(run.output, ".density"));
      save_field(r.color, sibling(run.output, ".color"));
      if (!run.trace_csv.empty()) r.trace.write_csv(run.trace_csv);
      std::printf("psnr %s dB over %zu views\n", fmt_psnr(r.final_psnr).c_str(), run.views);
      std::printf("wrote %s and %s\n", sibling(run.output, ".density").c_str(), sibling(run.output, ".color").c_str());
      return 0;
    }
  }
  std::printf("wrote %s\n", run.output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mwrf: masked wavelet fields with learned sparse masks and a compact codec"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mwrf 0.1.0");

  RunFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit a field to an image, a volume or a synthetic scene");
  fit_flags.add_to(*fit, true);

  std::string comp_in, comp_out;
  int comp_bits = 8, comp_cast = 8;
  bool comp_ungrouped = false;
  auto* comp = app.add_subcommand("compress", "Compress a field file into .mwrf");
  comp->add_option("input", comp_in, "Field file")->required()->check(CLI::ExistingFile);
  comp->add_option("-o,--output", comp_out, "Output .mwrf file")->required();
  comp->add_option("--bits", comp_bits, "Quantization bits (2-16)");
  comp->add_option("--cast-n", comp_cast, "Mask symbol width (4, 8 or 16)");
  comp->add_flag("--ungrouped", comp_ungrouped, "Code all masks as one stream");

  std::string dec_in, dec_out;
  auto* dec = app.add_subcommand("decompress", "Expand a .mwrf file back into a field file");
  dec->add_option("input", dec_in, ".mwrf file")->required()->check(CLI::ExistingFile);
  dec->add_option("-o,--output", dec_out, "Output field file")->required();

  std::string eval_in, eval_target;
  bool eval_gray = false;
  auto* eval = app.add_subcommand("eval", "PSNR of a field, blob or image against a target");
  eval->add_option("input", eval_in, "Field file, .mwrf file or image")->required()->check(CLI::ExistingFile);
  eval->add_option("--target", eval_target, "Target image or MWVG volume")->required()->check(CLI::ExistingFile);
  eval->add_flag("--gray", eval_gray, "Convert an RGB target to luma");

  RunFlags sweep_flags;
  std::string sweep_config, sweep_out;
  std::vector<double> sweep_lambdas;
  std::vector<std::string> sweep_variants;
  int sweep_bits = 8;
  bool sweep_ungrouped = false;
  auto* sweep = app.add_subcommand("rd-sweep", "Fit and compress over representations x lambda_m");
  sweep->add_option("--sweep", sweep_config, "JSON sweep file {base, variants, lambdas}")->check(CLI::ExistingFile);
  sweep_flags.add_to(*sweep, false);
  sweep->add_option("--lambdas", sweep_lambdas, "lambda_m values")->delimiter(',');
  sweep->add_option("--variants", sweep_variants, "spatial, dct, wavelet-L<n>[:<wavelet>][:noscale]")->delimiter(',');
  sweep->add_option("--bits", sweep_bits, "Quantization bits");
  sweep->add_flag("--ungrouped", sweep_ungrouped, "Code all masks as one stream");
  sweep->add_option("-o,--output", sweep_out, "CSV to append rows to")->required();

  std::string render_scene, render_out;
  std::optional<std::size_t> render_w, render_h;
  std::optional<int> render_samples;
  auto* rend = app.add_subcommand("render", "Render a scene config to PNG/PPM");
  rend->add_option("--scene", render_scene, "Scene JSON")->required()->check(CLI::ExistingFile);
  rend->add_option("-o,--output", render_out, "Output image (.png or .ppm)")->required();
  rend->add_option("--width", render_w, "Override camera width");
  rend->add_option("--height", render_h, "Override camera height");
  rend->add_option("--samples", render_samples, "Override samples per ray");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*fit) return cmd_fit(fit_flags);

    if (*comp) {
      const TensorField f = load_field(comp_in);
      const CompressedBlob blob = compress(f, {comp_bits, comp_cast, !comp_ungrouped});
      write_file(comp_out, blob.bytes);
      std::printf("wrote %s\n", comp_out.c_str());
      print_report(blob.report);
      return 0;
    }

    if (*dec) {
      const auto bytes = read_file(dec_in);
      const TensorField f = decompress(bytes);
      save_field(f, dec_out);
      std::printf("wrote %s\n", dec_out.c_str());
      print_report(size_report(bytes));
      return 0;
    }

    if (*eval) {
      double p = 0.0;
      if (is_image_path(eval_target)) {
        Image target = read_image(eval_target);
        if (eval_gray) target = to_gray(target);
        if (is_image_path(eval_in)) {
          Image in = read_image(eval_in);
          if (eval_gray) in = to_gray(in);
          p = psnr(in, target);
        } else {
          p = field_psnr(load_any_field(eval_in), target);
        }
      } else {
        p = field_psnr(load_any_field(eval_in), read_volume(eval_target));
      }
      std::printf("psnr %s dB\n", fmt_psnr(p).c_str());
      return 0;
    }

    if (*sweep) {
      SweepConfig sc = sweep_config.empty() ? SweepConfig{} : load_sweep_config(sweep_config);
      sc.base = sweep_flags.config.empty() ? sweep_flags.apply(sc.base) : sweep_flags.resolve();
      if (!sweep_lambdas.empty()) sc.lambdas = sweep_lambdas;
      if (!sweep_variants.empty()) {
        sc.variants.clear();
        for (const std::string& v : sweep_variants) sc.variants.push_back(SweepVariant::parse(v));
      }
      sc.codec.quant_bits = sweep_bits;
      if (sweep_ungrouped) sc.codec.grouped = false;
      const auto rows = rd_sweep(sc, [&](const SweepRow& r) {
        std::printf("%-26s lambda %-10s size %8zu B  psnr %8s dB  psnr(q) %8s dB  sparsity %.4f\n",
                    r.variant.label().c_str(), csv_number(r.lambda_m).c_str(), r.size_bytes,
                    fmt_psnr(r.psnr).c_str(), fmt_psnr(r.psnr_quantized).c_str(), r.sparsity);
        std::fflush(stdout);
        write_sweep_csv(sweep_out, {r}, true);
      });
      std::printf("appended %zu rows to %s\n", rows.size(), sweep_out.c_str());
      return 0;
    }

    if (*rend) {
      SceneConfig sc = load_scene_config(render_scene);
      if (render_w) sc.camera.width = *render_w;
      if (render_h) sc.camera.height = *render_h;
      if (render_samples) sc.options.n_samples = *render_samples;
      Image img;
      if (sc.density.empty()) {
        const VoxelScene scene = make_synthetic_scene(sc.scene_resolution, sc.scene_seed);
        img = render_image(sc.camera, scene.radiance(), sc.options);
      } else {
        const SpatialField d(load_any_field(sc.density)), c(load_any_field(sc.color));
        img = render_image(sc.camera, field_radiance(d, c), sc.options);
      }
      write_image(render_out, img, Transfer::kSrgb);
      std::printf("wrote %s (%zux%zu)\n", render_out.c_str(), img.width, img.height);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mwrf: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
