// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mwrf/csv.hpp"
#include "mwrf/tape.hpp"

namespace mwrf {

std::string_view to_string(FitTask task) {
  switch (task) {
    case FitTask::kImage2d: return "image2d";
    case FitTask::kVolume3d: return "volume3d";
    case FitTask::kRender: return "render";
  }
  return "?";
}

FitTask parse_fit_task(std::string_view text) {
  if (text == "image2d") return FitTask::kImage2d;
  if (text == "volume3d") return FitTask::kVolume3d;
  if (text == "render") return FitTask::kRender;
  fail(ErrorCode::kInvalidArgument, "unknown task '" + std::string(text) + "'");
}

void Trace::write_csv(const std::filesystem::path& path, bool append) const {
  std::string header = "iter,loss,psnr,sparsity_total";
  for (const std::string& g : group_names) header += ",sparsity_" + g;
  header += ",lr";
  std::vector<std::string> lines;
  for (const TraceRow& r : rows) {
    std::string s = std::to_string(r.iter) + "," + csv_number(r.loss) + "," + csv_number(r.psnr) +
                    "," + csv_number(r.sparsity_total);
    for (double g : r.sparsity_groups) s += "," + csv_number(g);
    s += "," + csv_number(r.lr);
    lines.push_back(std::move(s));
  }
  mwrf::write_csv(path, "# mwrf-trace v1", header, lines, append);
}

namespace {

double psnr_of_mse(double m) {
  return m > 0.0 ? 10.0 * std::log10(1.0 / m) : std::numeric_limits<double>::infinity();
}

// Tape nodes for one field: trainable leaves plus the spatial planes and
// masked lines that the samplers consume.
struct FieldGraph {
  std::vector<Var> coeffs;  // per tensor
  std::vector<Var> logits;  // per tensor
  std::vector<Var> planes;
  std::vector<Var> lines;
};

FieldGraph build_graph(Tape& t, const TensorField& f) {
  FieldGraph g;
  const FieldConfig& cfg = f.config();
  const bool scaled = cfg.domain == DomainMode::kWavelet && cfg.level_scaling;
  for (std::size_t p = 0; p < f.planes().size(); ++p) {
    const MaskedArray& a = f.planes()[p];
    const Var w = t.leaf(Tensor(a.rows, a.cols, a.coeffs));
    const Var m = t.leaf(Tensor(a.rows, a.cols, a.logits));
    Var x = masked(t, w, m);
    if (scaled) x = mul_const(t, x, Tensor::from(f.plane_scale(p)));
    g.planes.push_back(to_spatial(t, x, cfg, f.wavelet()));
    g.coeffs.push_back(w);
    g.logits.push_back(m);
  }
  for (const MaskedArray& a : f.lines()) {
    const Var w = t.leaf(Tensor::vector(a.coeffs));
    const Var m = t.leaf(Tensor::vector(a.logits));
    g.lines.push_back(masked(t, w, m));
    g.coeffs.push_back(w);
    g.logits.push_back(m);
  }
  return g;
}

Var sparsity_term(Tape& t, const FieldGraph& g) {
  Var total = sigmoid_sum(t, g.logits.at(0));
  for (std::size_t i = 1; i < g.logits.size(); ++i) total = add(t, total, sigmoid_sum(t, g.logits[i]));
  return total;
}

// Shared optimizer, sparsity bookkeeping and trace for one or more fields.
class Trainer {
 public:
  Trainer(std::vector<TensorField*> fields, const TrainConfig& train)
      : fields_(std::move(fields)), train_(train) {
    if (train.iters == 0) fail(ErrorCode::kInvalidArgument, "iters must be positive");
    if (!(train.lambda_m >= 0.0)) fail(ErrorCode::kInvalidArgument, "lambda_m must be >= 0");
    if (!(train.mask_lr >= 0.0)) fail(ErrorCode::kInvalidArgument, "mask_lr must be >= 0");
    std::vector<std::size_t> sizes;
    for (TensorField* f : fields_) {
      for (std::size_t t = 0; t < f->tensor_count(); ++t) sizes.push_back(f->tensor(t).size());
    }
    const double mask_lr = train.mask_lr > 0.0 ? train.mask_lr : train.lr;
    adam_ = AdamState(sizes, train.adam, {train.lr, train.lr_final_ratio, train.iters});
    mask_adam_ = AdamState(sizes, train.adam, {mask_lr, train.lr_final_ratio, train.iters});

    for (std::uint8_t id : mask_groups(*fields_.front())) {
      ids_.push_back(id);
      trace_.group_names.push_back(group_name(id));
    }
    for (TensorField* f : fields_) {
      std::vector<std::vector<MaskRef>> per;
      for (std::uint8_t id : ids_) per.push_back(group_elements(*f, id));
      elements_.push_back(std::move(per));
    }
  }

  std::size_t iters() const { return train_.iters; }

  Var total_loss(Tape& t, Var reconstruction, const std::vector<FieldGraph>& graphs) const {
    if (train_.lambda_m == 0.0) return reconstruction;
    Var reg = sparsity_term(t, graphs[0]);
    for (std::size_t i = 1; i < graphs.size(); ++i) reg = add(t, reg, sparsity_term(t, graphs[i]));
    return add(t, reconstruction, mul_scalar(t, reg, train_.lambda_m));
  }

  // Records the trace row for the current parameters, then applies Adam.
  void step(std::size_t it, Tape& t, Var loss, double reconstruction_mse,
            const std::vector<FieldGraph>& graphs) {
    const double lv = t.value(loss).data[0];
    if (it % std::max<std::size_t>(train_.log_every, 1) == 0 || it + 1 == train_.iters ||
        !std::isfinite(lv)) {
      trace_.rows.push_back(row(it, lv, reconstruction_mse));
    }
    if (!std::isfinite(lv)) {
      throw DivergedLoss("non-finite loss at iteration " + std::to_string(it), trace_);
    }
    t.backward(loss);
    std::vector<std::span<double>> params, logits;
    std::vector<std::span<const double>> grads, logit_grads;
    for (std::size_t fi = 0; fi < fields_.size(); ++fi) {
      TensorField& f = *fields_[fi];
      for (std::size_t k = 0; k < f.tensor_count(); ++k) {
        params.emplace_back(f.tensor(k).coeffs);
        grads.emplace_back(t.grad(graphs[fi].coeffs[k]).data);
        logits.emplace_back(f.tensor(k).logits);
        logit_grads.emplace_back(t.grad(graphs[fi].logits[k]).data);
      }
    }
    adam_.update(params, grads);
    mask_adam_.update(logits, logit_grads);
  }

  Trace take_trace() { return std::move(trace_); }

 private:
  TraceRow row(std::size_t it, double loss, double reconstruction_mse) const {
    TraceRow r;
    r.iter = it;
    r.loss = loss;
    r.psnr = psnr_of_mse(reconstruction_mse);
    r.lr = adam_.current_lr();
    std::size_t zeros = 0, count = 0;
    for (std::size_t gi = 0; gi < ids_.size(); ++gi) {
      std::size_t gz = 0, gc = 0;
      for (std::size_t fi = 0; fi < fields_.size(); ++fi) {
        for (const MaskRef& m : elements_[fi][gi]) {
          gz += fields_[fi]->tensor(m.tensor).logits[m.element] < 0.0;
        }
        gc += elements_[fi][gi].size();
      }
      r.sparsity_groups.push_back(gc ? static_cast<double>(gz) / static_cast<double>(gc) : 0.0);
      zeros += gz;
      count += gc;
    }
    r.sparsity_total = count ? static_cast<double>(zeros) / static_cast<double>(count) : 0.0;
    return r;
  }

  std::vector<TensorField*> fields_;
  TrainConfig train_;
  AdamState adam_;
  AdamState mask_adam_;
  std::vector<std::uint8_t> ids_;
  std::vector<std::vector<std::vector<MaskRef>>> elements_;
  Trace trace_;
};

// Mean over channels of per-channel MSE terms.
Var channel_mean(Tape& t, const std::vector<Var>& terms) {
  Var s = terms.at(0);
  for (std::size_t i = 1; i < terms.size(); ++i) s = add(t, s, terms[i]);
  return terms.size() == 1 ? s : mul_scalar(t, s, 1.0 / static_cast<double>(terms.size()));
}

}  // namespace

FitResult fit_image(const Image& target, const FieldConfig& config, const TrainConfig& train) {
  if (config.kind != FieldKind::kImage) fail(ErrorCode::kInvalidArgument, "fit_image needs an image field");
  if (config.channels != target.channels || config.resolution[0] != target.height ||
      config.resolution[1] != target.width) {
    fail(ErrorCode::kShapeMismatch, "field config does not match the target image");
  }
  FitResult res;
  res.field = TensorField::random(config, train.seed);
  std::vector<Tensor> targets;
  for (int c = 0; c < target.channels; ++c) targets.push_back(Tensor::from(target.channel(c)));

  Trainer trainer({&res.field}, train);
  for (std::size_t it = 0; it < trainer.iters(); ++it) {
    Tape t;
    std::vector<FieldGraph> graphs{build_graph(t, res.field)};
    std::vector<Var> terms;
    for (std::size_t c = 0; c < targets.size(); ++c) terms.push_back(mse(t, graphs[0].planes[c], targets[c]));
    const Var rec = channel_mean(t, terms);
    const Var loss = trainer.total_loss(t, rec, graphs);
    trainer.step(it, t, loss, t.value(rec).data[0], graphs);
  }
  res.trace = trainer.take_trace();
  res.final_psnr = field_psnr(res.field, target);
  return res;
}

FitResult fit_volume(const std::vector<Grid3>& target, const FieldConfig& config,
                     const TrainConfig& train) {
  if (config.kind != FieldKind::kVolume) fail(ErrorCode::kInvalidArgument, "fit_volume needs a volume field");
  if (target.size() != static_cast<std::size_t>(config.channels)) {
    fail(ErrorCode::kShapeMismatch, "target channel count differs from the field");
  }
  if (train.batch == 0) fail(ErrorCode::kInvalidArgument, "batch must be positive");
  FitResult res;
  res.field = TensorField::random(config, train.seed);
  const std::size_t C = target.size();
  std::mt19937_64 rng(train.seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  Trainer trainer({&res.field}, train);
  std::vector<Point3> points(train.batch);
  for (std::size_t it = 0; it < trainer.iters(); ++it) {
    Tensor values(train.batch, C);
    for (std::size_t n = 0; n < train.batch; ++n) {
      points[n] = {u(rng), u(rng), u(rng)};
      for (std::size_t c = 0; c < C; ++c) values.data[n * C + c] = target[c].trilinear(points[n]);
    }
    Tape t;
    std::vector<FieldGraph> graphs{build_graph(t, res.field)};
    const Var pred = vm_sample(t, config, graphs[0].planes, graphs[0].lines, points);
    const Var rec = mse(t, pred, values);
    const Var loss = trainer.total_loss(t, rec, graphs);
    trainer.step(it, t, loss, t.value(rec).data[0], graphs);
  }
  res.trace = trainer.take_trace();

  res.final_psnr = field_psnr(res.field, target);
  return res;
}

double field_psnr(const TensorField& field, const Image& target) {
  const auto channels = reconstruct_image(field);
  return psnr(Image::from_channels(channels), target);
}

double field_psnr(const TensorField& field, const std::vector<Grid3>& target) {
  const FieldConfig& config = field.config();
  const std::size_t C = target.size();
  if (C != static_cast<std::size_t>(config.channels) || C == 0) {
    fail(ErrorCode::kShapeMismatch, "target channel count differs from the field");
  }
  std::vector<double> a, b;
  const Grid3& g0 = target[0];
  if (g0.h == config.resolution[0] && g0.w == config.resolution[1] && g0.d == config.resolution[2]) {
    const auto grids = reconstruct_grid(field);
    for (std::size_t c = 0; c < C; ++c) {
      a.insert(a.end(), grids[c].values.begin(), grids[c].values.end());
      b.insert(b.end(), target[c].values.begin(), target[c].values.end());
    }
    return psnr(a, b);
  }
  const SpatialField sf(field);
  std::vector<double> out(C);
  auto coord = [](std::size_t i, std::size_t n) {
    return n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
  };
  for (std::size_t i = 0; i < g0.h; ++i) {
    for (std::size_t j = 0; j < g0.w; ++j) {
      for (std::size_t k = 0; k < g0.d; ++k) {
        sf.sample({coord(i, g0.h), coord(j, g0.w), coord(k, g0.d)}, out);
        for (std::size_t c = 0; c < C; ++c) {
          a.push_back(out[c]);
          b.push_back(target[c].at(i, j, k));
        }
      }
    }
  }
  return psnr(a, b);
}

RenderTarget make_render_target(const RadianceFn& scene, std::vector<Camera> cameras,
                                const RenderOptions& options) {
  RenderTarget t;
  t.options = options;
  for (const Camera& c : cameras) t.images.push_back(render_image(c, scene, options));
  t.cameras = std::move(cameras);
  return t;
}

RenderFitResult fit_render(const RenderTarget& target, const FieldConfig& density_config,
                           const FieldConfig& color_config, const TrainConfig& train) {
  if (density_config.channels != 1 || color_config.channels != 3 ||
      density_config.kind != FieldKind::kVolume || color_config.kind != FieldKind::kVolume) {
    fail(ErrorCode::kInvalidArgument, "render fitting needs volume fields with 1 and 3 channels");
  }
  if (target.cameras.size() != target.images.size() || target.cameras.empty()) {
    fail(ErrorCode::kInvalidArgument, "render target needs one image per camera");
  }
  if (train.batch == 0 || train.render_samples < 2) {
    fail(ErrorCode::kInvalidArgument, "batch must be positive and render_samples >= 2");
  }

  struct TrainRay {
    Ray ray;
    double t0, t1;
    Vec3 rgb;
  };
  std::vector<TrainRay> rays;
  for (std::size_t ci = 0; ci < target.cameras.size(); ++ci) {
    const Camera& cam = target.cameras[ci];
    const Image& img = target.images[ci];
    if (img.height != cam.height || img.width != cam.width || img.channels != 3) {
      fail(ErrorCode::kShapeMismatch, "target image does not match its camera");
    }
    for (std::size_t y = 0; y < cam.height; ++y) {
      for (std::size_t x = 0; x < cam.width; ++x) {
        TrainRay r{cam.pixel_ray(x, y), 0, 0, {img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2)}};
        if (clip_to_unit_cube(r.ray, r.t0, r.t1)) rays.push_back(r);
      }
    }
  }
  if (rays.empty()) fail(ErrorCode::kEmptyInput, "no training ray hits the unit cube");

  RenderFitResult res;
  res.density = TensorField::random(density_config, train.seed);
  res.color = TensorField::random(color_config, train.seed + 1);
  std::mt19937_64 rng(train.seed ^ 0xD1B54A32D192ED03ull);
  std::uniform_int_distribution<std::size_t> pick(0, rays.size() - 1);

  const std::size_t B = train.batch;
  const std::size_t S = static_cast<std::size_t>(train.render_samples);
  Trainer trainer({&res.density, &res.color}, train);
  std::vector<Point3> points(B * S);
  for (std::size_t it = 0; it < trainer.iters(); ++it) {
    Tensor deltas(B, S), rgb(B, 3);
    for (std::size_t b = 0; b < B; ++b) {
      const TrainRay& r = rays[pick(rng)];
      const double delta = (r.t1 - r.t0) / static_cast<double>(S);
      for (std::size_t s = 0; s < S; ++s) {
        Point3 p = r.ray.at(r.t0 + (static_cast<double>(s) + 0.5) * delta);
        for (double& v : p) v = std::clamp(v, 0.0, 1.0);
        points[b * S + s] = p;
        deltas.data[b * S + s] = delta;
      }
      for (int c = 0; c < 3; ++c) rgb.data[b * 3 + static_cast<std::size_t>(c)] = r.rgb[c];
    }
    Tape t;
    std::vector<FieldGraph> graphs{build_graph(t, res.density), build_graph(t, res.color)};
    const Var sigma = vm_sample(t, density_config, graphs[0].planes, graphs[0].lines, points);
    const Var color = vm_sample(t, color_config, graphs[1].planes, graphs[1].lines, points);
    const Var pred = composite(t, sigma, color, deltas, target.options.background);
    const Var rec = mse(t, pred, rgb);
    const Var loss = trainer.total_loss(t, rec, graphs);
    trainer.step(it, t, loss, t.value(rec).data[0], graphs);
  }
  res.trace = trainer.take_trace();

  const SpatialField d(res.density), c(res.color);
  RenderOptions opts = target.options;
  opts.n_samples = train.render_samples;
  std::vector<double> a, b;
  for (std::size_t ci = 0; ci < target.cameras.size(); ++ci) {
    const Image img = render_image(target.cameras[ci], field_radiance(d, c), opts);
    a.insert(a.end(), img.data.begin(), img.data.end());
    b.insert(b.end(), target.images[ci].data.begin(), target.images[ci].data.end());
  }
  res.final_psnr = psnr(a, b);
  return res;
}

}  // namespace mwrf
