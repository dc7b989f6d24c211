// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "json.hpp"
#include "mwrf/error.hpp"

namespace mwrf {

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }
Vec3 normalized(const Vec3& a) {
  const double n = norm(a);
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::kInvalidArgument, "zero-length vector");
  return {a[0] / n, a[1] / n, a[2] / n};
}

}  // namespace

Ray Ray::make(const Vec3& origin, const Vec3& direction, double t_near, double t_far) {
  if (!(t_near < t_far)) fail(ErrorCode::kInvalidArgument, "ray needs t_near < t_far");
  return {origin, normalized(direction), t_near, t_far};
}

bool clip_to_unit_cube(const Ray& ray, double& t0, double& t1) {
  t0 = ray.t_near;
  t1 = ray.t_far;
  for (int a = 0; a < 3; ++a) {
    const double o = ray.origin[a], d = ray.direction[a];
    if (d == 0.0) {
      if (o < 0.0 || o > 1.0) return false;
      continue;
    }
    double ta = (0.0 - o) / d, tb = (1.0 - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 < t1;
}

RadianceFn field_radiance(const SpatialField& density, const SpatialField& color) {
  if (density.config().channels != 1 || color.config().channels != 3) {
    fail(ErrorCode::kShapeMismatch, "density needs 1 channel and color 3");
  }
  return [&density, &color](const Point3& p) {
    double s = 0.0;
    double c[3];
    density.sample(p, std::span<double>(&s, 1), true);
    color.sample(p, c, true);
    return RadianceSample{std::max(s, 0.0), {sigmoid(c[0]), sigmoid(c[1]), sigmoid(c[2])}};
  };
}

RadianceFn grid_radiance(const Grid3& density, std::span<const Grid3, 3> color) {
  return [&density, color](const Point3& p) {
    Point3 q{std::clamp(p[0], 0.0, 1.0), std::clamp(p[1], 0.0, 1.0), std::clamp(p[2], 0.0, 1.0)};
    return RadianceSample{std::max(density.trilinear(q), 0.0),
                          {color[0].trilinear(q), color[1].trilinear(q), color[2].trilinear(q)}};
  };
}

RenderResult render_ray(const Ray& ray, const RadianceFn& radiance, const RenderOptions& options,
                        std::vector<double>* transmittance) {
  if (options.n_samples < 2) fail(ErrorCode::kInvalidArgument, "n_samples must be >= 2");
  if (transmittance) transmittance->clear();
  RenderResult out;
  out.rgb = options.background;
  double t0 = 0.0, t1 = 0.0;
  if (!clip_to_unit_cube(ray, t0, t1)) return out;
  out.hit = true;
  const int n = options.n_samples;
  const double delta = (t1 - t0) / n;
  double T = 1.0;
  Vec3 acc{0, 0, 0};
  for (int i = 0; i < n; ++i) {
    if (transmittance) transmittance->push_back(T);
    const RadianceSample s = radiance(ray.at(t0 + (i + 0.5) * delta));
    const double alpha = 1.0 - std::exp(-s.sigma * delta);
    for (int c = 0; c < 3; ++c) acc[c] += T * alpha * s.rgb[c];
    T *= 1.0 - alpha;
  }
  if (transmittance) transmittance->push_back(T);
  for (int c = 0; c < 3; ++c) out.rgb[c] = acc[c] + T * options.background[c];
  out.transmittance = T;
  return out;
}

RenderResult render_ray(const Ray& ray, const TensorField& density, const TensorField& color,
                        const RenderOptions& options) {
  const SpatialField d(density), c(color);
  return render_ray(ray, field_radiance(d, c), options);
}

Ray Camera::pixel_ray(std::size_t x, std::size_t y) const {
  const Vec3 forward = normalized(sub(look_at, position));
  const Vec3 right = normalized(cross(forward, up));
  const Vec3 true_up = cross(right, forward);
  const double tan_half = std::tan(fov_deg * std::numbers::pi / 360.0);
  const double aspect = static_cast<double>(width) / static_cast<double>(height);
  const double u = (2.0 * (static_cast<double>(x) + 0.5) / static_cast<double>(width) - 1.0) *
                   tan_half * aspect;
  const double v = (1.0 - 2.0 * (static_cast<double>(y) + 0.5) / static_cast<double>(height)) *
                   tan_half;
  Vec3 dir;
  for (int a = 0; a < 3; ++a) dir[a] = forward[a] + u * right[a] + v * true_up[a];
  return Ray::make(position, dir);
}

Image render_image(const Camera& camera, const RadianceFn& radiance, const RenderOptions& options) {
  Image img(camera.height, camera.width, 3);
  for (std::size_t y = 0; y < camera.height; ++y) {
    for (std::size_t x = 0; x < camera.width; ++x) {
      const RenderResult r = render_ray(camera.pixel_ray(x, y), radiance, options);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = r.rgb[c];
    }
  }
  return img;
}

std::vector<Camera> orbit_cameras(std::size_t count, double radius, double elevation,
                                  std::size_t width, std::size_t height, double fov_deg) {
  std::vector<Camera> cams;
  for (std::size_t i = 0; i < count; ++i) {
    const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(count);
    Camera c;
    c.position = {0.5 + radius * std::cos(th), 0.5 + elevation, 0.5 + radius * std::sin(th)};
    c.look_at = {0.5, 0.5, 0.5};
    c.up = {0, 1, 0};
    c.fov_deg = fov_deg;
    c.width = width;
    c.height = height;
    cams.push_back(c);
  }
  return cams;
}

VoxelScene make_synthetic_scene(std::size_t resolution, std::uint64_t seed) {
  if (resolution < 2) fail(ErrorCode::kTooSmall, "scene resolution must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.3, 0.7), rad(0.1, 0.2), col(0.1, 0.9);
  struct Blob {
    Vec3 c;
    double r;
    Vec3 rgb;
  };
  std::vector<Blob> blobs(4);
  for (Blob& b : blobs) {
    b.c = {pos(rng), pos(rng), pos(rng)};
    b.r = rad(rng);
    b.rgb = {col(rng), col(rng), col(rng)};
  }
  const std::size_t n = resolution;
  VoxelScene s{Grid3(n, n, n), {Grid3(n, n, n), Grid3(n, n, n), Grid3(n, n, n)}};
  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        const Vec3 p{i * step, j * step, k * step};
        double sigma = 0.0, wsum = 1e-3;
        Vec3 rgb{0.5e-3, 0.5e-3, 0.5e-3};
        for (const Blob& b : blobs) {
          const double d = norm(sub(p, b.c)) / b.r;
          // Smooth falloff from 1 at the centre to 0 at the radius.
          const double w = d < 1.0 ? (1.0 - d * d) * (1.0 - d * d) : 0.0;
          sigma += 40.0 * w;
          wsum += w;
          for (int c = 0; c < 3; ++c) rgb[c] += w * b.rgb[c];
        }
        s.density.at(i, j, k) = sigma;
        for (int c = 0; c < 3; ++c) s.color[c].at(i, j, k) = rgb[c] / wsum;
      }
    }
  }
  return s;
}

namespace {

Vec3 vec3(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) fail(ErrorCode::kInvalidArgument, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

SceneConfig load_scene_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  SceneConfig cfg;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    const auto base = path.parent_path();
    if (j.contains("camera")) {
      const auto& c = j["camera"];
      Camera& cam = cfg.camera;
      if (c.contains("position")) cam.position = vec3(c["position"]);
      if (c.contains("look_at")) cam.look_at = vec3(c["look_at"]);
      if (c.contains("up")) cam.up = vec3(c["up"]);
      cam.fov_deg = c.value("fov", cam.fov_deg);
      cam.width = c.value("width", cam.width);
      cam.height = c.value("height", cam.height);
    }
    cfg.options.n_samples = j.value("n_samples", cfg.options.n_samples);
    if (j.contains("background")) cfg.options.background = vec3(j["background"]);
    if (j.contains("density")) cfg.density = base / j["density"].get<std::string>();
    if (j.contains("color")) cfg.color = base / j["color"].get<std::string>();
    cfg.scene_resolution = j.value("scene_resolution", cfg.scene_resolution);
    cfg.scene_seed = j.value("scene_seed", cfg.scene_seed);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("scene config: ") + e.what());
  }
  if (cfg.camera.width == 0 || cfg.camera.height == 0) {
    fail(ErrorCode::kInvalidArgument, "camera resolution must be positive");
  }
  if (cfg.density.empty() != cfg.color.empty()) {
    fail(ErrorCode::kInvalidArgument, "scene config needs both density and color, or neither");
  }
  return cfg;
}

}  // namespace mwrf
