// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

// Emission-absorption ray marching through the unit cube.
//
// Each ray is clipped to [0,1]^3 and sampled at the midpoints of n equal
// segments of length delta. With sigma_i and c_i the activated density and
// color at sample i,
//
//   alpha_i = 1 - exp(-sigma_i * delta)
//   T_i     = prod_{j<i} (1 - alpha_j)
//   C       = sum_i T_i alpha_i c_i + T_n * background
//
// Field outputs are activated with relu (density) and sigmoid (color).

#ifndef MWRF_RENDER_HPP
#define MWRF_RENDER_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mwrf/field.hpp"
#include "mwrf/image_io.hpp"

namespace mwrf {

using Vec3 = std::array<double, 3>;

struct Ray {
  Vec3 origin{0, 0, 0};
  Vec3 direction{0, 0, 1};  // unit length
  double t_near = 0.0;
  double t_far = 1e9;

  Vec3 at(double t) const {
    return {origin[0] + t * direction[0], origin[1] + t * direction[1], origin[2] + t * direction[2]};
  }
  // Normalizes the direction; InvalidArgument for a zero direction or an
  // empty [t_near, t_far).
  static Ray make(const Vec3& origin, const Vec3& direction, double t_near = 0.0,
                  double t_far = 1e9);
};

// Intersection of the ray's [t_near, t_far] with the unit cube. Returns false
// when the clipped segment is empty.
bool clip_to_unit_cube(const Ray& ray, double& t0, double& t1);

struct RadianceSample {
  double sigma = 0.0;  // >= 0
  Vec3 rgb{0, 0, 0};   // in [0,1]
};
using RadianceFn = std::function<RadianceSample(const Point3&)>;

// Activated radiance of a density field (C = 1) and a color field (C = 3).
RadianceFn field_radiance(const SpatialField& density, const SpatialField& color);
// Dense grids that already hold activated sigma and rgb values.
RadianceFn grid_radiance(const Grid3& density, std::span<const Grid3, 3> color);

struct RenderOptions {
  int n_samples = 128;
  Vec3 background{1, 1, 1};
};

struct RenderResult {
  Vec3 rgb{0, 0, 0};
  double transmittance = 1.0;  // after the last sample
  bool hit = false;            // false when the ray misses the cube
};

// `transmittance`, when given, receives T_i for every sample plus the final
// value (n_samples + 1 entries); it is left empty for a miss.
RenderResult render_ray(const Ray& ray, const RadianceFn& radiance, const RenderOptions& options,
                        std::vector<double>* transmittance = nullptr);
RenderResult render_ray(const Ray& ray, const TensorField& density, const TensorField& color,
                        const RenderOptions& options);

// Pinhole camera; fov is the vertical field of view in degrees.
struct Camera {
  Vec3 position{0.5, 0.5, -1.5};
  Vec3 look_at{0.5, 0.5, 0.5};
  Vec3 up{0, 1, 0};
  double fov_deg = 40.0;
  std::size_t width = 64;
  std::size_t height = 64;

  // Ray through the centre of pixel (x, y), y growing downwards.
  Ray pixel_ray(std::size_t x, std::size_t y) const;
};

// One ray per pixel. Returns linear radiance, 3 channels.
Image render_image(const Camera& camera, const RadianceFn& radiance, const RenderOptions& options);

// `count` cameras on a circle of `radius` around the cube centre at height
// `elevation` above it, all looking at the centre.
std::vector<Camera> orbit_cameras(std::size_t count, double radius, double elevation,
                                  std::size_t width, std::size_t height, double fov_deg = 40.0);

// Dense synthetic scene: a few soft-edged coloured blobs in empty space.
struct VoxelScene {
  Grid3 density;
  std::array<Grid3, 3> color;

  RadianceFn radiance() const { return grid_radiance(density, color); }
};
VoxelScene make_synthetic_scene(std::size_t resolution, std::uint64_t seed);

// Render job description read from JSON:
//   { "camera": {"position": [x,y,z], "look_at": [...], "up": [...],
//                "fov": deg, "width": w, "height": h},
//     "density": "density.field", "color": "color.field",
//     "n_samples": 128, "background": [1,1,1] }
// Relative paths resolve against the config file's directory. Omitted keys
// keep their defaults; "density"/"color" may be omitted to render the
// built-in synthetic scene ("scene_resolution", "scene_seed").
struct SceneConfig {
  Camera camera;
  RenderOptions options;
  std::filesystem::path density;
  std::filesystem::path color;
  std::size_t scene_resolution = 64;
  std::uint64_t scene_seed = 0;
};
SceneConfig load_scene_config(const std::filesystem::path& path);

}  // namespace mwrf

#endif  // MWRF_RENDER_HPP
