#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xnocs/geometry.hpp"

namespace xnocs {

// A point in normalized object coordinates; every component lies in [0, 1].
using NocsCoord = Vec3;
using Rgb = Vec3;

enum class MapKind { Visible, Occluded, PeeledColor };

struct NocsPixel {
  bool valid = false;
  NocsCoord coord;  // (0,0,0) canonically when invalid
};

// Per-pixel grid of optional NOCS coordinates. Pixel (u,v) has u rightward,
// v downward, origin at the top-left pixel center. For kind == PeeledColor
// the coord slot carries an RGB value instead of a position.
struct NocsMap {
  int width = 0;
  int height = 0;
  MapKind kind = MapKind::Visible;
  std::vector<NocsPixel> pixels;  // row-major, width*height

  NocsMap() = default;
  NocsMap(int w, int h, MapKind k) : width(w), height(h), kind(k), pixels(std::size_t(w) * h) {}

  const NocsPixel& at(int u, int v) const { return pixels[std::size_t(v) * width + u]; }
  NocsPixel& at(int u, int v) { return pixels[std::size_t(v) * width + u]; }

  void set(int u, int v, const NocsCoord& c) { at(u, v) = {true, clamp_unit(c)}; }
  void set_invalid(int u, int v) { at(u, v) = {false, {}}; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (const auto& p : pixels) n += p.valid ? 1 : 0;
    return n;
  }
};

struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 0 or 1

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(std::size_t(w) * h, 0) {}

  bool at(int u, int v) const { return bits[std::size_t(v) * width + u] != 0; }
  void set(int u, int v, bool b) { bits[std::size_t(v) * width + u] = b ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

// Indexed triangle mesh, in model units or NOCS units.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Rgb> vertex_colors;  // empty or parallel to vertices

  bool has_colors() const { return !vertex_colors.empty(); }

  Box3 bounds() const {
    Box3 b;
    for (const auto& v : vertices) b.expand(v);
    return b;
  }
};

// Validates index ranges and drops degenerate triangles (area <= 1e-12).
// Throws InputError on out-of-range indices or color/vertex count mismatch.
void cleanup_mesh(Mesh& mesh);

// Pinhole camera. World-to-camera map is p_cam = R p + t with the camera
// looking down +z; pixel u = fx x/z + cx, v = fy y/z + cy.
struct Camera {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  Mat3 rotation;
  Vec3 translation;
  int width = 0, height = 0;

  Vec3 center() const { return -(rotation.transposed() * translation); }

  // Returns (u, v, depth); depth <= 0 means behind the camera.
  Vec3 project(const Vec3& p) const {
    const Vec3 pc = rotation * p + translation;
    return {fx * pc.x / pc.z + cx, fy * pc.y / pc.z + cy, pc.z};
  }

  // World-space ray through pixel coordinate (u, v); direction normalized.
  void pixel_ray(double u, double v, Vec3& origin, Vec3& dir) const {
    origin = center();
    const Vec3 d_cam{(u - cx) / fx, (v - cy) / fy, 1.0};
    dir = normalized(rotation.transposed() * d_cam);
  }

  // Throws InputError if rotation is not orthonormal det +1 (tol 1e-9) or
  // focal lengths are not positive.
  void validate() const;

  // Camera at `eye` looking at `target`, image up aligned with `up` as far
  // as possible. fx = fy = 1.2 * max(width, height) and principal point at
  // the image center unless overridden.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, int width,
                        int height, double focal = 0.0);
};

// Unordered point set in NOCS units with optional per-point colors.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Rgb> colors;  // empty or parallel to points

  bool has_colors() const { return !colors.empty(); }
  std::size_t size() const { return points.size(); }
};

}  // namespace xnocs
