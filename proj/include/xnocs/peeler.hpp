#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xnocs/bvh.hpp"
#include "xnocs/types.hpp"

namespace xnocs {

struct RayHit {
  double t = 0.0;        // ray parameter along the normalized direction
  NocsCoord point;       // intersection in NOCS
  int triangle = -1;
  Vec3 barycentric;      // weights of the triangle's three vertices
  std::optional<Rgb> color;  // interpolated vertex color, when available
};

// All intersections for one pixel's ray, sorted ascending in t with hits
// closer than 1e-9 in t merged (shared-edge duplicates).
struct RayHitList {
  int u = 0;
  int v = 0;
  std::vector<RayHit> hits;
};

// Casts one ray per pixel and returns complete hit lists in row-major pixel
// order. Deterministic given inputs, regardless of thread schedule.
std::vector<RayHitList> cast_all(const Mesh& mesh, const Camera& camera);
std::vector<RayHitList> cast_all(const Mesh& mesh, const Bvh& bvh, const Camera& camera);

// Depth peeling. layers == 2 returns [first-hit map, last-hit map] (a pixel
// with a single intersection is valid in both); layers == k > 2 returns the
// k front-to-back intersection layers. The mesh must be normalized: any
// vertex outside [0,1]^3 by more than 1e-9 is an error.
std::vector<NocsMap> peel(const Mesh& mesh, const Camera& camera, int layers);

// Ground-truth peeled color: barycentric-interpolated vertex color at the
// last intersection; valid exactly where the last-hit map is valid.
NocsMap peel_color(const Mesh& mesh, const Camera& camera);

// Everything one view needs, from a single casting pass.
struct ViewRender {
  NocsMap visible;                    // first hit
  NocsMap occluded;                   // last hit
  std::optional<NocsMap> peeled_color;   // last-hit color, when the mesh has colors
  std::optional<NocsMap> visible_color;  // first-hit color, for RGB composites
};
ViewRender render_view(const Mesh& mesh, const Bvh& bvh, const Camera& camera);

// Cameras on a spherical shell around (0.5, 0.5, 0.5): uniform direction,
// uniform radius in [radius_min, radius_max], +y up with +x fallback at the
// poles. Deterministic per seed.
std::vector<Camera> sample_cameras(int count, double radius_min, double radius_max,
                                   std::uint64_t seed, int width, int height);

}  // namespace xnocs
