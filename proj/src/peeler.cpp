#include "xnocs/peeler.hpp"

#include <algorithm>
#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/parallel.hpp"
#include "xnocs/rng.hpp"

namespace xnocs {

namespace {

constexpr double kMergeTolerance = 1e-9;

void check_normalized(const Mesh& mesh) {
  for (const auto& v : mesh.vertices)
    if (!in_unit_cube(v, 1e-9))
      throw InputError("peel: mesh is not normalized (vertex outside [0,1]^3)");
}

RayHit to_ray_hit(const Bvh::Hit& h, const Mesh& mesh, const Vec3& origin, const Vec3& dir) {
  RayHit out;
  out.t = h.t;
  out.triangle = h.triangle;
  out.barycentric = {1.0 - h.b1 - h.b2, h.b1, h.b2};
  out.point = clamp_unit(origin + dir * h.t);
  if (mesh.has_colors()) {
    const auto& tri = mesh.triangles[h.triangle];
    out.color = mesh.vertex_colors[tri[0]] * out.barycentric.x +
                mesh.vertex_colors[tri[1]] * out.barycentric.y +
                mesh.vertex_colors[tri[2]] * out.barycentric.z;
  }
  return out;
}

}  // namespace

std::vector<RayHitList> cast_all(const Mesh& mesh, const Bvh& bvh, const Camera& camera) {
  camera.validate();
  const int w = camera.width, h = camera.height;
  std::vector<RayHitList> lists(std::size_t(w) * h);

  parallel_for_blocks(0, std::size_t(w) * h, 256, [&](std::size_t lo, std::size_t hi) {
    std::vector<Bvh::Hit> raw;
    for (std::size_t i = lo; i < hi; ++i) {
      const int u = static_cast<int>(i % w);
      const int v = static_cast<int>(i / w);
      Vec3 origin, dir;
      camera.pixel_ray(u, v, origin, dir);

      raw.clear();
      bvh.all_hits(origin, dir, raw);
      std::sort(raw.begin(), raw.end(), [](const Bvh::Hit& a, const Bvh::Hit& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.triangle < b.triangle;
      });

      RayHitList& list = lists[i];
      list.u = u;
      list.v = v;
      list.hits.reserve(raw.size());
      for (const auto& hit : raw) {
        if (!list.hits.empty() && hit.t - list.hits.back().t < kMergeTolerance) continue;
        list.hits.push_back(to_ray_hit(hit, mesh, origin, dir));
      }
    }
  });
  return lists;
}

std::vector<RayHitList> cast_all(const Mesh& mesh, const Camera& camera) {
  return cast_all(mesh, Bvh(mesh), camera);
}

std::vector<NocsMap> peel(const Mesh& mesh, const Camera& camera, int layers) {
  if (layers < 2) throw InputError("peel: layers must be >= 2");
  check_normalized(mesh);
  const auto lists = cast_all(mesh, camera);

  std::vector<NocsMap> maps;
  maps.reserve(layers);
  if (layers == 2) {
    maps.emplace_back(camera.width, camera.height, MapKind::Visible);
    maps.emplace_back(camera.width, camera.height, MapKind::Occluded);
    for (const auto& list : lists) {
      if (list.hits.empty()) continue;
      maps[0].set(list.u, list.v, list.hits.front().point);
      maps[1].set(list.u, list.v, list.hits.back().point);
    }
  } else {
    for (int j = 0; j < layers; ++j)
      maps.emplace_back(camera.width, camera.height, MapKind::Visible);
    for (const auto& list : lists)
      for (int j = 0; j < layers && j < static_cast<int>(list.hits.size()); ++j)
        maps[j].set(list.u, list.v, list.hits[j].point);
  }
  return maps;
}

NocsMap peel_color(const Mesh& mesh, const Camera& camera) {
  if (!mesh.has_colors()) throw InputError("peel_color: mesh has no vertex colors");
  check_normalized(mesh);
  const auto lists = cast_all(mesh, camera);
  NocsMap map(camera.width, camera.height, MapKind::PeeledColor);
  for (const auto& list : lists)
    if (!list.hits.empty()) map.set(list.u, list.v, *list.hits.back().color);
  return map;
}

ViewRender render_view(const Mesh& mesh, const Bvh& bvh, const Camera& camera) {
  check_normalized(mesh);
  const auto lists = cast_all(mesh, bvh, camera);

  ViewRender out;
  out.visible = NocsMap(camera.width, camera.height, MapKind::Visible);
  out.occluded = NocsMap(camera.width, camera.height, MapKind::Occluded);
  if (mesh.has_colors()) {
    out.peeled_color = NocsMap(camera.width, camera.height, MapKind::PeeledColor);
    out.visible_color = NocsMap(camera.width, camera.height, MapKind::PeeledColor);
  }
  for (const auto& list : lists) {
    if (list.hits.empty()) continue;
    out.visible.set(list.u, list.v, list.hits.front().point);
    out.occluded.set(list.u, list.v, list.hits.back().point);
    if (mesh.has_colors()) {
      out.peeled_color->set(list.u, list.v, *list.hits.back().color);
      out.visible_color->set(list.u, list.v, *list.hits.front().color);
    }
  }
  return out;
}

std::vector<Camera> sample_cameras(int count, double radius_min, double radius_max,
                                   std::uint64_t seed, int width, int height) {
  if (!(radius_min > 0.0) || radius_min > radius_max)
    throw InputError("sample_cameras: need 0 < radius_min <= radius_max");
  const Vec3 target{0.5, 0.5, 0.5};
  Rng rng(seed);
  std::vector<Camera> cameras;
  cameras.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec3 dir;
    rng.sphere_direction(dir.x, dir.y, dir.z);
    const double radius = rng.uniform(radius_min, radius_max);
    const Vec3 eye = target + dir * radius;
    cameras.push_back(Camera::look_at(eye, target, {0.0, 1.0, 0.0}, width, height));
  }
  return cameras;
}

}  // namespace xnocs
