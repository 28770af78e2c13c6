#include <doctest.h>

#include <cstdlib>

#include "xnocs/error.hpp"
#include "xnocs/peeler.hpp"
#include "xnocs/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_meshes.hpp"

using namespace xnocs;

namespace {
Camera center_camera(int size = 33, double distance = 2.0) {
  // Odd size puts the principal point on an exact pixel, so the center ray
  // passes exactly through (0.5, 0.5, 0.5).
  return Camera::look_at({0.5, 0.5, 0.5 + distance}, {0.5, 0.5, 0.5}, {0, 1, 0}, size, size);
}
}  // namespace

TEST_CASE("box peel: first and last hits at the box faces") {
  const Mesh box = testing::make_box({0.3, 0.3, 0.3}, {0.7, 0.7, 0.7});
  const Camera cam = center_camera();
  const auto maps = peel(box, cam, 2);
  REQUIRE(maps.size() == 2);
  CHECK(maps[0].kind == MapKind::Visible);
  CHECK(maps[1].kind == MapKind::Occluded);

  const int c = 16;  // principal point pixel
  REQUIRE(maps[0].at(c, c).valid);
  REQUIRE(maps[1].at(c, c).valid);
  CHECK(maps[0].at(c, c).coord.z == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(maps[1].at(c, c).coord.z == doctest::Approx(0.3).epsilon(1e-9));

  // A ray that misses leaves both maps invalid.
  CHECK(!maps[0].at(0, 0).valid);
  CHECK(!maps[1].at(0, 0).valid);

  // First-hit is depth ordered before last-hit everywhere.
  const Vec3 eye = cam.center();
  for (int v = 0; v < 33; ++v)
    for (int u = 0; u < 33; ++u) {
      CHECK(maps[0].at(u, v).valid == maps[1].at(u, v).valid);
      if (maps[0].at(u, v).valid)
        CHECK(norm(maps[0].at(u, v).coord - eye) <= norm(maps[1].at(u, v).coord - eye) + 1e-12);
    }
}

TEST_CASE("sphere peel matches the analytic chord") {
  // Fine tessellation keeps the chordal gap below 2e-3.
  const Mesh sphere = testing::make_sphere({0.5, 0.5, 0.5}, 0.3, 64, 128);
  const Camera cam = center_camera();
  const auto maps = peel(sphere, cam, 2);

  Vec3 origin, dir;
  cam.pixel_ray(16, 16, origin, dir);
  const auto expected = testing::sphere_hits({0.5, 0.5, 0.5}, 0.3, origin, dir);
  REQUIRE(expected.size() == 2);

  REQUIRE(maps[0].at(16, 16).valid);
  const double t_first = norm(maps[0].at(16, 16).coord - origin);
  const double t_last = norm(maps[1].at(16, 16).coord - origin);
  CHECK(t_first == doctest::Approx(expected[0]).epsilon(2e-3));
  CHECK(t_last == doctest::Approx(expected[1]).epsilon(2e-3));
  CHECK(t_first < t_last);
}

TEST_CASE("cast_all basics") {
  SUBCASE("empty mesh yields empty hit lists") {
    Mesh empty;
    const auto lists = cast_all(empty, center_camera(9));
    REQUIRE(lists.size() == 81);
    for (const auto& l : lists) CHECK(l.hits.empty());
  }

  SUBCASE("single triangle: barycentrics sum to one") {
    Mesh tri;
    tri.vertices = {{0.2, 0.3, 0.5}, {0.8, 0.3, 0.5}, {0.5, 0.9, 0.5}};
    tri.triangles = {{0, 1, 2}};
    const auto lists = cast_all(tri, center_camera());
    bool any = false;
    for (const auto& l : lists)
      for (const auto& h : l.hits) {
        any = true;
        CHECK(h.barycentric.x + h.barycentric.y + h.barycentric.z ==
              doctest::Approx(1.0).epsilon(1e-9));
        CHECK(in_unit_cube(h.point));
      }
    CHECK(any);
  }
}

TEST_CASE("bvh equals brute force on random soups") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    Rng mesh_rng(rng.next());
    const Mesh mesh = testing::make_soup(mesh_rng, 1 + int(rng.uniform_int(50)));
    if (mesh.triangles.empty()) continue;
    const auto cams = sample_cameras(2, 1.3, 2.2, rng.next(), 24, 24);
    for (const auto& cam : cams) {
      const auto lists = cast_all(mesh, cam);
      for (const auto& list : lists) {
        Vec3 origin, dir;
        cam.pixel_ray(list.u, list.v, origin, dir);
        const auto expected = testing::brute_force_hits(mesh, origin, dir);
        REQUIRE(list.hits.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i) {
          CHECK(list.hits[i].t == doctest::Approx(expected[i].t).epsilon(1e-9));
          CHECK(norm(list.hits[i].point - clamp_unit(expected[i].point)) <= 1e-6);
          CHECK(in_unit_cube(list.hits[i].point));
          // Strictly ascending after the 1e-9 dedup.
          if (i > 0) CHECK(list.hits[i].t - list.hits[i - 1].t >= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("bvh structure: partition into covered leaves") {
  Rng rng(33);
  const Mesh mesh = testing::make_soup(rng, 200);
  const Bvh bvh(mesh);

  // Every triangle appears in exactly one leaf.
  std::vector<int> seen(mesh.triangles.size(), 0);
  for (const auto& node : bvh.nodes()) {
    if (node.count == 0) continue;
    for (int i = node.first; i < node.first + node.count; ++i)
      seen[bvh.triangle_order()[i]] += 1;
    CHECK(node.count <= 4);
  }
  for (int s : seen) CHECK(s == 1);

  // Internal boxes contain their children (so, inductively, all
  // descendant triangles).
  for (const auto& node : bvh.nodes()) {
    if (node.count > 0) continue;
    for (int child : {node.left, node.left + 1}) {
      const Box3& cb = bvh.nodes()[child].box;
      CHECK(cb.min.x >= node.box.min.x - 1e-15);
      CHECK(cb.min.y >= node.box.min.y - 1e-15);
      CHECK(cb.min.z >= node.box.min.z - 1e-15);
      CHECK(cb.max.x <= node.box.max.x + 1e-15);
      CHECK(cb.max.y <= node.box.max.y + 1e-15);
      CHECK(cb.max.z <= node.box.max.z + 1e-15);
    }
  }

  // Node boxes contain their triangles.
  for (const auto& node : bvh.nodes()) {
    if (node.count == 0) continue;
    for (int i = node.first; i < node.first + node.count; ++i) {
      const auto& tri = mesh.triangles[bvh.triangle_order()[i]];
      for (int k : tri) {
        const Vec3& v = mesh.vertices[k];
        CHECK(v.x >= node.box.min.x);
        CHECK(v.y >= node.box.min.y);
        CHECK(v.z >= node.box.min.z);
        CHECK(v.x <= node.box.max.x);
        CHECK(v.y <= node.box.max.y);
        CHECK(v.z <= node.box.max.z);
      }
    }
  }
}

TEST_CASE("watertight meshes have even hit counts almost everywhere") {
  Rng rng(5);
  std::size_t odd = 0, total = 0;
  for (const Mesh& mesh :
       {testing::make_sphere({0.5, 0.5, 0.5}, 0.35),
        testing::make_box({0.25, 0.3, 0.35}, {0.75, 0.7, 0.65}),
        testing::make_torus({0.5, 0.5, 0.5}, 0.3, 0.12)}) {
    const auto cams = sample_cameras(3, 1.4, 2.0, rng.next(), 48, 48);
    for (const auto& cam : cams) {
      for (const auto& list : cast_all(mesh, cam)) {
        if (list.hits.empty()) continue;
        ++total;
        odd += list.hits.size() % 2;
      }
    }
  }
  REQUIRE(total > 1000);
  CHECK(double(odd) / double(total) <= 0.001);
}

TEST_CASE("multi-layer peel returns front-to-back intersections") {
  const Mesh torus = testing::make_torus({0.5, 0.5, 0.5}, 0.3, 0.1);
  const Camera cam = center_camera(25);
  const auto maps = peel(torus, cam, 4);
  REQUIRE(maps.size() == 4);

  const auto lists = cast_all(torus, cam);
  for (const auto& list : lists) {
    for (int j = 0; j < 4; ++j) {
      const bool expect_valid = static_cast<int>(list.hits.size()) > j;
      CHECK(maps[j].at(list.u, list.v).valid == expect_valid);
      if (expect_valid)
        CHECK(norm(maps[j].at(list.u, list.v).coord - list.hits[j].point) < 1e-12);
    }
  }
  // Through the tube axis the ray crosses four surfaces.
  bool saw_four = false;
  for (const auto& list : lists) saw_four = saw_four || list.hits.size() >= 4;
  CHECK(saw_four);
}

TEST_CASE("peel rejects bad inputs") {
  const Mesh unnormalized = testing::make_box({-0.5, 0, 0}, {0.5, 1, 1});
  CHECK_THROWS_AS(peel(unnormalized, center_camera(), 2), InputError);

  const Mesh box = testing::make_box({0.3, 0.3, 0.3}, {0.7, 0.7, 0.7});
  CHECK_THROWS_AS(peel(box, center_camera(), 1), InputError);
  CHECK_THROWS_AS(peel_color(box, center_camera()), InputError);  // no colors
}

TEST_CASE("peel_color interpolates vertex colors at the last hit") {
  SUBCASE("uniformly red mesh") {
    Mesh box = testing::make_box({0.3, 0.3, 0.3}, {0.7, 0.7, 0.7});
    box.vertex_colors.assign(box.vertices.size(), Rgb{1, 0, 0});
    const Camera cam = center_camera();
    const NocsMap color = peel_color(box, cam);
    CHECK(color.kind == MapKind::PeeledColor);
    const auto last = peel(box, cam, 2)[1];
    std::size_t valid = 0;
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) {
        CHECK(color.at(u, v).valid == last.at(u, v).valid);
        if (color.at(u, v).valid) {
          ++valid;
          CHECK(norm(color.at(u, v).coord - Vec3{1, 0, 0}) < 1e-12);
        }
      }
    CHECK(valid > 0);
  }

  SUBCASE("centroid hit blends the three corners equally") {
    Mesh tri;
    tri.vertices = {{0.2, 0.3, 0.5}, {0.8, 0.3, 0.5}, {0.5, 0.9, 0.5}};
    tri.triangles = {{0, 1, 2}};
    tri.vertex_colors = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    // Centroid is exactly (0.5, 0.5, 0.5), on the center ray.
    const NocsMap color = peel_color(tri, center_camera());
    REQUIRE(color.at(16, 16).valid);
    CHECK(norm(color.at(16, 16).coord - Vec3{1.0 / 3, 1.0 / 3, 1.0 / 3}) < 1e-9);
  }
}

TEST_CASE("sample_cameras: shell placement, determinism, look-at") {
  const auto cams = sample_cameras(20, 1.2, 2.5, 42, 64, 64);
  REQUIRE(cams.size() == 20);
  for (const auto& cam : cams) {
    cam.validate();
    const double r = norm(cam.center() - Vec3{0.5, 0.5, 0.5});
    CHECK(r >= 1.2);
    CHECK(r <= 2.5);
    // Rotation maps the view direction onto +z.
    const Vec3 fwd = cam.rotation * normalized(Vec3{0.5, 0.5, 0.5} - cam.center());
    CHECK(norm(fwd - Vec3{0, 0, 1}) <= 1e-9);
  }

  const auto again = sample_cameras(20, 1.2, 2.5, 42, 64, 64);
  for (std::size_t i = 0; i < cams.size(); ++i) {
    CHECK(cams[i].rotation.m == again[i].rotation.m);
    CHECK(cams[i].translation == again[i].translation);
  }

  CHECK_THROWS_AS(sample_cameras(5, 0.0, 1.0, 1, 32, 32), InputError);
  CHECK_THROWS_AS(sample_cameras(5, 2.0, 1.0, 1, 32, 32), InputError);
}

TEST_CASE("rendering is schedule independent") {
  const Mesh sphere = testing::make_sphere({0.5, 0.5, 0.5}, 0.3);
  const Camera cam = center_camera(40);

  setenv("XNOCS_THREADS", "1", 1);
  const auto serial = peel(sphere, cam, 2);
  unsetenv("XNOCS_THREADS");
  const auto parallel = peel(sphere, cam, 2);

  for (int m = 0; m < 2; ++m)
    for (std::size_t i = 0; i < serial[m].pixels.size(); ++i) {
      CHECK(serial[m].pixels[i].valid == parallel[m].pixels[i].valid);
      CHECK(serial[m].pixels[i].coord == parallel[m].pixels[i].coord);
    }
}
