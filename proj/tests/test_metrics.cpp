#include <doctest.h>

#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/metrics.hpp"
#include "xnocs/rng.hpp"
#include "support/test_meshes.hpp"

using namespace xnocs;

namespace {
PointCloud random_cloud(Rng& rng, std::size_t n, double lo = 0.0, double hi = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i)
    c.points.push_back({rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)});
  return c;
}
}  // namespace

TEST_CASE("chamfer frozen examples") {
  SUBCASE("self distance is exactly zero") {
    Rng rng(1);
    const PointCloud s = random_cloud(rng, 500);
    const ChamferResult r = chamfer(s, s);
    CHECK(r.forward_term == 0.0);
    CHECK(r.backward_term == 0.0);
    CHECK(r.total_scaled == 0.0);
  }

  SUBCASE("two unit-separated points") {
    PointCloud a, b;
    a.points = {{0, 0, 0}};
    b.points = {{1, 0, 0}};
    const ChamferResult r = chamfer(a, b);
    CHECK(r.forward_term == 1.0);
    CHECK(r.backward_term == 1.0);
    CHECK(r.total_scaled == 200.0);
  }

  SUBCASE("empty cloud is an error") {
    PointCloud a, empty;
    a.points = {{0, 0, 0}};
    CHECK_THROWS_AS(chamfer(a, empty), InputError);
    CHECK_THROWS_AS(chamfer(empty, a), InputError);
    CHECK_THROWS_AS(chamfer_bruteforce(empty, a), InputError);
  }
}

TEST_CASE("tree-accelerated chamfer equals the brute-force oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const PointCloud a = random_cloud(rng, 1 + rng.uniform_int(500));
    const PointCloud b = random_cloud(rng, 1 + rng.uniform_int(500));
    const ChamferResult fast = chamfer(a, b);
    const ChamferResult slow = chamfer_bruteforce(a, b);
    CHECK(fast.forward_term ==
          doctest::Approx(slow.forward_term).epsilon(1e-9));
    CHECK(fast.backward_term ==
          doctest::Approx(slow.backward_term).epsilon(1e-9));
    CHECK(fast.total_scaled == doctest::Approx(slow.total_scaled).epsilon(1e-9));
  }
}

TEST_CASE("chamfer algebraic properties") {
  Rng rng(31);
  const PointCloud a = random_cloud(rng, 200);
  const PointCloud b = random_cloud(rng, 150);

  SUBCASE("swapping the clouds swaps the terms") {
    const ChamferResult ab = chamfer_bruteforce(a, b);
    const ChamferResult ba = chamfer_bruteforce(b, a);
    CHECK(ab.forward_term == ba.backward_term);
    CHECK(ab.backward_term == ba.forward_term);
    CHECK(ab.total_scaled == doctest::Approx(ba.total_scaled).epsilon(1e-15));
    CHECK(ab.total_scaled >= 0.0);
  }

  SUBCASE("translation changes the result (no alignment)") {
    PointCloud shifted = b;
    for (auto& p : shifted.points) p += {0.05, 0, 0};
    CHECK(chamfer(a, shifted).total_scaled != chamfer(a, b).total_scaled);
  }

  SUBCASE("monotone refinement: re-adding existing points changes nothing") {
    // The nearest-neighbor minima are insensitive to duplicates, so the
    // forward term never moves; the backward mean is weight-invariant when
    // every point is duplicated alike.
    PointCloud b_partial = b;
    for (int i = 0; i < 50; ++i) b_partial.points.push_back(b.points[i]);
    const ChamferResult base = chamfer(a, b);
    CHECK(chamfer(a, b_partial).forward_term ==
          doctest::Approx(base.forward_term).epsilon(1e-12));

    PointCloud b_doubled = b;
    b_doubled.points.insert(b_doubled.points.end(), b.points.begin(), b.points.end());
    const ChamferResult refined = chamfer(a, b_doubled);
    CHECK(refined.forward_term == doctest::Approx(base.forward_term).epsilon(1e-12));
    CHECK(refined.backward_term == doctest::Approx(base.backward_term).epsilon(1e-12));
  }
}

TEST_CASE("sample_surface") {
  SUBCASE("single triangle: samples satisfy barycentric constraints") {
    Mesh tri;
    tri.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    tri.triangles = {{0, 1, 2}};
    const PointCloud s = sample_surface(tri, 2000, 3);
    REQUIRE(s.size() == 2000);
    for (const auto& p : s.points) {
      CHECK(p.z == 0.0);
      CHECK(p.x >= 0.0);
      CHECK(p.y >= 0.0);
      CHECK(p.x + p.y <= 1.0 + 1e-12);
    }
  }

  SUBCASE("two equal-area triangles split samples evenly") {
    Mesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {5, 5, 5}, {6, 5, 5}, {5, 6, 5}};
    mesh.triangles = {{0, 1, 2}, {3, 4, 5}};
    const std::size_t n = 1000000;
    const PointCloud s = sample_surface(mesh, n, 9);
    std::size_t first = 0;
    for (const auto& p : s.points) first += p.x < 3.0 ? 1 : 0;
    // Binomial(n, 1/2): 3 sigma = 3 * sqrt(n)/2 = 1500.
    CHECK(std::abs(double(first) - double(n) / 2.0) <= 1500.0);
  }

  SUBCASE("zero-area triangles receive no samples") {
    Mesh mesh;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}};
    mesh.triangles = {{0, 1, 2}, {3, 4, 5}};  // second is collinear
    const PointCloud s = sample_surface(mesh, 5000, 1);
    for (const auto& p : s.points) CHECK(p.x <= 1.0);
  }

  SUBCASE("deterministic per seed") {
    const Mesh box = testing::make_box({0, 0, 0}, {1, 1, 1});
    const PointCloud s1 = sample_surface(box, 100, 77);
    const PointCloud s2 = sample_surface(box, 100, 77);
    for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1.points[i] == s2.points[i]);
    const PointCloud s3 = sample_surface(box, 100, 78);
    bool all_same = true;
    for (std::size_t i = 0; i < s1.size(); ++i)
      all_same = all_same && s1.points[i] == s3.points[i];
    CHECK(!all_same);
  }

  SUBCASE("empty mesh is an error") {
    CHECK_THROWS_AS(sample_surface(Mesh{}, 10, 0), InputError);
  }
}

TEST_CASE("colors follow surface samples") {
  Mesh box = testing::make_box({0, 0, 0}, {1, 1, 1});
  testing::paint_by_position(box);
  const PointCloud s = sample_surface(box, 500, 5);
  REQUIRE(s.has_colors());
  REQUIRE(s.colors.size() == s.points.size());
  // paint_by_position makes color equal normalized position on the unit box.
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(norm(s.colors[i] - s.points[i]) < 1e-9);
}
