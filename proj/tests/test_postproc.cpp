#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/postproc.hpp"
#include "xnocs/rng.hpp"

using namespace xnocs;

TEST_CASE("bilateral filter fixed points") {
  SUBCASE("constant map is reproduced bit-exactly") {
    NocsMap map(9, 7, MapKind::Visible);
    const Vec3 c{0.3125, 0.587, 0.25};
    for (int v = 0; v < 7; ++v)
      for (int u = 0; u < 9; ++u)
        if ((u + v) % 3 != 0) map.set(u, v, c);

    const NocsMap out = bilateral_filter(map, 2.0, 0.05, 5);
    for (std::size_t i = 0; i < map.pixels.size(); ++i) {
      CHECK(out.pixels[i].valid == map.pixels[i].valid);
      CHECK(out.pixels[i].coord == map.pixels[i].coord);  // bit-level
    }
  }

  SUBCASE("single valid pixel is unchanged") {
    NocsMap map(5, 5, MapKind::Visible);
    map.set(2, 2, {0.123, 0.456, 0.789});
    const NocsMap out = bilateral_filter(map, 2.0, 0.05, 5);
    CHECK(out.at(2, 2).coord == Vec3{0.123, 0.456, 0.789});
    CHECK(out.valid_count() == 1);
  }
}

TEST_CASE("bilateral filter preserves a strong step edge") {
  // Two flat populations separated in coordinate by far more than
  // sigma_range: cross-population weights are ~exp(-50), so leakage stays
  // far below 5% of the step.
  const double step = 0.5;
  NocsMap map(16, 8, MapKind::Visible);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 16; ++u)
      map.set(u, v, u < 8 ? Vec3{0.2, 0.2, 0.2} : Vec3{0.2 + step, 0.2, 0.2});

  const NocsMap out = bilateral_filter(map, 2.0, 0.05, 5);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 16; ++u) {
      const double expected = u < 8 ? 0.2 : 0.7;
      CHECK(std::abs(out.at(u, v).coord.x - expected) <= 0.05 * step);
    }
}

TEST_CASE("bilateral filter smooths noise within a population") {
  Rng rng(3);
  NocsMap map(24, 24, MapKind::Visible);
  for (auto& p : map.pixels)
    p = {true, Vec3{0.5 + 0.01 * rng.normal(), 0.5, 0.5}};

  const NocsMap out = bilateral_filter(map, 2.0, 0.05, 4);
  double var_in = 0.0, var_out = 0.0;
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    var_in += (map.pixels[i].coord.x - 0.5) * (map.pixels[i].coord.x - 0.5);
    var_out += (out.pixels[i].coord.x - 0.5) * (out.pixels[i].coord.x - 0.5);
  }
  CHECK(var_out < 0.5 * var_in);

  // Output stays inside the convex hull of contributors, hence the cube.
  for (const auto& p : out.pixels) CHECK(in_unit_cube(p.coord));
}

TEST_CASE("bilateral filter validity mask and errors") {
  NocsMap map(6, 6, MapKind::Visible);
  Rng rng(5);
  for (auto& p : map.pixels)
    if (rng.uniform() < 0.5) p = {true, Vec3{rng.uniform(), rng.uniform(), rng.uniform()}};

  const NocsMap out = bilateral_filter(map, 1.5, 0.1, 3);
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    CHECK(out.pixels[i].valid == map.pixels[i].valid);
    if (!out.pixels[i].valid) CHECK(out.pixels[i].coord == Vec3{});
  }

  CHECK_THROWS_AS(bilateral_filter(map, 0.0, 0.1, 3), InputError);
  CHECK_THROWS_AS(bilateral_filter(map, 1.0, -0.1, 3), InputError);
}

namespace {
PointCloud tight_cluster(Rng& rng, std::size_t n, const Vec3& center, double radius) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 d;
    rng.sphere_direction(d.x, d.y, d.z);
    c.points.push_back(center + d * (radius * rng.uniform()));
  }
  return c;
}
}  // namespace

// Isolated point pairs with two pair separations a < b. Each point's 1-NN is
// its partner, so the mean-distance distribution takes exactly two values and
// every sample lies within one standard deviation of the mean.
PointCloud paired_cluster(std::size_t pairs, double a, double b) {
  PointCloud c;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double sep = i % 2 == 0 ? a : b;
    const Vec3 base{double(i % 8), double((i / 8) % 8), double(i / 64)};
    c.points.push_back(base);
    c.points.push_back(base + Vec3{sep, 0, 0});
  }
  return c;
}

TEST_CASE("statistical outlier removal") {
  Rng rng(7);

  SUBCASE("cluster with all points within 1 sigma passes through, idempotently") {
    const PointCloud cluster = paired_cluster(64, 0.01, 0.02);
    const PointCloud once = statistical_outlier_removal(cluster, 1, 2.0);
    CHECK(once.size() == cluster.size());
    const PointCloud twice = statistical_outlier_removal(once, 1, 2.0);
    CHECK(twice.size() == once.size());
  }

  SUBCASE("planted far outlier is removed, and only it") {
    PointCloud cloud = tight_cluster(rng, 1000, {0.5, 0.5, 0.5}, 0.05);
    cloud.colors.assign(cloud.size(), Rgb{0, 1, 0});
    cloud.points.push_back({0.5 + 5.0, 0.5, 0.5});  // 100x the cluster radius
    cloud.colors.push_back({1, 0, 0});

    const PointCloud filtered = statistical_outlier_removal(cloud, 16, 2.0);
    CHECK(filtered.size() == cloud.size() - 1);
    REQUIRE(filtered.has_colors());
    for (const auto& c : filtered.colors) CHECK(c == Rgb{0, 1, 0});
  }

  SUBCASE("retained set is permutation insensitive") {
    PointCloud cloud = tight_cluster(rng, 300, {0.4, 0.4, 0.4}, 0.08);
    cloud.points.push_back({3.0, 3.0, 3.0});
    PointCloud reversed;
    reversed.points.assign(cloud.points.rbegin(), cloud.points.rend());

    auto sorted_points = [](PointCloud c) {
      std::sort(c.points.begin(), c.points.end(), [](const Vec3& a, const Vec3& b) {
        return std::tie(a.x, a.y, a.z) < std::tie(b.x, b.y, b.z);
      });
      return c.points;
    };
    CHECK(sorted_points(statistical_outlier_removal(cloud, 12, 2.0)) ==
          sorted_points(statistical_outlier_removal(reversed, 12, 2.0)));
  }

  SUBCASE("never grows, errors on tiny clouds") {
    const PointCloud cluster = tight_cluster(rng, 50, {0.5, 0.5, 0.5}, 0.1);
    CHECK(statistical_outlier_removal(cluster, 10, 0.5).size() <= cluster.size());
    CHECK_THROWS_AS(statistical_outlier_removal(cluster, 50, 2.0), InputError);
    CHECK_THROWS_AS(statistical_outlier_removal(cluster, 0, 2.0), InputError);
  }
}
