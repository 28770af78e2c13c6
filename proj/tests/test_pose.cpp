#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "xnocs/error.hpp"
#include "xnocs/peeler.hpp"
#include "xnocs/pose.hpp"
#include "xnocs/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_meshes.hpp"

using namespace xnocs;

namespace {

// Synthetic scene: a camera on the sampling shell plus exact pixel
// projections of random NOCS points.
struct Scene {
  Camera camera;
  std::vector<Correspondence> correspondences;
};

Scene make_scene(Rng& rng, int n_points) {
  const auto cams = sample_cameras(1, 1.3, 2.3, rng.next(), 640, 480);
  Scene scene;
  scene.camera = cams[0];
  while (static_cast<int>(scene.correspondences.size()) < n_points) {
    const Vec3 p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    const Vec3 proj = scene.camera.project(p);
    if (proj.z <= 0.0) continue;
    scene.correspondences.push_back({proj.x, proj.y, p});
  }
  return scene;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const Mat3 rel = a * b.transposed();
  const double c = std::clamp((rel(0, 0) + rel(1, 1) + rel(2, 2) - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

double direction_angle(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(dot(normalized(a), normalized(b)), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

TEST_CASE("dlt recovers a synthetic camera exactly") {
  Rng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    const Scene scene = make_scene(rng, 50);
    const PoseEstimate est = dlt_pose(scene.correspondences);

    CHECK(est.reprojection_rmse <= 1e-6);
    CHECK(rotation_angle(est.rotation, scene.camera.rotation) <= 1e-6);
    CHECK(direction_angle(est.translation, scene.camera.translation) <= 1e-4);
    CHECK(est.intrinsics(0, 0) / est.intrinsics(1, 1) ==
          doctest::Approx(scene.camera.fx / scene.camera.fy).epsilon(1e-4));
    CHECK(est.intrinsics(2, 2) == doctest::Approx(1.0).epsilon(1e-12));

    // projection == intrinsics * [rotation | translation] after the
    // canonical normalization.
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c) {
        const Vec3 col = c < 3 ? est.rotation.col(c) : est.translation;
        const double expect = dot(est.intrinsics.row(r), col);
        CHECK(std::abs(est.projection[4 * r + c] - expect) <= 1e-9);
      }
  }
}

TEST_CASE("dlt degeneracies") {
  Rng rng(55);
  const Scene scene = make_scene(rng, 12);

  SUBCASE("insufficient correspondences") {
    std::vector<Correspondence> five(scene.correspondences.begin(),
                                     scene.correspondences.begin() + 5);
    CHECK_THROWS_WITH_AS(dlt_pose(five), doctest::Contains("insufficient"), InputError);
  }

  SUBCASE("coplanar points") {
    std::vector<Correspondence> flat;
    for (int i = 0; i < 20; ++i) {
      const Vec3 p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), 0.4};
      const Vec3 proj = scene.camera.project(p);
      flat.push_back({proj.x, proj.y, p});
    }
    CHECK_THROWS_WITH_AS(dlt_pose(flat), doctest::Contains("coplanar"), NumericError);
  }
}

TEST_CASE("noise robustness: median rmse within the noise floor") {
  Rng rng(77);
  std::vector<double> rmses;
  for (int seed = 0; seed < 50; ++seed) {
    Scene scene = make_scene(rng, 200);
    for (auto& c : scene.correspondences) {
      c.u += 0.5 * rng.normal();
      c.v += 0.5 * rng.normal();
    }
    rmses.push_back(dlt_pose(scene.correspondences).reprojection_rmse);
  }
  CHECK(testing::median_of(rmses) <= 1.0);
}

TEST_CASE("pre-normalization does not change the exact-data solution") {
  // Reference solve without Hartley normalization, assembled independently.
  auto unnormalized_dlt = [](const std::vector<Correspondence>& corr) {
    const std::size_t n = corr.size();
    Eigen::MatrixXd a(2 * n, 12);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = corr[i];
      a.row(2 * i) << c.nocs.x, c.nocs.y, c.nocs.z, 1, 0, 0, 0, 0, -c.u * c.nocs.x,
          -c.u * c.nocs.y, -c.u * c.nocs.z, -c.u;
      a.row(2 * i + 1) << 0, 0, 0, 0, c.nocs.x, c.nocs.y, c.nocs.z, 1, -c.v * c.nocs.x,
          -c.v * c.nocs.y, -c.v * c.nocs.z, -c.v;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    Eigen::VectorXd h = svd.matrixV().col(11);
    Eigen::Matrix<double, 3, 4> p;
    p << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8), h(9), h(10), h(11);
    p /= p.block<1, 3>(2, 0).norm();
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& c : corr) centroid += Eigen::Vector3d(c.nocs.x, c.nocs.y, c.nocs.z);
    centroid /= double(n);
    if (p.row(2).dot(centroid.homogeneous()) < 0.0) p = -p;
    return p;
  };

  Rng rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const Scene scene = make_scene(rng, 60);
    const PoseEstimate est = dlt_pose(scene.correspondences);
    const auto plain = unnormalized_dlt(scene.correspondences);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 4; ++c)
        CHECK(std::abs(est.projection[4 * r + c] - plain(r, c)) <= 1e-9);
  }
}

TEST_CASE("correspondences_from_map") {
  NocsMap map(8, 8, MapKind::Visible);

  SUBCASE("all-invalid map is an error") {
    CHECK_THROWS_AS(correspondences_from_map(map, 1), InputError);
  }

  SUBCASE("stride 1 yields one correspondence per valid pixel") {
    int k = 0;
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u)
        if ((u * 3 + v) % 2 == 0) {
          map.set(u, v, {u / 8.0, v / 8.0, 0.5});
          ++k;
        }
    const auto corr = correspondences_from_map(map, 1);
    CHECK(static_cast<int>(corr.size()) == k);
    // Pixel coordinates are at pixel centers (integer grid).
    for (const auto& c : corr) {
      CHECK(c.u == std::floor(c.u));
      CHECK(c.v == std::floor(c.v));
    }
  }

  SUBCASE("stride skips pixels") {
    for (int v = 0; v < 8; ++v)
      for (int u = 0; u < 8; ++u) map.set(u, v, {0.5, 0.5, 0.5});
    CHECK(correspondences_from_map(map, 2).size() == 16);
  }
}

TEST_CASE("end-to-end: rendered map recovers the rendering camera") {
  const Mesh sphere = testing::make_sphere({0.5, 0.5, 0.5}, 0.32, 24, 48);
  const auto cams = sample_cameras(3, 1.4, 2.2, 2024, 96, 96);
  for (const auto& cam : cams) {
    const auto maps = peel(sphere, cam, 2);
    const auto corr = correspondences_from_map(maps[0], 2);
    REQUIRE(corr.size() >= 6);
    const PoseEstimate est = dlt_pose(corr);
    CHECK(est.reprojection_rmse <= 1e-4);
    CHECK(rotation_angle(est.rotation, cam.rotation) <= 1e-4);
    CHECK(direction_angle(est.translation, cam.translation) <= 1e-4);
  }
}
