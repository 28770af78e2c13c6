#include "xnocs/pose.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "xnocs/error.hpp"

namespace xnocs {

namespace {

// Similarity moving the centroid to the origin and the mean norm to
// `target_norm` (sqrt(2) for pixels, sqrt(3) for 3D points).
Eigen::Matrix3d normalize_2d(const std::vector<Eigen::Vector2d>& pts, double target_norm,
                             std::vector<Eigen::Vector2d>& out) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_norm = 0.0;
  for (const auto& p : pts) mean_norm += (p - centroid).norm();
  mean_norm /= static_cast<double>(pts.size());
  const double s = mean_norm > 0.0 ? target_norm / mean_norm : 1.0;

  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = s * (pts[i] - centroid);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

Eigen::Matrix4d normalize_3d(const std::vector<Eigen::Vector3d>& pts, double target_norm,
                             std::vector<Eigen::Vector3d>& out) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_norm = 0.0;
  for (const auto& p : pts) mean_norm += (p - centroid).norm();
  mean_norm /= static_cast<double>(pts.size());
  const double s = mean_norm > 0.0 ? target_norm / mean_norm : 1.0;

  out.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = s * (pts[i] - centroid);
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() *= s;
  t.topRightCorner<3, 1>() = -s * centroid;
  return t;
}

// RQ decomposition M = K R with K upper triangular (positive diagonal after
// the sign fix below) and R orthogonal, via QR of the row-reversed
// transpose.
void rq_decompose(const Eigen::Matrix3d& m, Eigen::Matrix3d& k, Eigen::Matrix3d& r) {
  Eigen::Matrix3d e = Eigen::Matrix3d::Zero();
  e(0, 2) = e(1, 1) = e(2, 0) = 1.0;
  const Eigen::Matrix3d flipped = (e * m).transpose();
  const Eigen::HouseholderQR<Eigen::Matrix3d> qr(flipped);
  const Eigen::Matrix3d q = qr.householderQ();
  const Eigen::Matrix3d upper = qr.matrixQR().triangularView<Eigen::Upper>();
  k = e * upper.transpose() * e;
  r = e * q.transpose();
  // Push diagonal signs of K into R.
  Eigen::Vector3d signs;
  for (int i = 0; i < 3; ++i) signs[i] = k(i, i) < 0.0 ? -1.0 : 1.0;
  k = k * signs.asDiagonal();
  r = signs.asDiagonal() * r;
}

Mat3 to_mat3(const Eigen::Matrix3d& m) {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = m(i, j);
  return out;
}

}  // namespace

PoseEstimate dlt_pose(std::span<const Correspondence> correspondences) {
  const std::size_t n = correspondences.size();
  if (n < 6)
    throw InputError("dlt_pose: insufficient correspondences (" + std::to_string(n) +
                     " given, 6 required)");

  std::vector<Eigen::Vector2d> pixels(n);
  std::vector<Eigen::Vector3d> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    pixels[i] = {correspondences[i].u, correspondences[i].v};
    points[i] = {correspondences[i].nocs.x, correspondences[i].nocs.y,
                 correspondences[i].nocs.z};
  }

  // Coplanar 3D configurations leave the projection underdetermined. The
  // scatter is taken over the raw NOCS coordinates (already unit-cube
  // bounded), so the threshold also rejects point sets flattened to within
  // quantization noise, where the solve would return garbage with a small
  // algebraic residual.
  Eigen::Vector3d mean3 = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean3 += p;
  mean3 /= static_cast<double>(n);
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& p : points) scatter += (p - mean3) * (p - mean3).transpose();
  scatter /= static_cast<double>(n);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  if (eig.eigenvalues().minCoeff() <= 1e-9)
    throw NumericError("dlt_pose: degenerate configuration (3D points are coplanar)");

  std::vector<Eigen::Vector2d> npix;
  std::vector<Eigen::Vector3d> npts;
  const Eigen::Matrix3d t2 = normalize_2d(pixels, std::numbers::sqrt2, npix);
  const Eigen::Matrix4d t3 = normalize_3d(points, std::sqrt(3.0), npts);

  Eigen::MatrixXd a(2 * n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d& x = npts[i];
    const Eigen::Vector2d& p = npix[i];
    a.row(2 * i) << x.x(), x.y(), x.z(), 1, 0, 0, 0, 0, -p.x() * x.x(), -p.x() * x.y(),
        -p.x() * x.z(), -p.x();
    a.row(2 * i + 1) << 0, 0, 0, 0, x.x(), x.y(), x.z(), 1, -p.y() * x.x(), -p.y() * x.y(),
        -p.y() * x.z(), -p.y();
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd h = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> pn;
  pn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8), h(9), h(10), h(11);

  // Undo the conditioning transforms.
  Eigen::Matrix<double, 3, 4> proj = t2.inverse() * pn * t3;

  // Fix overall scale and sign: unit-norm rotational part of the last row,
  // and the 3D centroid in front of the camera.
  const double row_norm = proj.block<1, 3>(2, 0).norm();
  if (!(row_norm > 1e-12)) throw NumericError("dlt_pose: degenerate projection matrix");
  proj /= row_norm;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(n);
  if (proj.row(2).dot(centroid.homogeneous()) < 0.0) proj = -proj;

  Eigen::Matrix3d k, r;
  rq_decompose(proj.leftCols<3>(), k, r);
  if (r.determinant() < 0.0)
    throw NumericError("dlt_pose: degenerate configuration (mirrored solution)");
  k /= k(2, 2);
  const Eigen::Vector3d t = k.inverse() * proj.col(3);

  PoseEstimate est;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) est.projection[4 * i + j] = proj(i, j);
  est.intrinsics = to_mat3(k);
  est.rotation = to_mat3(r);
  est.translation = {t.x(), t.y(), t.z()};

  double sq_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 reproj = est.project({points[i].x(), points[i].y(), points[i].z()});
    const double du = reproj.x - pixels[i].x();
    const double dv = reproj.y - pixels[i].y();
    sq_err += du * du + dv * dv;
  }
  est.reprojection_rmse = std::sqrt(sq_err / static_cast<double>(n));
  return est;
}

std::vector<Correspondence> correspondences_from_map(const NocsMap& map, int stride) {
  if (stride < 1) throw InputError("correspondences_from_map: stride must be >= 1");
  std::vector<Correspondence> out;
  for (int v = 0; v < map.height; v += stride)
    for (int u = 0; u < map.width; u += stride) {
      const NocsPixel& p = map.at(u, v);
      if (p.valid) out.push_back({static_cast<double>(u), static_cast<double>(v), p.coord});
    }
  if (out.size() < 6)
    throw InputError("correspondences_from_map: fewer than 6 valid pixels at stride " +
                     std::to_string(stride));
  return out;
}

}  // namespace xnocs
