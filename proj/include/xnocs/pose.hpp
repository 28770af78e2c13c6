#pragma once

#include <array>
#include <span>
#include <vector>

#include "xnocs/types.hpp"

namespace xnocs {

struct Correspondence {
  double u = 0.0;
  double v = 0.0;
  NocsCoord nocs;
};

// Recovered camera, valid up to the NOCS-to-metric scale ambiguity.
struct PoseEstimate {
  std::array<double, 12> projection{};  // row-major 3x4, last-row left 3-vector unit norm
  Mat3 intrinsics;                      // upper triangular, positive diagonal, K(2,2) = 1
  Mat3 rotation;                        // orthonormal, det +1
  Vec3 translation;                     // NOCS units
  double reprojection_rmse = 0.0;       // pixels, over the input correspondences

  Vec3 project(const Vec3& p) const {
    const double* m = projection.data();
    const double w = m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11];
    return {(m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3]) / w,
            (m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7]) / w, w};
  }
};

// Direct linear transform from pixel <-> NOCS correspondences, with
// isotropic pre-normalization of both point sets. Requires >= 6
// correspondences (InputError) and a non-coplanar 3D configuration
// (NumericError naming the degeneracy).
PoseEstimate dlt_pose(std::span<const Correspondence> correspondences);

// One correspondence per valid pixel sampled every `stride` pixels, pixel
// coordinate at the pixel center. Throws InputError when fewer than 6 valid
// pixels survive the stride.
std::vector<Correspondence> correspondences_from_map(const NocsMap& map, int stride = 1);

}  // namespace xnocs
