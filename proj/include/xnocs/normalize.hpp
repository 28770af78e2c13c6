#pragma once

#include <filesystem>
#include <utility>

#include "xnocs/types.hpp"

namespace xnocs {

// Similarity taking model units into NOCS: q = (p + translation) * scale + 0.5.
struct NormalizationRecord {
  Vec3 translation;   // model units (minus the bbox center)
  double scale = 1.0; // 1 / bbox diagonal

  Vec3 apply(const Vec3& p) const {
    return (p + translation) * scale + Vec3{0.5, 0.5, 0.5};
  }
  Vec3 invert(const Vec3& q) const {
    return (q - Vec3{0.5, 0.5, 0.5}) / scale - translation;
  }
};

// Rescales a mesh so its axis-aligned bounding box has unit diagonal and is
// centered at (0.5, 0.5, 0.5); all vertices land in [0,1]^3. Throws
// InputError on an empty mesh, NumericError on zero bbox diagonal.
std::pair<Mesh, NormalizationRecord> normalize_mesh(const Mesh& mesh);

// Exact inverse of the normalization map, applied to every point.
PointCloud denormalize_points(const PointCloud& cloud, const NormalizationRecord& record);

void save_record(const std::filesystem::path& path, const NormalizationRecord& record);
NormalizationRecord load_record(const std::filesystem::path& path);

}  // namespace xnocs
