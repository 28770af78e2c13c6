#pragma once

#include <optional>
#include <span>

#include "xnocs/types.hpp"

namespace xnocs {

// Converts a map's valid pixels to a point cloud, one point per valid pixel
// in row-major pixel order. When a color source is given (peeled-color map
// or RGB image decoded into one), each point takes the color at its pixel.
PointCloud readout(const NocsMap& map, const NocsMap* color = nullptr);

// Point-set union. Without dedup_epsilon this is plain concatenation; with
// it, voxel-grid thinning at cell size epsilon keeps the first point seen
// per occupied cell. The occupied-cell set does not depend on input order.
PointCloud union_clouds(std::span<const PointCloud> clouds,
                        std::optional<double> dedup_epsilon = std::nullopt);

}  // namespace xnocs
