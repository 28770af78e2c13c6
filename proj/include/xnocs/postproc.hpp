#pragma once

#include "xnocs/types.hpp"

namespace xnocs {

// Edge-preserving smoothing of a map's coordinates. For each valid pixel,
// a weighted mean over valid neighbors in the (2*radius+1)^2 window with
// weights exp(-d_px^2 / 2 sigma_spatial^2) * exp(-||d_coord||^2 / 2
// sigma_range^2), renormalized over valid contributors. Validity is
// unchanged. The range weight uses the full 3D coordinate distance.
NocsMap bilateral_filter(const NocsMap& map, double sigma_spatial, double sigma_range,
                         int radius);

// Removes points whose mean distance to their k nearest neighbors exceeds
// global mean + stddev_mult * global stddev. Colors follow their points.
// Requires cloud size > k_neighbors.
PointCloud statistical_outlier_removal(const PointCloud& cloud, int k_neighbors,
                                       double stddev_mult);

}  // namespace xnocs
