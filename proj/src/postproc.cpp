#include "xnocs/postproc.hpp"

#include <algorithm>
#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/kdtree.hpp"
#include "xnocs/parallel.hpp"

namespace xnocs {

NocsMap bilateral_filter(const NocsMap& map, double sigma_spatial, double sigma_range,
                         int radius) {
  if (!(sigma_spatial > 0.0) || !(sigma_range > 0.0))
    throw InputError("bilateral_filter: sigmas must be positive");
  if (radius < 0) throw InputError("bilateral_filter: radius must be >= 0");

  const double inv_2ss = 1.0 / (2.0 * sigma_spatial * sigma_spatial);
  const double inv_2sr = 1.0 / (2.0 * sigma_range * sigma_range);
  NocsMap out(map.width, map.height, map.kind);

  parallel_for(0, map.pixels.size(), [&](std::size_t i) {
    const int u = static_cast<int>(i % map.width);
    const int v = static_cast<int>(i / map.width);
    const NocsPixel& center = map.pixels[i];
    if (!center.valid) return;  // stays invalid with coord (0,0,0)

    // Accumulate offsets from the center coordinate so that a constant
    // neighborhood is reproduced bit-exactly (the offsets are all zero).
    Vec3 acc;
    double weight_sum = 0.0;
    const int u0 = std::max(0, u - radius), u1 = std::min(map.width - 1, u + radius);
    const int v0 = std::max(0, v - radius), v1 = std::min(map.height - 1, v + radius);
    for (int nv = v0; nv <= v1; ++nv)
      for (int nu = u0; nu <= u1; ++nu) {
        const NocsPixel& nb = map.at(nu, nv);
        if (!nb.valid) continue;
        const Vec3 offset = nb.coord - center.coord;
        const double d_px2 = double(nu - u) * (nu - u) + double(nv - v) * (nv - v);
        const double w = std::exp(-d_px2 * inv_2ss) * std::exp(-squared_norm(offset) * inv_2sr);
        acc += offset * w;
        weight_sum += w;
      }
    out.pixels[i] = {true, clamp_unit(center.coord + acc / weight_sum)};
  });
  return out;
}

PointCloud statistical_outlier_removal(const PointCloud& cloud, int k_neighbors,
                                       double stddev_mult) {
  if (k_neighbors < 1) throw InputError("statistical_outlier_removal: k must be >= 1");
  const std::size_t n = cloud.size();
  if (n <= static_cast<std::size_t>(k_neighbors))
    throw InputError("statistical_outlier_removal: cloud smaller than k_neighbors");

  const KdTree tree(cloud.points);
  std::vector<double> mean_dist(n);
  parallel_for(0, n, [&](std::size_t i) {
    const auto nbrs = tree.knn(cloud.points[i], k_neighbors, static_cast<int>(i));
    double sum = 0.0;
    for (const auto& [d2, idx] : nbrs) sum += std::sqrt(d2);
    mean_dist[i] = sum / static_cast<double>(nbrs.size());
  });

  double mean = 0.0;
  for (double d : mean_dist) mean += d;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double d : mean_dist) var += (d - mean) * (d - mean);
  var /= static_cast<double>(n);
  const double threshold = mean + stddev_mult * std::sqrt(var);

  PointCloud out;
  out.points.reserve(n);
  if (cloud.has_colors()) out.colors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (mean_dist[i] > threshold) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.has_colors()) out.colors.push_back(cloud.colors[i]);
  }
  return out;
}

}  // namespace xnocs
