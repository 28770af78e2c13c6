#include "xnocs/aggregate.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_set>

#include "xnocs/error.hpp"

namespace xnocs {

PointCloud readout(const NocsMap& map, const NocsMap* color) {
  if (color && (color->width != map.width || color->height != map.height))
    throw InputError("readout: color source dimensions do not match map");

  PointCloud cloud;
  cloud.points.reserve(map.valid_count());
  if (color) cloud.colors.reserve(map.valid_count());
  for (std::size_t i = 0; i < map.pixels.size(); ++i) {
    const NocsPixel& p = map.pixels[i];
    if (!p.valid) continue;
    cloud.points.push_back(p.coord);
    if (color) cloud.colors.push_back(color->pixels[i].coord);
  }
  return cloud;
}

namespace {
// Voxel key for coordinates in [0,1]; 21 bits per axis.
std::uint64_t voxel_key(const Vec3& p, double epsilon) {
  const auto cell = [epsilon](double c) {
    return static_cast<std::uint64_t>(std::floor(c / epsilon)) & 0x1fffffULL;
  };
  return cell(p.x) | (cell(p.y) << 21) | (cell(p.z) << 42);
}
}  // namespace

PointCloud union_clouds(std::span<const PointCloud> clouds,
                        std::optional<double> dedup_epsilon) {
  bool any_colors = false;
  std::size_t total = 0;
  for (const auto& c : clouds) {
    total += c.size();
    any_colors = any_colors || c.has_colors();
  }

  PointCloud out;
  out.points.reserve(total);
  if (any_colors) out.colors.reserve(total);

  std::unordered_set<std::uint64_t> occupied;
  if (dedup_epsilon) {
    if (!(*dedup_epsilon > 0.0)) throw InputError("union: dedup epsilon must be positive");
    occupied.reserve(total);
  }

  for (const auto& c : clouds) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (dedup_epsilon && !occupied.insert(voxel_key(c.points[i], *dedup_epsilon)).second)
        continue;
      out.points.push_back(c.points[i]);
      if (any_colors) out.colors.push_back(c.has_colors() ? c.colors[i] : Rgb{});
    }
  }
  return out;
}

}  // namespace xnocs
