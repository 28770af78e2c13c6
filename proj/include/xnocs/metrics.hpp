#pragma once

#include <cstdint>

#include "xnocs/types.hpp"

namespace xnocs {

// Two-way Chamfer distance. forward_term averages squared nearest-neighbor
// distances from a into b, backward_term the reverse; total_scaled is their
// sum multiplied by 100 (the reporting convention).
struct ChamferResult {
  double forward_term = 0.0;
  double backward_term = 0.0;
  double total_scaled = 0.0;
};

// Exact nearest neighbors via k-d tree with full backtracking. Throws
// InputError when either cloud is empty (the distance is undefined).
ChamferResult chamfer(const PointCloud& a, const PointCloud& b);

// O(|a|*|b|) exhaustive oracle; same contract as chamfer.
ChamferResult chamfer_bruteforce(const PointCloud& a, const PointCloud& b);

// Area-weighted uniform surface sampling, deterministic per seed.
// Zero-area triangles receive no samples.
PointCloud sample_surface(const Mesh& mesh, std::size_t count, std::uint64_t seed = 0);

}  // namespace xnocs
