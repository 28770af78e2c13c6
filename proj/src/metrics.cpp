#include "xnocs/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "xnocs/error.hpp"
#include "xnocs/kdtree.hpp"
#include "xnocs/parallel.hpp"
#include "xnocs/rng.hpp"

namespace xnocs {

namespace {

constexpr std::size_t kReduceBlock = 4096;

// Mean of squared nearest-neighbor distances from each query point into the
// tree. Partial sums are per fixed-size block and combined in block order,
// so the result does not depend on the thread count.
double mean_sq_nn(const std::vector<Vec3>& queries, const KdTree& tree) {
  const std::size_t n = queries.size();
  const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> partial(nblocks, 0.0);
  parallel_for_blocks(0, n, kReduceBlock, [&](std::size_t lo, std::size_t hi) {
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += tree.nearest(queries[i]).second;
    partial[lo / kReduceBlock] = sum;
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total / static_cast<double>(n);
}

void check_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty())
    throw InputError("chamfer: distance is undefined for an empty cloud");
}

}  // namespace

ChamferResult chamfer(const PointCloud& a, const PointCloud& b) {
  check_nonempty(a, b);
  const KdTree tree_a(a.points);
  const KdTree tree_b(b.points);
  ChamferResult r;
  r.forward_term = mean_sq_nn(a.points, tree_b);
  r.backward_term = mean_sq_nn(b.points, tree_a);
  r.total_scaled = 100.0 * (r.forward_term + r.backward_term);
  return r;
}

ChamferResult chamfer_bruteforce(const PointCloud& a, const PointCloud& b) {
  check_nonempty(a, b);
  auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    const std::size_t n = from.size();
    const std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for_blocks(0, n, kReduceBlock, [&](std::size_t lo, std::size_t hi) {
      double sum = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : to) best = std::min(best, squared_norm(from[i] - q));
        sum += best;
      }
      partial[lo / kReduceBlock] = sum;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total / static_cast<double>(n);
  };
  ChamferResult r;
  r.forward_term = one_way(a.points, b.points);
  r.backward_term = one_way(b.points, a.points);
  r.total_scaled = 100.0 * (r.forward_term + r.backward_term);
  return r;
}

PointCloud sample_surface(const Mesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.vertices.empty() || mesh.triangles.empty())
    throw InputError("sample_surface: empty mesh");

  std::vector<double> cumulative(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto& t = mesh.triangles[i];
    total += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw NumericError("sample_surface: mesh has zero surface area");

  Rng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(count);
  if (mesh.has_colors()) cloud.colors.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const double pick = rng.uniform() * total;
    const std::size_t i =
        std::lower_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin();
    const auto& t = mesh.triangles[std::min(i, mesh.triangles.size() - 1)];
    double u = rng.uniform();
    double v = rng.uniform();
    if (u + v > 1.0) {  // reflect into the triangle
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const double w = 1.0 - u - v;
    cloud.points.push_back(mesh.vertices[t[0]] * w + mesh.vertices[t[1]] * u +
                           mesh.vertices[t[2]] * v);
    if (mesh.has_colors())
      cloud.colors.push_back(mesh.vertex_colors[t[0]] * w + mesh.vertex_colors[t[1]] * u +
                             mesh.vertex_colors[t[2]] * v);
  }
  return cloud;
}

}  // namespace xnocs
