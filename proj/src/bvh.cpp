#include "xnocs/bvh.hpp"

#include <algorithm>
#include <numeric>

namespace xnocs {

namespace {
constexpr int kLeafSize = 4;

// Slab test against [tmin, inf); IEEE inf/nan semantics handle axis-parallel
// rays with the min/max ordering below.
inline bool hits_box(const Box3& box, const Vec3& origin, const Vec3& inv_dir, double tmin) {
  double lo = tmin, hi = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double t0 = (box.min[a] - origin[a]) * inv_dir[a];
    const double t1 = (box.max[a] - origin[a]) * inv_dir[a];
    lo = std::max(lo, std::min(t0, t1));
    hi = std::min(hi, std::max(t0, t1));
  }
  return lo <= hi;
}
}  // namespace

Bvh::Bvh(const Mesh& mesh) {
  const int n = static_cast<int>(mesh.triangles.size());
  tri_v0_.resize(n);
  tri_e1_.resize(n);
  tri_e2_.resize(n);
  tri_box_.resize(n);
  std::vector<Vec3> centroids(n);
  for (int i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[i];
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    tri_v0_[i] = a;
    tri_e1_[i] = b - a;
    tri_e2_[i] = c - a;
    // Bound both the source vertices and their edge-vector reconstructions
    // (they differ by an ulp; the intersection test sees the latter).
    for (const Vec3& p : {a, b, c, a + tri_e1_[i], a + tri_e2_[i]}) tri_box_[i].expand(p);
    centroids[i] = (a + b + c) / 3.0;
  }
  if (n == 0) return;
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(std::size_t(2) * n);
  nodes_.emplace_back();
  build(0, 0, n, centroids);
}

// Fills nodes_[node_index] for order_[first, first+count). Children are
// allocated as adjacent slots so the right child is always left + 1.
void Bvh::build(int node_index, int first, int count, const std::vector<Vec3>& centroids) {
  Box3 box;
  for (int i = first; i < first + count; ++i) box.expand(tri_box_[order_[i]]);
  nodes_[node_index].box = box;

  if (count <= kLeafSize) {
    nodes_[node_index].first = first;
    nodes_[node_index].count = count;
    return;
  }

  // Median split along the widest centroid axis; splitting at the midpoint
  // index keeps the tree balanced and terminates even when centroids
  // coincide (ties broken by index).
  Box3 cbox;
  for (int i = first; i < first + count; ++i) cbox.expand(centroids[order_[i]]);
  const Vec3 ext = cbox.extent();
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  const int mid = first + count / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid,
                   order_.begin() + first + count, [&](int a, int b) {
                     if (centroids[a][axis] != centroids[b][axis])
                       return centroids[a][axis] < centroids[b][axis];
                     return a < b;
                   });

  const int left = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node_index].left = left;
  nodes_[node_index].count = 0;
  build(left, first, mid - first, centroids);
  build(left + 1, mid, first + count - mid, centroids);
}

void Bvh::all_hits(const Vec3& origin, const Vec3& dir, std::vector<Hit>& out,
                   double tmin) const {
  if (nodes_.empty()) return;
  const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};

  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!hits_box(node.box, origin, inv_dir, tmin)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int t = order_[i];
        // Moller-Trumbore, both facings kept: the last intersection is
        // defined regardless of orientation.
        const Vec3 pvec = cross(dir, tri_e2_[t]);
        const double det = dot(tri_e1_[t], pvec);
        if (std::abs(det) < 1e-14) continue;
        const double inv_det = 1.0 / det;
        const Vec3 tvec = origin - tri_v0_[t];
        const double u = dot(tvec, pvec) * inv_det;
        if (u < 0.0 || u > 1.0) continue;
        const Vec3 qvec = cross(tvec, tri_e1_[t]);
        const double v = dot(dir, qvec) * inv_det;
        if (v < 0.0 || u + v > 1.0) continue;
        const double hit_t = dot(tri_e2_[t], qvec) * inv_det;
        if (hit_t > tmin) out.push_back({hit_t, t, u, v});
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.left + 1;
    }
  }
}

}  // namespace xnocs
