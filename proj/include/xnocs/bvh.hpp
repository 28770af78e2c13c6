#pragma once

#include <vector>

#include "xnocs/types.hpp"

namespace xnocs {

// Binary AABB hierarchy over mesh triangles, leaf size <= 4. Triangles are
// partitioned (never duplicated), so every triangle sits in exactly one leaf.
// Immutable after construction and safe to share across threads.
class Bvh {
 public:
  struct Hit {
    double t = 0.0;      // ray parameter, > 0
    int triangle = -1;   // index into the source mesh triangle list
    double b1 = 0.0;     // barycentric weights of vertices 1 and 2;
    double b2 = 0.0;     // b0 = 1 - b1 - b2
  };

  explicit Bvh(const Mesh& mesh);

  // Appends every intersection with t > tmin along the ray (both facings,
  // unsorted). Directions need not be normalized.
  void all_hits(const Vec3& origin, const Vec3& dir, std::vector<Hit>& out,
                double tmin = 1e-12) const;

  std::size_t triangle_count() const { return tri_v0_.size(); }
  std::size_t node_count() const { return nodes_.size(); }

  struct Node {
    Box3 box;
    int left = -1;    // internal: index of left child (right = left + 1)
    int first = 0;    // leaf: first index into order_
    int count = 0;    // leaf: triangle count (> 0), internal: 0
  };
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& triangle_order() const { return order_; }

 private:
  void build(int node_index, int first, int count, const std::vector<Vec3>& centroids);

  std::vector<Node> nodes_;
  std::vector<int> order_;   // triangle indices grouped by leaf
  std::vector<Vec3> tri_v0_; // per source triangle: vertex 0 and edge vectors
  std::vector<Vec3> tri_e1_;
  std::vector<Vec3> tri_e2_;
  std::vector<Box3> tri_box_;
};

}  // namespace xnocs
