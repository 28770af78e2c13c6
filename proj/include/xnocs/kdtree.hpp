#pragma once

#include <utility>
#include <vector>

#include "xnocs/geometry.hpp"

namespace xnocs {

// Exact nearest-neighbor k-d tree with full backtracking (no approximation).
// Immutable after construction; queries are thread-safe.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  std::size_t size() const { return points_.size(); }

  // Index and squared distance of the exact nearest point.
  std::pair<int, double> nearest(const Vec3& query) const;

  // The k exact nearest points, sorted ascending by squared distance.
  // `skip` excludes one index (for self-queries). Returns (squared
  // distance, index) pairs; fewer than k when the tree is small.
  std::vector<std::pair<double, int>> knn(const Vec3& query, int k, int skip = -1) const;

 private:
  struct Node {
    int axis = 0;
    int point = -1;  // index into points_
    int left = -1;
    int right = -1;
  };

  int build(int first, int last);
  void search(int node, const Vec3& query, int& best, double& best_d2) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace xnocs
