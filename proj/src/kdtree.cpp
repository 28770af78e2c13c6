#include "xnocs/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace xnocs {

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  const int n = static_cast<int>(points_.size());
  if (n == 0) return;
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(n);
  root_ = build(0, n);
}

int KdTree::build(int first, int last) {
  if (first >= last) return -1;

  Box3 box;
  for (int i = first; i < last; ++i) box.expand(points_[order_[i]]);
  const Vec3 ext = box.extent();
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > ext[axis]) axis = 2;

  const int mid = first + (last - first) / 2;
  std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + last,
                   [&](int a, int b) {
                     if (points_[a][axis] != points_[b][axis])
                       return points_[a][axis] < points_[b][axis];
                     return a < b;
                   });

  const int node_index = static_cast<int>(nodes_.size());
  nodes_.push_back({axis, order_[mid], -1, -1});
  const int left = build(first, mid);
  const int right = build(mid + 1, last);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

void KdTree::search(int node, const Vec3& query, int& best, double& best_d2) const {
  if (node < 0) return;
  const Node& nd = nodes_[node];
  const Vec3& p = points_[nd.point];
  const double d2 = squared_norm(query - p);
  if (d2 < best_d2) {
    best_d2 = d2;
    best = nd.point;
  }
  const double delta = query[nd.axis] - p[nd.axis];
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, query, best, best_d2);
  if (delta * delta < best_d2) search(far, query, best, best_d2);
}

std::pair<int, double> KdTree::nearest(const Vec3& query) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  search(root_, query, best, best_d2);
  return {best, best_d2};
}

std::vector<std::pair<double, int>> KdTree::knn(const Vec3& query, int k, int skip) const {
  std::priority_queue<std::pair<double, int>> heap;  // max-heap on distance

  // Recursive search with a bounded heap; worst radius shrinks as it fills.
  auto visit = [&](auto&& self, int node) -> void {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    const Vec3& p = points_[nd.point];
    if (nd.point != skip) {
      const double d2 = squared_norm(query - p);
      if (static_cast<int>(heap.size()) < k)
        heap.push({d2, nd.point});
      else if (d2 < heap.top().first) {
        heap.pop();
        heap.push({d2, nd.point});
      }
    }
    const double delta = query[nd.axis] - p[nd.axis];
    const int near = delta < 0.0 ? nd.left : nd.right;
    const int far = delta < 0.0 ? nd.right : nd.left;
    self(self, near);
    if (static_cast<int>(heap.size()) < k || delta * delta < heap.top().first) self(self, far);
  };
  visit(visit, root_);

  std::vector<std::pair<double, int>> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top();
    heap.pop();
  }
  return out;
}

}  // namespace xnocs
