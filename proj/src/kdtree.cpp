#include "meshflow/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "meshflow/errors.hpp"

namespace meshflow {

PointKdTree::PointKdTree(const std::vector<Vec3>& points) : points_(points) {
  if (points_.empty()) {
    throw Error(ErrorCategory::validation, "kd-tree requires a non-empty point set");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<int>(points_.size()));
}

int PointKdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;

  if (end - begin <= kLeafSize) {
    // Leaves scan in index order so ties resolve to the lowest index.
    std::sort(order_.begin() + begin, order_.begin() + end);
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    const Vec3& p = points_[order_[i]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }

  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     double pa = points_[a][axis];
                     double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];

  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void PointKdTree::search(int node_id, const Vec3& query, Hit& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int idx = order_[i];
      double d2 = distance2(points_[idx], query);
      if (d2 < best.distance2 || (d2 == best.distance2 && idx < best.index)) {
        best.distance2 = d2;
        best.index = idx;
      }
    }
    return;
  }

  double delta = query[node.axis] - node.split;
  int near = delta < 0.0 ? node.left : node.right;
  int far = delta < 0.0 ? node.right : node.left;
  search(near, query, best);
  // The far side may hold an equidistant lower-index point, so descend on
  // <= rather than <.
  if (delta * delta <= best.distance2) {
    search(far, query, best);
  }
}

PointKdTree::Hit PointKdTree::nearest(const Vec3& query) const {
  Hit best;
  best.index = -1;
  best.distance2 = std::numeric_limits<double>::infinity();
  search(root_, query, best);
  return best;
}

}  // namespace meshflow
