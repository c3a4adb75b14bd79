#pragma once

#include <vector>

#include "meshflow/vec3.hpp"

namespace meshflow {

// Static kd-tree over a point set for exact nearest-neighbor queries.
// Equidistant candidates resolve to the lowest point index, so results are
// identical to a lowest-index-first linear scan.
class PointKdTree {
 public:
  struct Hit {
    int index = -1;
    double distance2 = 0.0;
  };

  explicit PointKdTree(const std::vector<Vec3>& points);

  Hit nearest(const Vec3& query) const;

  int size() const { return static_cast<int>(points_.size()); }

 private:
  struct Node {
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf payload range in order_
    int end = 0;
    int axis = 0;
    double split = 0.0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& query, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 8;
};

}  // namespace meshflow
