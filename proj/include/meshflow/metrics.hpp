#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshflow/mesh.hpp"

namespace meshflow {

struct SurfaceComparison {
  double cd = 0.0;    // vertex-to-vertex Chamfer, mm^2
  double assd = 0.0;  // mean symmetric point-to-surface distance, mm
  double hd90 = 0.0;  // nearest-rank 90th percentile of pooled distances, mm
  double nc = 0.0;    // mean normal cosine over nearest-vertex pairs
  VertexField per_vertex_error;  // truth -> prediction, bound to the truth mesh
};

struct SelfIntersectionReport {
  std::int64_t intersecting_face_count = 0;
  std::int64_t total_faces = 0;
  double fraction = 0.0;
  std::vector<std::array<int, 2>> offending_pairs;  // capped
};

SurfaceComparison compare_surfaces(const TriangleMesh& prediction, const TriangleMesh& truth);

// Faces properly intersecting a non-adjacent face (sharing no vertex).
// Candidates come from an AABB hierarchy; the intersection predicate itself
// is exact up to the 1e-10 mm touching tolerance.
SelfIntersectionReport self_intersection_fraction(const TriangleMesh& mesh,
                                                  int max_reported_pairs = 100);

// Distance from each truth vertex to the nearest point on the prediction
// surface (point-to-triangle).
VertexField error_map(const TriangleMesh& prediction, const TriangleMesh& truth);

// --- building blocks, exposed for verification ---

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Proper (non-touching) triangle-triangle intersection; contacts within
// `tolerance` mm do not count. Handles the coplanar case by 2D overlap.
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2,
                         double tolerance = 1e-10);

// AABB hierarchy over mesh faces for nearest-triangle and box-overlap queries.
class TriangleBvh {
 public:
  explicit TriangleBvh(const TriangleMesh& mesh);

  struct Hit {
    int face = -1;
    double distance = 0.0;
    Vec3 closest{};
  };

  Hit nearest(const Vec3& query) const;

  // Faces whose AABB overlaps the AABB of `face` (excluding `face` itself),
  // inflated by `margin`.
  std::vector<int> overlapping_faces(int face, double margin) const;

 private:
  struct Box {
    Vec3 lo{}, hi{};
  };
  struct Node {
    Box box;
    int left = -1, right = -1;
    int begin = 0, end = 0;
  };

  int build(int begin, int end);
  void search_nearest(int node, const Vec3& query, Hit& best) const;
  void search_overlap(int node, const Box& box, int skip_face, std::vector<int>& out) const;
  static double box_distance2(const Box& box, const Vec3& p);
  static bool boxes_overlap(const Box& a, const Box& b);

  const TriangleMesh& mesh_;
  std::vector<int> order_;
  std::vector<Box> face_boxes_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 4;
};

}  // namespace meshflow
