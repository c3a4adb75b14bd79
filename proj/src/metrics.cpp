#include "meshflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "meshflow/errors.hpp"
#include "meshflow/kdtree.hpp"
#include "meshflow/objective.hpp"

namespace meshflow {

namespace {

void validate_comparison_input(const TriangleMesh& mesh, const char* name) {
  if (mesh.vertices.empty() || mesh.faces.empty()) {
    throw Error(ErrorCategory::validation, std::string(name) + " mesh is empty");
  }
  validate_mesh(mesh);
}

// Nearest-rank percentile of a value list (p in (0, 100]).
double nearest_rank_percentile(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

struct PlanarBasis {
  Vec3 u, v;
};

PlanarBasis planar_basis(const Vec3& normal) {
  Vec3 axis = std::abs(normal.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 u = normalized(cross(normal, axis));
  return {u, cross(normal, u)};
}

struct Point2 {
  double x, y;
};

// Signed distance of point p from the line through a->b (positive left).
double line_distance(const Point2& a, const Point2& b, const Point2& p) {
  double ex = b.x - a.x, ey = b.y - a.y;
  double len = std::sqrt(ex * ex + ey * ey);
  if (len < 1e-300) return 0.0;
  return ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / len;
}

bool point_strictly_inside(const std::array<Point2, 3>& tri, const Point2& p, double tol) {
  double d0 = line_distance(tri[0], tri[1], p);
  double d1 = line_distance(tri[1], tri[2], p);
  double d2 = line_distance(tri[2], tri[0], p);
  return (d0 > tol && d1 > tol && d2 > tol) || (d0 < -tol && d1 < -tol && d2 < -tol);
}

bool segments_properly_cross(const Point2& p, const Point2& q, const Point2& r, const Point2& s,
                             double tol) {
  double d1 = line_distance(r, s, p);
  double d2 = line_distance(r, s, q);
  double d3 = line_distance(p, q, r);
  double d4 = line_distance(p, q, s);
  bool straddle1 = (d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol);
  bool straddle2 = (d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol);
  return straddle1 && straddle2;
}

bool coplanar_triangles_overlap(const Vec3 a[3], const Vec3 b[3], const Vec3& normal,
                                double tol) {
  PlanarBasis basis = planar_basis(normal);
  std::array<Point2, 3> ta, tb;
  for (int i = 0; i < 3; ++i) {
    ta[i] = {dot(a[i], basis.u), dot(a[i], basis.v)};
    tb[i] = {dot(b[i], basis.u), dot(b[i], basis.v)};
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (segments_properly_cross(ta[i], ta[(i + 1) % 3], tb[j], tb[(j + 1) % 3], tol)) {
        return true;
      }
    }
  }
  for (int i = 0; i < 3; ++i) {
    if (point_strictly_inside(tb, ta[i], tol)) return true;
    if (point_strictly_inside(ta, tb[i], tol)) return true;
  }
  // Containment where every vertex sits on the other boundary (e.g. identical
  // triangles) is still an area overlap; centroids expose it.
  Point2 ca{(ta[0].x + ta[1].x + ta[2].x) / 3.0, (ta[0].y + ta[1].y + ta[2].y) / 3.0};
  Point2 cb{(tb[0].x + tb[1].x + tb[2].x) / 3.0, (tb[0].y + tb[1].y + tb[2].y) / 3.0};
  return point_strictly_inside(tb, ca, tol) || point_strictly_inside(ta, cb, tol);
}

// Intersection segment of a triangle with a plane, as parameters along the
// unit direction d. Returns false when the cut is a point or empty.
bool plane_cut_interval(const Vec3 tri[3], const double dist[3], const Vec3& d, double tol,
                        double& tmin, double& tmax) {
  Vec3 points[6];
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(dist[i]) <= tol) {
      points[count++] = tri[i];
    }
  }
  for (int i = 0; i < 3; ++i) {
    int j = (i + 1) % 3;
    if ((dist[i] > tol && dist[j] < -tol) || (dist[i] < -tol && dist[j] > tol)) {
      double s = dist[i] / (dist[i] - dist[j]);
      points[count++] = tri[i] + s * (tri[j] - tri[i]);
    }
  }
  if (count < 2) return false;
  tmin = std::numeric_limits<double>::infinity();
  tmax = -tmin;
  for (int i = 0; i < count; ++i) {
    double t = dot(points[i], d);
    tmin = std::min(tmin, t);
    tmax = std::max(tmax, t);
  }
  return true;
}

}  // namespace

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  // Ericson, Real-Time Collision Detection, 5.1.5.
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = dot(ab, ap);
  double d2 = dot(ac, ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  Vec3 bp = p - b;
  double d3 = dot(ab, bp);
  double d4 = dot(ac, bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    double v = d1 / (d1 - d3);
    return a + v * ab;
  }

  Vec3 cp = p - c;
  double d5 = dot(ab, cp);
  double d6 = dot(ac, cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    double w = d2 / (d2 - d6);
    return a + w * ac;
  }

  double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return b + w * (c - b);
  }

  double denom = 1.0 / (va + vb + vc);
  double v = vb * denom;
  double w = vc * denom;
  return a + v * ab + w * ac;
}

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2, double tolerance) {
  const Vec3 a[3] = {a0, a1, a2};
  const Vec3 b[3] = {b0, b1, b2};

  Vec3 na = cross(a1 - a0, a2 - a0);
  Vec3 nb = cross(b1 - b0, b2 - b0);
  double la = norm(na), lb = norm(nb);
  if (la < 1e-30 || lb < 1e-30) return false;  // degenerate triangle cannot properly intersect
  na /= la;
  nb /= lb;

  double db[3], da[3];
  for (int i = 0; i < 3; ++i) db[i] = dot(na, b[i] - a0);
  if ((db[0] > tolerance && db[1] > tolerance && db[2] > tolerance) ||
      (db[0] < -tolerance && db[1] < -tolerance && db[2] < -tolerance)) {
    return false;
  }
  for (int i = 0; i < 3; ++i) da[i] = dot(nb, a[i] - b0);
  if ((da[0] > tolerance && da[1] > tolerance && da[2] > tolerance) ||
      (da[0] < -tolerance && da[1] < -tolerance && da[2] < -tolerance)) {
    return false;
  }

  bool coplanar = true;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(da[i]) > tolerance || std::abs(db[i]) > tolerance) coplanar = false;
  }
  if (coplanar) {
    return coplanar_triangles_overlap(a, b, na, tolerance);
  }

  Vec3 dir = cross(na, nb);
  double dl = norm(dir);
  if (dl < 1e-12) return false;  // parallel, non-coplanar
  dir /= dl;

  double amin, amax, bmin, bmax;
  if (!plane_cut_interval(a, da, dir, tolerance, amin, amax)) return false;
  if (!plane_cut_interval(b, db, dir, tolerance, bmin, bmax)) return false;
  return std::min(amax, bmax) - std::max(amin, bmin) > tolerance;
}

TriangleBvh::TriangleBvh(const TriangleMesh& mesh) : mesh_(mesh) {
  if (mesh.faces.empty()) {
    throw Error(ErrorCategory::validation, "BVH requires a mesh with faces");
  }
  const int n = mesh.face_count();
  face_boxes_.resize(n);
  for (int f = 0; f < n; ++f) {
    Box& box = face_boxes_[f];
    box.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
    box.hi = -box.lo;
    for (int c = 0; c < 3; ++c) {
      const Vec3& p = mesh.vertices[mesh.faces[f][c]];
      for (int axis = 0; axis < 3; ++axis) {
        box.lo[axis] = std::min(box.lo[axis], p[axis]);
        box.hi[axis] = std::max(box.hi[axis], p[axis]);
      }
    }
  }
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * n / kLeafSize + 2);
  root_ = build(0, n);
}

int TriangleBvh::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.box.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity()};
  node.box.hi = -node.box.lo;
  for (int i = begin; i < end; ++i) {
    const Box& fb = face_boxes_[order_[i]];
    for (int axis = 0; axis < 3; ++axis) {
      node.box.lo[axis] = std::min(node.box.lo[axis], fb.lo[axis]);
      node.box.hi[axis] = std::max(node.box.hi[axis], fb.hi[axis]);
    }
  }

  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) {
    return self;
  }

  int axis = 0;
  Vec3 extent = node.box.hi - node.box.lo;
  for (int a = 1; a < 3; ++a) {
    if (extent[a] > extent[axis]) axis = a;
  }
  int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int fa, int fb) {
                     double ca = face_boxes_[fa].lo[axis] + face_boxes_[fa].hi[axis];
                     double cb = face_boxes_[fb].lo[axis] + face_boxes_[fb].hi[axis];
                     return ca < cb || (ca == cb && fa < fb);
                   });
  int left = build(begin, mid);
  int right = build(mid, end);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

double TriangleBvh::box_distance2(const Box& box, const Vec3& p) {
  double d2 = 0.0;
  for (int axis = 0; axis < 3; ++axis) {
    double d = 0.0;
    if (p[axis] < box.lo[axis]) d = box.lo[axis] - p[axis];
    else if (p[axis] > box.hi[axis]) d = p[axis] - box.hi[axis];
    d2 += d * d;
  }
  return d2;
}

bool TriangleBvh::boxes_overlap(const Box& a, const Box& b) {
  for (int axis = 0; axis < 3; ++axis) {
    if (a.hi[axis] < b.lo[axis] || b.hi[axis] < a.lo[axis]) return false;
  }
  return true;
}

void TriangleBvh::search_nearest(int node_id, const Vec3& query, Hit& best) const {
  const Node& node = nodes_[node_id];
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int f = order_[i];
      const Face& face = mesh_.faces[f];
      Vec3 cp = closest_point_on_triangle(query, mesh_.vertices[face[0]],
                                          mesh_.vertices[face[1]], mesh_.vertices[face[2]]);
      double d2 = distance2(query, cp);
      if (d2 < best.distance || (d2 == best.distance && f < best.face)) {
        best.distance = d2;
        best.face = f;
        best.closest = cp;
      }
    }
    return;
  }
  double dl = box_distance2(nodes_[node.left].box, query);
  double dr = box_distance2(nodes_[node.right].box, query);
  int first = dl <= dr ? node.left : node.right;
  int second = dl <= dr ? node.right : node.left;
  double dfirst = std::min(dl, dr);
  double dsecond = std::max(dl, dr);
  if (dfirst <= best.distance) search_nearest(first, query, best);
  if (dsecond <= best.distance) search_nearest(second, query, best);
}

TriangleBvh::Hit TriangleBvh::nearest(const Vec3& query) const {
  Hit best;
  best.distance = std::numeric_limits<double>::infinity();  // squared during search
  search_nearest(root_, query, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

void TriangleBvh::search_overlap(int node_id, const Box& box, int skip_face,
                                 std::vector<int>& out) const {
  const Node& node = nodes_[node_id];
  if (!boxes_overlap(node.box, box)) return;
  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int f = order_[i];
      if (f != skip_face && boxes_overlap(face_boxes_[f], box)) {
        out.push_back(f);
      }
    }
    return;
  }
  search_overlap(node.left, box, skip_face, out);
  search_overlap(node.right, box, skip_face, out);
}

std::vector<int> TriangleBvh::overlapping_faces(int face, double margin) const {
  Box box = face_boxes_[face];
  for (int axis = 0; axis < 3; ++axis) {
    box.lo[axis] -= margin;
    box.hi[axis] += margin;
  }
  std::vector<int> out;
  search_overlap(root_, box, face, out);
  std::sort(out.begin(), out.end());
  return out;
}

SurfaceComparison compare_surfaces(const TriangleMesh& prediction, const TriangleMesh& truth) {
  validate_comparison_input(prediction, "prediction");
  validate_comparison_input(truth, "truth");

  SurfaceComparison result;
  result.cd = chamfer_loss(prediction.vertices, truth.vertices);

  TriangleBvh pred_bvh(prediction);
  TriangleBvh truth_bvh(truth);

  std::vector<double> pred_to_truth(prediction.vertices.size());
  for (std::size_t i = 0; i < prediction.vertices.size(); ++i) {
    pred_to_truth[i] = truth_bvh.nearest(prediction.vertices[i]).distance;
  }
  std::vector<double> truth_to_pred(truth.vertices.size());
  for (std::size_t i = 0; i < truth.vertices.size(); ++i) {
    truth_to_pred[i] = pred_bvh.nearest(truth.vertices[i]).distance;
  }

  double total = std::accumulate(pred_to_truth.begin(), pred_to_truth.end(), 0.0) +
                 std::accumulate(truth_to_pred.begin(), truth_to_pred.end(), 0.0);
  result.assd = total / static_cast<double>(pred_to_truth.size() + truth_to_pred.size());

  std::vector<double> pooled = pred_to_truth;
  pooled.insert(pooled.end(), truth_to_pred.begin(), truth_to_pred.end());
  result.hd90 = nearest_rank_percentile(std::move(pooled), 90.0);

  // Normal consistency over nearest-vertex pairs, both directions pooled.
  VertexField pred_normals = vertex_normals(prediction);
  VertexField truth_normals = vertex_normals(truth);
  PointKdTree pred_tree(prediction.vertices);
  PointKdTree truth_tree(truth.vertices);
  double nc_sum = 0.0;
  for (int i = 0; i < prediction.vertex_count(); ++i) {
    int j = truth_tree.nearest(prediction.vertices[i]).index;
    nc_sum += dot(pred_normals.vec3_at(i), truth_normals.vec3_at(j));
  }
  for (int i = 0; i < truth.vertex_count(); ++i) {
    int j = pred_tree.nearest(truth.vertices[i]).index;
    nc_sum += dot(truth_normals.vec3_at(i), pred_normals.vec3_at(j));
  }
  result.nc = nc_sum / static_cast<double>(prediction.vertex_count() + truth.vertex_count());

  result.per_vertex_error = VertexField::scalars(truth.vertex_count());
  for (int i = 0; i < truth.vertex_count(); ++i) {
    result.per_vertex_error.at(i) = truth_to_pred[i];
  }
  return result;
}

SelfIntersectionReport self_intersection_fraction(const TriangleMesh& mesh,
                                                  int max_reported_pairs) {
  SelfIntersectionReport report;
  report.total_faces = mesh.face_count();
  if (mesh.faces.empty()) return report;
  validate_mesh(mesh);

  TriangleBvh bvh(mesh);
  std::vector<char> intersecting(mesh.faces.size(), 0);

  auto adjacent = [&](const Face& a, const Face& b) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (a[i] == b[j]) return true;
      }
    }
    return false;
  };

  for (int f = 0; f < mesh.face_count(); ++f) {
    for (int g : bvh.overlapping_faces(f, 0.0)) {
      if (g <= f) continue;
      const Face& fa = mesh.faces[f];
      const Face& fb = mesh.faces[g];
      if (adjacent(fa, fb)) continue;
      if (triangles_intersect(mesh.vertices[fa[0]], mesh.vertices[fa[1]], mesh.vertices[fa[2]],
                              mesh.vertices[fb[0]], mesh.vertices[fb[1]], mesh.vertices[fb[2]])) {
        intersecting[f] = intersecting[g] = 1;
        if (static_cast<int>(report.offending_pairs.size()) < max_reported_pairs) {
          report.offending_pairs.push_back({f, g});
        }
      }
    }
  }

  for (char flag : intersecting) report.intersecting_face_count += flag;
  report.fraction = static_cast<double>(report.intersecting_face_count) /
                    static_cast<double>(report.total_faces);
  return report;
}

VertexField error_map(const TriangleMesh& prediction, const TriangleMesh& truth) {
  validate_comparison_input(prediction, "prediction");
  if (truth.vertices.empty()) {
    throw Error(ErrorCategory::validation, "truth mesh is empty");
  }
  TriangleBvh bvh(prediction);
  VertexField field = VertexField::scalars(truth.vertex_count());
  for (int i = 0; i < truth.vertex_count(); ++i) {
    field.at(i) = bvh.nearest(truth.vertices[i]).distance;
  }
  return field;
}

}  // namespace meshflow
