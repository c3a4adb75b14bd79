#include "meshflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

#include "meshflow/errors.hpp"

namespace meshflow {

namespace {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

constexpr double kDegenerateArea = 1e-12;  // mm^2
constexpr double kCotangentCap = 1e6;      // cap for degenerate-triangle cotangents

double clamped_cot(const Vec3& u, const Vec3& v) {
  double c = dot(u, v);
  double s = norm(cross(u, v));
  if (s < 1e-30) return c >= 0.0 ? kCotangentCap : -kCotangentCap;
  return std::clamp(c / s, -kCotangentCap, kCotangentCap);
}

}  // namespace

void validate_mesh(const TriangleMesh& mesh) {
  const int n = mesh.vertex_count();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Face& face = mesh.faces[f];
    for (int c = 0; c < 3; ++c) {
      if (face[c] < 0 || face[c] >= n) {
        throw Error(ErrorCategory::validation,
                    "face " + std::to_string(f) + " references vertex " +
                        std::to_string(face[c]) + " outside [0, " + std::to_string(n) + ")");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw Error(ErrorCategory::validation,
                  "face " + std::to_string(f) + " repeats a vertex");
    }
  }
}

TriangleMesh icosphere(int subdivision_level, double radius, Vec3 center) {
  if (subdivision_level < 0) {
    throw Error(ErrorCategory::validation, "subdivision level must be non-negative");
  }
  if (subdivision_level > 8) {
    throw Error(ErrorCategory::resource,
                "subdivision level " + std::to_string(subdivision_level) +
                    " exceeds guard (max 8)");
  }
  if (!(radius > 0.0)) {
    throw Error(ErrorCategory::validation, "radius must be positive");
  }

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  mesh.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };

  auto project = [&](const Vec3& v) { return normalized(v); };
  for (auto& v : mesh.vertices) v = project(v);

  for (int level = 0; level < subdivision_level; ++level) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(mesh.faces.size() * 2);
    std::vector<Face> next_faces;
    next_faces.reserve(mesh.faces.size() * 4);

    auto mid = [&](int a, int b) {
      auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), mesh.vertex_count());
      if (inserted) {
        mesh.vertices.push_back(project((mesh.vertices[a] + mesh.vertices[b]) * 0.5));
      }
      return it->second;
    };

    for (const Face& f : mesh.faces) {
      int m01 = mid(f[0], f[1]);
      int m12 = mid(f[1], f[2]);
      int m20 = mid(f[2], f[0]);
      next_faces.push_back({f[0], m01, m20});
      next_faces.push_back({f[1], m12, m01});
      next_faces.push_back({f[2], m20, m12});
      next_faces.push_back({m01, m12, m20});
    }
    mesh.faces = std::move(next_faces);
  }

  for (auto& v : mesh.vertices) v = center + v * radius;
  return mesh;
}

ManifoldReport manifold_check(const TriangleMesh& mesh) {
  struct EdgeUse {
    int forward = 0;   // directed occurrences (a, b) with a < b
    int backward = 0;  // directed occurrences (b, a)
  };
  std::unordered_map<std::uint64_t, EdgeUse> edges;
  edges.reserve(mesh.faces.size() * 3);

  std::int64_t degenerate_edges = 0;
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      int a = f[c];
      int b = f[(c + 1) % 3];
      if (a == b) {
        ++degenerate_edges;
        continue;
      }
      EdgeUse& use = edges[edge_key(a, b)];
      if (a < b) {
        ++use.forward;
      } else {
        ++use.backward;
      }
    }
  }

  ManifoldReport report;
  bool orientable = true;
  for (const auto& [key, use] : edges) {
    int total = use.forward + use.backward;
    if (total == 1) {
      ++report.boundary_edge_count;
    } else if (total > 2) {
      ++report.non_manifold_edge_count;
    } else if (use.forward != 1 || use.backward != 1) {
      // Two faces share the edge in the same direction.
      orientable = false;
    }
  }
  report.non_manifold_edge_count += degenerate_edges;
  report.is_closed = report.boundary_edge_count == 0 && report.non_manifold_edge_count == 0 &&
                     !mesh.faces.empty();
  report.is_orientable = orientable;
  report.euler_characteristic = static_cast<std::int64_t>(mesh.vertices.size()) -
                                static_cast<std::int64_t>(edges.size()) +
                                static_cast<std::int64_t>(mesh.faces.size());
  return report;
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const Face& f : mesh.faces) {
    area += triangle_area(mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]);
  }
  return area;
}

VertexField vertex_normals(const TriangleMesh& mesh, std::vector<int>* degenerate) {
  const int n = mesh.vertex_count();
  std::vector<Vec3> weighted(n);
  std::vector<Vec3> unweighted(n);
  for (const Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    Vec3 fn = cross(mesh.vertices[f[1]] - a, mesh.vertices[f[2]] - a);  // |fn| = 2*area
    Vec3 unit = normalized(fn);
    for (int c = 0; c < 3; ++c) {
      weighted[f[c]] += fn;
      unweighted[f[c]] += unit;
    }
  }

  VertexField normals = VertexField::vectors(n);
  for (int i = 0; i < n; ++i) {
    Vec3 nrm = weighted[i];
    if (norm2(nrm) < 1e-30) nrm = unweighted[i];
    if (norm2(nrm) < 1e-30) {
      nrm = {0.0, 0.0, 1.0};
      if (degenerate) degenerate->push_back(i);
    }
    normals.set_vec3(i, normalized(nrm));
  }
  return normals;
}

VertexField mean_curvature(const TriangleMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<Vec3> laplace(n);       // cotangent-weighted sum of (x_i - x_j)
  std::vector<double> mixed_area(n);  // Voronoi-mixed vertex areas

  for (const Face& f : mesh.faces) {
    const Vec3 p[3] = {mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]};
    double area = triangle_area(p[0], p[1], p[2]);

    // cot of the angle at each corner
    double cot[3];
    for (int c = 0; c < 3; ++c) {
      cot[c] = clamped_cot(p[(c + 1) % 3] - p[c], p[(c + 2) % 3] - p[c]);
    }

    for (int c = 0; c < 3; ++c) {
      int i = f[c];
      int j = f[(c + 1) % 3];
      // Edge (i, j) is opposite corner c+2; its cotangent weights both ends.
      double w = cot[(c + 2) % 3];
      Vec3 e = mesh.vertices[i] - mesh.vertices[j];
      laplace[i] += w * e;
      laplace[j] -= w * e;
    }

    if (area < kDegenerateArea) {
      continue;  // no reliable area contribution
    }
    bool obtuse = cot[0] < 0.0 || cot[1] < 0.0 || cot[2] < 0.0;
    for (int c = 0; c < 3; ++c) {
      if (!obtuse) {
        // Voronoi area: 1/8 * (|e1|^2 cot(opp1) + |e2|^2 cot(opp2))
        double e1 = distance2(p[c], p[(c + 1) % 3]);
        double e2 = distance2(p[c], p[(c + 2) % 3]);
        mixed_area[f[c]] += (e1 * cot[(c + 2) % 3] + e2 * cot[(c + 1) % 3]) / 8.0;
      } else {
        mixed_area[f[c]] += (cot[c] < 0.0) ? area / 2.0 : area / 4.0;
      }
    }
  }

  VertexField normals = vertex_normals(mesh);
  VertexField h = VertexField::scalars(n);
  for (int i = 0; i < n; ++i) {
    if (mixed_area[i] < kDegenerateArea) {
      h.at(i) = 0.0;
      continue;
    }
    Vec3 k = laplace[i] / (2.0 * mixed_area[i]);  // 2H * outward normal
    double magnitude = 0.5 * norm(k);
    h.at(i) = dot(k, normals.vec3_at(i)) >= 0.0 ? magnitude : -magnitude;
  }
  return h;
}

VertexField convexity(const TriangleMesh& mesh, int smoothing_iterations) {
  if (smoothing_iterations < 0) {
    throw Error(ErrorCategory::validation, "smoothing iterations must be non-negative");
  }
  const int n = mesh.vertex_count();
  const double relaxation = 0.5;

  std::vector<std::vector<int>> neighbors = vertex_neighbors(mesh);
  VertexField depth = VertexField::scalars(n);

  TriangleMesh current = mesh;
  for (int iter = 0; iter < smoothing_iterations; ++iter) {
    VertexField normals = vertex_normals(current);
    std::vector<Vec3> next(n);
    for (int i = 0; i < n; ++i) {
      if (neighbors[i].empty()) {
        next[i] = current.vertices[i];
        continue;
      }
      Vec3 avg{};
      for (int j : neighbors[i]) avg += current.vertices[j];
      avg /= static_cast<double>(neighbors[i].size());
      next[i] = current.vertices[i] + relaxation * (avg - current.vertices[i]);
      depth.at(i) += dot(next[i] - current.vertices[i], normals.vec3_at(i));
    }
    current.vertices = std::move(next);
  }
  return depth;
}

EdgeStatistics edge_statistics(const TriangleMesh& mesh) {
  auto edges = unique_edges(mesh);
  EdgeStatistics stats;
  stats.edge_count = static_cast<std::int64_t>(edges.size());
  if (edges.empty()) return stats;

  double sum = 0.0, sum2 = 0.0;
  stats.min = std::numeric_limits<double>::infinity();
  stats.max = -std::numeric_limits<double>::infinity();
  for (const auto& e : edges) {
    double len = distance(mesh.vertices[e[0]], mesh.vertices[e[1]]);
    sum += len;
    sum2 += len * len;
    stats.min = std::min(stats.min, len);
    stats.max = std::max(stats.max, len);
  }
  double inv = 1.0 / static_cast<double>(edges.size());
  stats.mean = sum * inv;
  stats.stddev = std::sqrt(std::max(0.0, sum2 * inv - stats.mean * stats.mean));
  return stats;
}

std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh) {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(mesh.faces.size() * 3 / 2);
  for (const Face& f : mesh.faces) {
    for (int c = 0; c < 3; ++c) {
      int a = f[c];
      int b = f[(c + 1) % 3];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      edges.push_back({a, b});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::vector<int>> neighbors(mesh.vertex_count());
  for (const auto& e : unique_edges(mesh)) {
    neighbors[e[0]].push_back(e[1]);
    neighbors[e[1]].push_back(e[0]);
  }
  for (auto& list : neighbors) std::sort(list.begin(), list.end());
  return neighbors;
}

Vec3 mesh_centroid(const TriangleMesh& mesh) {
  Vec3 c{};
  for (const Vec3& v : mesh.vertices) c += v;
  return mesh.vertices.empty() ? c : c / static_cast<double>(mesh.vertices.size());
}

}  // namespace meshflow
