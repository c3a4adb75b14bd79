#pragma once

#include <cstdint>
#include <vector>

#include "meshflow/vec3.hpp"

namespace meshflow {

// Triangle mesh in world millimeters. Deformations move vertices only; the
// face list of a deformed mesh is identical to its template's.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int face_count() const { return static_cast<int>(faces.size()); }
};

// Per-vertex values (scalars or fixed-size tuples) bound to a mesh by vertex
// count.
struct VertexField {
  int vertex_count = 0;
  int components = 1;
  std::vector<double> values;  // vertex_count * components, vertex-major

  double& at(int vertex, int component = 0) { return values[static_cast<std::size_t>(vertex) * components + component]; }
  double at(int vertex, int component = 0) const { return values[static_cast<std::size_t>(vertex) * components + component]; }

  Vec3 vec3_at(int vertex) const {
    return {at(vertex, 0), at(vertex, 1), at(vertex, 2)};
  }
  void set_vec3(int vertex, const Vec3& v) {
    at(vertex, 0) = v.x;
    at(vertex, 1) = v.y;
    at(vertex, 2) = v.z;
  }

  static VertexField scalars(int vertex_count) {
    return {vertex_count, 1, std::vector<double>(static_cast<std::size_t>(vertex_count), 0.0)};
  }
  static VertexField vectors(int vertex_count) {
    return {vertex_count, 3, std::vector<double>(static_cast<std::size_t>(vertex_count) * 3, 0.0)};
  }
};

struct ManifoldReport {
  bool is_closed = false;
  bool is_orientable = false;
  std::int64_t euler_characteristic = 0;
  std::int64_t boundary_edge_count = 0;
  std::int64_t non_manifold_edge_count = 0;
};

struct EdgeStatistics {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::int64_t edge_count = 0;
};

// Throws validation error on out-of-range face indices or faces that repeat
// a vertex.
void validate_mesh(const TriangleMesh& mesh);

// Geodesic sphere from an icosahedron: every subdivision midpoint is
// re-projected onto the sphere. V = 10*4^L + 2, F = 20*4^L.
// Levels above 8 are rejected (resource guard).
TriangleMesh icosphere(int subdivision_level, double radius = 1.0, Vec3 center = {});

ManifoldReport manifold_check(const TriangleMesh& mesh);

double surface_area(const TriangleMesh& mesh);

// Area-weighted vertex normals, unit length. Vertices whose accumulated
// normal vanishes fall back to the unweighted face-normal average, then to
// +z; their indices are appended to `degenerate` when given.
VertexField vertex_normals(const TriangleMesh& mesh, std::vector<int>* degenerate = nullptr);

// Discrete mean curvature (1/mm): cotangent Laplacian with mixed Voronoi
// vertex areas; sign from the Laplacian vector against the vertex normal,
// positive on convex regions (sphere of radius r gives +1/r).
VertexField mean_curvature(const TriangleMesh& mesh);

// Sulcal-depth proxy (mm): accumulated normal displacement under uniform
// Laplacian smoothing. Sulci (dents) come out positive, gyri negative.
VertexField convexity(const TriangleMesh& mesh, int smoothing_iterations = 50);

// Statistics over unique undirected edge lengths (population stddev).
EdgeStatistics edge_statistics(const TriangleMesh& mesh);

// Unique undirected edges as sorted index pairs, lexicographically ordered.
std::vector<std::array<int, 2>> unique_edges(const TriangleMesh& mesh);

// Neighbor lists from the undirected edge adjacency, each sorted ascending.
std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh);

Vec3 mesh_centroid(const TriangleMesh& mesh);

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace meshflow
