#pragma once

#include <cstdint>
#include <vector>

#include "meshflow/mesh.hpp"

namespace meshflow {

// Spherical map by construction: the deformed surface and the spherical
// template share vertex indices and faces, so the correspondence is the
// identity over vertex indices.
struct SphericalMap {
  TriangleMesh surface;
  TriangleMesh sphere;
};

// Distortion of the identity correspondence. Area and metric distortions are
// log ratios normalized by the total-area ratio (global scale factored out);
// angle distortion is the absolute corner-angle difference in radians.
struct DistortionReport {
  std::vector<double> area_per_face;    // log(sphere/surface area), scale-normalized
  std::vector<double> angle_per_corner; // |angle difference|, 3 entries per face
  std::vector<double> metric_per_edge;  // log(sphere/surface length), scale-normalized

  double area_mean_abs = 0.0;
  double area_p95_abs = 0.0;
  double angle_mean = 0.0;
  double angle_p95 = 0.0;
  double metric_mean_abs = 0.0;
  double metric_p95_abs = 0.0;

  std::int64_t degenerate_face_count = 0;
};

SphericalMap make_spherical_map(TriangleMesh surface, TriangleMesh sphere);

// Re-binds per-vertex values from the surface to the sphere (index-wise copy).
VertexField map_field(const SphericalMap& map, const VertexField& field);

DistortionReport distortion(const SphericalMap& map);

}  // namespace meshflow
