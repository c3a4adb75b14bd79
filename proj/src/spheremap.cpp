#include "meshflow/spheremap.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "meshflow/errors.hpp"

namespace meshflow {

namespace {

constexpr double kDegenerateArea = 1e-12;

double mean_abs(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += std::abs(v);
  return sum / static_cast<double>(values.size());
}

double p95_abs(std::vector<double> values) {
  if (values.empty()) return 0.0;
  for (double& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end());
  std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * values.size()));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double corner_angle(const Vec3& apex, const Vec3& p, const Vec3& q) {
  Vec3 u = p - apex, v = q - apex;
  double nu = norm(u), nv = norm(v);
  if (nu < 1e-150 || nv < 1e-150) return 0.0;
  return std::atan2(norm(cross(u, v)), dot(u, v));
}

}  // namespace

SphericalMap make_spherical_map(TriangleMesh surface, TriangleMesh sphere) {
  if (surface.vertices.size() != sphere.vertices.size()) {
    throw Error(ErrorCategory::validation,
                "surface has " + std::to_string(surface.vertices.size()) +
                    " vertices, sphere has " + std::to_string(sphere.vertices.size()));
  }
  if (surface.faces != sphere.faces) {
    throw Error(ErrorCategory::validation, "surface and sphere face lists differ");
  }
  return {std::move(surface), std::move(sphere)};
}

VertexField map_field(const SphericalMap& map, const VertexField& field) {
  if (field.vertex_count != map.surface.vertex_count()) {
    throw Error(ErrorCategory::validation,
                "field bound to " + std::to_string(field.vertex_count) +
                    " vertices, surface has " + std::to_string(map.surface.vertex_count()));
  }
  return field;  // identity correspondence: same values, now bound to the sphere
}

DistortionReport distortion(const SphericalMap& map) {
  const TriangleMesh& surface = map.surface;
  const TriangleMesh& sphere = map.sphere;

  DistortionReport report;

  double surface_total = 0.0, sphere_total = 0.0;
  std::vector<char> degenerate(surface.faces.size(), 0);
  for (std::size_t f = 0; f < surface.faces.size(); ++f) {
    const Face& face = surface.faces[f];
    double a_surf = triangle_area(surface.vertices[face[0]], surface.vertices[face[1]],
                                  surface.vertices[face[2]]);
    double a_sph = triangle_area(sphere.vertices[face[0]], sphere.vertices[face[1]],
                                 sphere.vertices[face[2]]);
    if (a_surf < kDegenerateArea || a_sph < kDegenerateArea) {
      degenerate[f] = 1;
      ++report.degenerate_face_count;
      continue;
    }
    surface_total += a_surf;
    sphere_total += a_sph;
  }
  if (!(surface_total > 0.0) || !(sphere_total > 0.0)) {
    throw Error(ErrorCategory::validation, "all faces degenerate on one side of the map");
  }
  const double log_area_ratio = std::log(sphere_total / surface_total);
  const double log_scale = 0.5 * log_area_ratio;  // global length-scale ratio

  for (std::size_t f = 0; f < surface.faces.size(); ++f) {
    if (degenerate[f]) continue;
    const Face& face = surface.faces[f];
    const Vec3& s0 = surface.vertices[face[0]];
    const Vec3& s1 = surface.vertices[face[1]];
    const Vec3& s2 = surface.vertices[face[2]];
    const Vec3& t0 = sphere.vertices[face[0]];
    const Vec3& t1 = sphere.vertices[face[1]];
    const Vec3& t2 = sphere.vertices[face[2]];

    report.area_per_face.push_back(
        std::log(triangle_area(t0, t1, t2) / triangle_area(s0, s1, s2)) - log_area_ratio);

    report.angle_per_corner.push_back(std::abs(corner_angle(t0, t1, t2) - corner_angle(s0, s1, s2)));
    report.angle_per_corner.push_back(std::abs(corner_angle(t1, t2, t0) - corner_angle(s1, s2, s0)));
    report.angle_per_corner.push_back(std::abs(corner_angle(t2, t0, t1) - corner_angle(s2, s0, s1)));
  }

  for (const auto& e : unique_edges(surface)) {
    double len_surf = distance(surface.vertices[e[0]], surface.vertices[e[1]]);
    double len_sph = distance(sphere.vertices[e[0]], sphere.vertices[e[1]]);
    if (len_surf < 1e-150 || len_sph < 1e-150) continue;
    report.metric_per_edge.push_back(std::log(len_sph / len_surf) - log_scale);
  }

  report.area_mean_abs = mean_abs(report.area_per_face);
  report.area_p95_abs = p95_abs(report.area_per_face);
  report.angle_mean = mean_abs(report.angle_per_corner);
  report.angle_p95 = p95_abs(report.angle_per_corner);
  report.metric_mean_abs = mean_abs(report.metric_per_edge);
  report.metric_p95_abs = p95_abs(report.metric_per_edge);
  return report;
}

}  // namespace meshflow
