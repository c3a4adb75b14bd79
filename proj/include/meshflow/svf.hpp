#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshflow/vec3.hpp"

namespace meshflow {

using GridDims = std::array<int, 3>;

// Stationary velocity field on a regular grid. Node (i,j,k) sits at
// origin + (i*sx, j*sy, k*sz); data is x-fastest, z-slowest. Units are mm
// per unit flow time.
struct VelocityField {
  GridDims dims{0, 0, 0};
  Vec3 origin{};
  Vec3 spacing{1.0, 1.0, 1.0};
  std::vector<Vec3> data;

  std::int64_t node_count() const {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  }
  std::int64_t node_index(int i, int j, int k) const {
    return (static_cast<std::int64_t>(k) * dims[1] + j) * dims[0] + i;
  }
  Vec3 node_position(int i, int j, int k) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y, origin.z + k * spacing.z};
  }
  bool same_geometry(const VelocityField& other) const {
    return dims == other.dims && origin == other.origin && spacing == other.spacing;
  }
};

// Analytic test-field generator parameters.
struct FieldSpec {
  enum class Kind { zero, translation, rigid_rotation, radial, gaussian_bump };

  Kind kind = Kind::zero;
  Vec3 velocity{};   // translation
  Vec3 omega{};      // rigid_rotation: axis scaled by angular rate (rad per unit time)
  Vec3 center{};     // rotation / radial / bump
  double rate = 0.0; // radial: V = rate * (x - center)
  Vec3 amplitude{};  // bump peak velocity
  double width = 1.0;

  static FieldSpec zero() { return {}; }
  static FieldSpec translation(const Vec3& v);
  static FieldSpec rigid_rotation(const Vec3& omega, const Vec3& center);
  static FieldSpec radial(const Vec3& center, double rate);
  static FieldSpec gaussian_bump(const Vec3& center, const Vec3& amplitude, double width);

  // Analytic evaluation at a world point (no grid involved).
  Vec3 evaluate(const Vec3& point) const;
};

VelocityField zero_field(GridDims dims, Vec3 origin, Vec3 spacing);

// Trilinear interpolation in world space; points outside the grid clamp to
// the boundary face.
Vec3 sample(const VelocityField& field, const Vec3& point);

// Voxel-wise sum; all fields must share dims/origin/spacing.
VelocityField accumulate(const std::vector<VelocityField>& fields);

VelocityField negate(const VelocityField& field);

// Node vectors set to the analytic field at node world positions.
VelocityField synthesize(const FieldSpec& spec, GridDims dims, Vec3 origin, Vec3 spacing);

// The 8-node interpolation stencil at a world point: node indices, weights,
// and weight gradients with respect to the world position (zero along any
// clamped axis). sample() is exactly the weighted sum of this stencil.
struct TrilinearStencil {
  std::array<std::int64_t, 8> index;
  std::array<double, 8> weight;
  std::array<Vec3, 8> weight_gradient;
};

TrilinearStencil trilinear_stencil(const VelocityField& field, const Vec3& point);

}  // namespace meshflow
