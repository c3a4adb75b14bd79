#include "meshflow/svf.hpp"

#include <cmath>
#include <string>

#include "meshflow/errors.hpp"

namespace meshflow {

namespace {

void validate_geometry(GridDims dims, Vec3 spacing) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw Error(ErrorCategory::validation,
                "grid dims must be positive, got " + std::to_string(dims[0]) + "x" +
                    std::to_string(dims[1]) + "x" + std::to_string(dims[2]));
  }
  if (!(spacing.x > 0.0) || !(spacing.y > 0.0) || !(spacing.z > 0.0)) {
    throw Error(ErrorCategory::validation, "grid spacing must be strictly positive");
  }
}

struct AxisStencil {
  int i0, i1;
  double frac;
  double dfrac;  // d(frac)/d(world coordinate); 0 where clamped
};

AxisStencil axis_stencil(double coord, double origin, double spacing, int n) {
  AxisStencil s;
  if (n == 1) {
    s.i0 = s.i1 = 0;
    s.frac = 0.0;
    s.dfrac = 0.0;
    return s;
  }
  double g = (coord - origin) / spacing;
  if (g <= 0.0) {
    s.i0 = 0;
    s.i1 = 1;
    s.frac = 0.0;
    s.dfrac = 0.0;
  } else if (g >= static_cast<double>(n - 1)) {
    s.i0 = n - 2;
    s.i1 = n - 1;
    s.frac = 1.0;
    s.dfrac = 0.0;
  } else {
    s.i0 = static_cast<int>(g);
    if (s.i0 > n - 2) s.i0 = n - 2;
    s.i1 = s.i0 + 1;
    s.frac = g - s.i0;
    s.dfrac = 1.0 / spacing;
  }
  return s;
}

}  // namespace

FieldSpec FieldSpec::translation(const Vec3& v) {
  FieldSpec s;
  s.kind = Kind::translation;
  s.velocity = v;
  return s;
}

FieldSpec FieldSpec::rigid_rotation(const Vec3& omega, const Vec3& center) {
  if (norm2(omega) == 0.0) {
    throw Error(ErrorCategory::validation, "rotation axis must be nonzero");
  }
  FieldSpec s;
  s.kind = Kind::rigid_rotation;
  s.omega = omega;
  s.center = center;
  return s;
}

FieldSpec FieldSpec::radial(const Vec3& center, double rate) {
  FieldSpec s;
  s.kind = Kind::radial;
  s.center = center;
  s.rate = rate;
  return s;
}

FieldSpec FieldSpec::gaussian_bump(const Vec3& center, const Vec3& amplitude, double width) {
  if (!(width > 0.0)) {
    throw Error(ErrorCategory::validation, "gaussian bump width must be positive");
  }
  FieldSpec s;
  s.kind = Kind::gaussian_bump;
  s.center = center;
  s.amplitude = amplitude;
  s.width = width;
  return s;
}

Vec3 FieldSpec::evaluate(const Vec3& point) const {
  switch (kind) {
    case Kind::zero:
      return {};
    case Kind::translation:
      return velocity;
    case Kind::rigid_rotation:
      return cross(omega, point - center);
    case Kind::radial:
      return rate * (point - center);
    case Kind::gaussian_bump:
      return amplitude * std::exp(-distance2(point, center) / (width * width));
  }
  return {};
}

VelocityField zero_field(GridDims dims, Vec3 origin, Vec3 spacing) {
  validate_geometry(dims, spacing);
  VelocityField field;
  field.dims = dims;
  field.origin = origin;
  field.spacing = spacing;
  field.data.assign(static_cast<std::size_t>(field.node_count()), Vec3{});
  return field;
}

TrilinearStencil trilinear_stencil(const VelocityField& field, const Vec3& point) {
  AxisStencil sx = axis_stencil(point.x, field.origin.x, field.spacing.x, field.dims[0]);
  AxisStencil sy = axis_stencil(point.y, field.origin.y, field.spacing.y, field.dims[1]);
  AxisStencil sz = axis_stencil(point.z, field.origin.z, field.spacing.z, field.dims[2]);

  const double wx[2] = {1.0 - sx.frac, sx.frac};
  const double wy[2] = {1.0 - sy.frac, sy.frac};
  const double wz[2] = {1.0 - sz.frac, sz.frac};
  const double dx[2] = {-sx.dfrac, sx.dfrac};
  const double dy[2] = {-sy.dfrac, sy.dfrac};
  const double dz[2] = {-sz.dfrac, sz.dfrac};
  const int ix[2] = {sx.i0, sx.i1};
  const int iy[2] = {sy.i0, sy.i1};
  const int iz[2] = {sz.i0, sz.i1};

  TrilinearStencil stencil;
  int c = 0;
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 2; ++j) {
      for (int i = 0; i < 2; ++i, ++c) {
        stencil.index[c] = field.node_index(ix[i], iy[j], iz[k]);
        stencil.weight[c] = wx[i] * wy[j] * wz[k];
        stencil.weight_gradient[c] = {dx[i] * wy[j] * wz[k],
                                      wx[i] * dy[j] * wz[k],
                                      wx[i] * wy[j] * dz[k]};
      }
    }
  }
  return stencil;
}

Vec3 sample(const VelocityField& field, const Vec3& point) {
  TrilinearStencil s = trilinear_stencil(field, point);
  Vec3 v{};
  for (int c = 0; c < 8; ++c) {
    v += s.weight[c] * field.data[s.index[c]];
  }
  return v;
}

VelocityField accumulate(const std::vector<VelocityField>& fields) {
  if (fields.empty()) {
    throw Error(ErrorCategory::validation, "accumulate needs at least one field");
  }
  const VelocityField& first = fields.front();
  for (std::size_t i = 1; i < fields.size(); ++i) {
    const VelocityField& f = fields[i];
    if (f.dims != first.dims) {
      throw Error(ErrorCategory::validation,
                  "field " + std::to_string(i) + " dims mismatch");
    }
    if (!(f.origin == first.origin)) {
      throw Error(ErrorCategory::validation,
                  "field " + std::to_string(i) + " origin mismatch");
    }
    if (!(f.spacing == first.spacing)) {
      throw Error(ErrorCategory::validation,
                  "field " + std::to_string(i) + " spacing mismatch");
    }
  }
  VelocityField sum = first;
  for (std::size_t i = 1; i < fields.size(); ++i) {
    for (std::size_t n = 0; n < sum.data.size(); ++n) {
      sum.data[n] += fields[i].data[n];
    }
  }
  return sum;
}

VelocityField negate(const VelocityField& field) {
  VelocityField out = field;
  for (auto& v : out.data) v = -v;
  return out;
}

VelocityField synthesize(const FieldSpec& spec, GridDims dims, Vec3 origin, Vec3 spacing) {
  VelocityField field = zero_field(dims, origin, spacing);
  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        field.data[field.node_index(i, j, k)] = spec.evaluate(field.node_position(i, j, k));
      }
    }
  }
  return field;
}

}  // namespace meshflow
