#pragma once

#include <optional>
#include <string>
#include <vector>

#include "meshflow/fit.hpp"
#include "meshflow/mesh.hpp"
#include "meshflow/metrics.hpp"
#include "meshflow/objective.hpp"
#include "meshflow/spheremap.hpp"
#include "meshflow/svf.hpp"
#include "meshflow/voxel.hpp"

namespace meshflow {

enum class PlyEncoding { binary_little_endian, ascii };

// Format picked by extension: .obj (ASCII) or .ply (ASCII or binary LE).
TriangleMesh read_mesh(const std::string& path);
void write_mesh(const TriangleMesh& mesh, const std::string& path,
                PlyEncoding encoding = PlyEncoding::binary_little_endian);

// "SVF1" container: u32 version, 3*u32 dims, 3*f64 origin, 3*f64 spacing,
// 8 reserved bytes, then nx*ny*nz*3 little-endian f32 (x-fastest nodes,
// components interleaved).
VelocityField read_svf(const std::string& path);
void write_svf(const VelocityField& field, const std::string& path);

// "VOL1" container, same header layout plus channel count and kind word;
// payload is i32 labels or f32 probabilities (voxel-major, channel-minor).
VoxelGrid read_voxel_grid(const std::string& path);
void write_voxel_grid(const VoxelGrid& grid, const std::string& path);

// Per-vertex scalar/tuple values as plain text: a count/components line then
// one vertex per line.
VertexField read_vertex_field(const std::string& path);
void write_vertex_field(const VertexField& field, const std::string& path);

// --- run configuration (one `key = value` per line, # comments) ---

struct RunConfig {
  std::string template_path;
  std::string white_target_path;
  std::string pial_target_path;
  std::string output_dir = ".";
  FitConfig fit;
  int threads = 1;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig read_run_config(const std::string& path);

// --- synthetic acceptance fixtures ---

enum class FixtureKind { ellipsoid, bumpy_sphere, dimpled_sphere, nested_white_pial };

FixtureKind fixture_kind_from_name(const std::string& name);

struct FixtureParams {
  int subdivision_level = 4;
  double radius = 1.0;
  Vec3 center{};
  Vec3 axes{1.3, 1.0, 0.8};   // ellipsoid semi-axes
  double amplitude = 0.15;    // bumpy/nested radial pattern amplitude (relative)
  double dimple_depth = 0.2;  // dimpled sphere, relative depth
  double dimple_width = 0.5;  // radians
  double gap = 0.08;          // nested pair minimum separation (mm)
  bool with_labels = false;
  std::array<int, 3> label_dims{32, 32, 32};
};

struct FixtureSet {
  std::vector<TriangleMesh> meshes;
  std::vector<std::string> names;  // parallel to meshes, e.g. {"white", "pial"}
  std::optional<VoxelGrid> labels;
};

// Deterministic given (kind, params, seed); the seed rotates the radial
// pattern / picks the dimple direction. Parameter choices that would produce
// self-intersecting fixtures are rejected.
FixtureSet synthesize_fixture(FixtureKind kind, const FixtureParams& params, std::uint64_t seed);

// --- key=value report serialization ---

std::string to_kv(const SurfaceComparison& c);
std::string to_kv(const SelfIntersectionReport& r);
std::string to_kv(const LossReport& r);
std::string to_kv(const DistortionReport& r);
std::string to_kv(const EdgeStatistics& s);
std::string to_kv(const ManifoldReport& r);

}  // namespace meshflow
