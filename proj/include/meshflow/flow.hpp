#pragma once

#include <string>
#include <vector>

#include "meshflow/mesh.hpp"
#include "meshflow/svf.hpp"

namespace meshflow {

// Fixed-step integration over [0, time_horizon]. Euler exists only as a
// convergence-order fixture; rk4 is the working solver.
struct IntegrationConfig {
  enum class Method { rk4, euler };

  double time_horizon = 1.0;
  int step_count = 30;
  Method method = Method::rk4;
};

// Stage-by-stage deformation record: template S_0, fields V_1..V_n, the
// deformed surfaces S_1..S_n, and running field sums for reporting.
struct RecurrentPipeline {
  TriangleMesh template_mesh;
  std::vector<VelocityField> stages;
  std::vector<TriangleMesh> outputs;
  std::vector<std::string> stage_labels;
  std::vector<VelocityField> accumulated;  // accumulated[i] = V_1 + ... + V_{i+1}
};

// Flow of a single point under the field. Throws an integration error naming
// the step on non-finite state.
Vec3 integrate_point(const VelocityField& field, const Vec3& x0, const IntegrationConfig& config);

// Every vertex integrated independently; faces copied verbatim.
TriangleMesh deform_mesh(const TriangleMesh& mesh, const VelocityField& field,
                         const IntegrationConfig& config, int threads = 1);

RecurrentPipeline run_pipeline(const TriangleMesh& template_mesh,
                               const std::vector<VelocityField>& stages,
                               const IntegrationConfig& config,
                               std::vector<std::string> stage_labels = {}, int threads = 1);

}  // namespace meshflow
