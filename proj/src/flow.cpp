#include "meshflow/flow.hpp"

#include <atomic>
#include <string>

#include "meshflow/errors.hpp"
#include "meshflow/parallel.hpp"

namespace meshflow {

namespace {

void validate_config(const IntegrationConfig& config) {
  if (config.step_count < 1) {
    throw Error(ErrorCategory::validation, "step count must be >= 1");
  }
  if (!(config.time_horizon > 0.0)) {
    throw Error(ErrorCategory::validation, "time horizon must be positive");
  }
}

}  // namespace

Vec3 integrate_point(const VelocityField& field, const Vec3& x0, const IntegrationConfig& config) {
  validate_config(config);
  if (!finite(x0)) {
    throw Error(ErrorCategory::integration, "initial point is not finite");
  }

  const double h = config.time_horizon / config.step_count;
  Vec3 x = x0;
  for (int step = 0; step < config.step_count; ++step) {
    if (config.method == IntegrationConfig::Method::euler) {
      x += h * sample(field, x);
    } else {
      Vec3 k1 = sample(field, x);
      Vec3 k2 = sample(field, x + (h * 0.5) * k1);
      Vec3 k3 = sample(field, x + (h * 0.5) * k2);
      Vec3 k4 = sample(field, x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!finite(x)) {
      throw Error(ErrorCategory::integration,
                  "non-finite state at step " + std::to_string(step));
    }
  }
  return x;
}

TriangleMesh deform_mesh(const TriangleMesh& mesh, const VelocityField& field,
                         const IntegrationConfig& config, int threads) {
  validate_config(config);
  TriangleMesh out;
  out.faces = mesh.faces;
  out.vertices.resize(mesh.vertices.size());

  std::atomic<int> failed_vertex{-1};
  parallel_for(static_cast<std::int64_t>(mesh.vertices.size()), threads,
               [&](std::int64_t begin, std::int64_t end, int) {
                 for (std::int64_t v = begin; v < end; ++v) {
                   try {
                     out.vertices[v] = integrate_point(field, mesh.vertices[v], config);
                   } catch (const Error&) {
                     int expected = -1;
                     failed_vertex.compare_exchange_strong(expected, static_cast<int>(v));
                     return;
                   }
                 }
               });
  if (failed_vertex.load() >= 0) {
    throw Error(ErrorCategory::integration,
                "integration failed at vertex " + std::to_string(failed_vertex.load()));
  }
  return out;
}

RecurrentPipeline run_pipeline(const TriangleMesh& template_mesh,
                               const std::vector<VelocityField>& stages,
                               const IntegrationConfig& config,
                               std::vector<std::string> stage_labels, int threads) {
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (!stages[i].same_geometry(stages[0])) {
      throw Error(ErrorCategory::validation,
                  "stage " + std::to_string(i) + " grid geometry differs from stage 0");
    }
  }
  if (!stage_labels.empty() && stage_labels.size() != stages.size()) {
    throw Error(ErrorCategory::validation, "stage label count does not match stage count");
  }

  RecurrentPipeline pipeline;
  pipeline.template_mesh = template_mesh;
  pipeline.stages = stages;
  pipeline.stage_labels = std::move(stage_labels);
  if (pipeline.stage_labels.empty()) {
    for (std::size_t i = 0; i < stages.size(); ++i) {
      pipeline.stage_labels.push_back("stage-" + std::to_string(i + 1));
    }
  }

  const TriangleMesh* current = &template_mesh;
  std::vector<VelocityField> prefix;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    try {
      pipeline.outputs.push_back(deform_mesh(*current, stages[i], config, threads));
    } catch (const Error& e) {
      throw Error(e.category(), "stage " + std::to_string(i + 1) + ": " + e.what());
    }
    current = &pipeline.outputs.back();
    prefix.push_back(stages[i]);
    pipeline.accumulated.push_back(accumulate(prefix));
  }
  return pipeline;
}

}  // namespace meshflow
