#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "meshflow/flow.hpp"
#include "meshflow/mesh.hpp"
#include "meshflow/metrics.hpp"
#include "meshflow/objective.hpp"
#include "meshflow/svf.hpp"

namespace meshflow {

// One optimization stage: the SVF grid resolution (cubic is typical), the
// iteration budget, and the optimizer step size (0 falls back to
// FitConfig::base_step_size).
struct StagePlan {
  GridDims grid_dims{32, 32, 32};
  int iterations = 500;
  double step_size = 0.0;
};

struct FitConfig {
  // Default recurrence: two white stages then two pial stages, coarse to fine.
  std::vector<StagePlan> white_plan{{{32, 32, 32}, 300, 0.0}, {{64, 64, 64}, 300, 0.0}};
  std::vector<StagePlan> pial_plan{{{32, 32, 32}, 300, 0.0}, {{64, 64, 64}, 300, 0.0}};

  LossWeights weights;
  double base_step_size = 1e-4;
  double smoothness_weight = 0.1;  // grid-Laplacian penalty on SVF nodes
  IntegrationConfig integration;
  std::uint64_t seed = 0;
  int threads = 1;

  double divergence_factor = 10.0;       // abort when total > factor * initial
  double early_stop_rel_improvement = 1e-5;
  int early_stop_window = 50;
};

struct StageResult {
  VelocityField field;
  TriangleMesh mesh;
  std::vector<LossReport> history;  // one entry per iteration run
  bool diverged = false;
};

struct FitResult {
  RecurrentPipeline pipeline;
  std::vector<std::vector<LossReport>> loss_history;  // per stage
  std::vector<SurfaceComparison> final_metrics;       // per stage, vs its stage target
  bool failed = false;
  std::string failure_message;
};

// Observer hook, called once per iteration (checkpointing, progress).
using StageObserver =
    std::function<void(const std::string& label, int iteration, const VelocityField& field,
                       const LossReport& report)>;

// Reverse-mode gradient of chamfer + lambda1 * edge + smoothness penalty
// with respect to every SVF node vector. Chamfer nearest-neighbor
// assignments are held fixed at the current iterate; the adjoint walks back
// through each RK4 (or Euler) step and through the trilinear weights.
// Optionally reports the forward loss values and the smoothness penalty.
VelocityField loss_gradient(const VelocityField& field, const TriangleMesh& source,
                            const TriangleMesh& target, const EdgeLossSpec& spec,
                            const LossWeights& weights, const IntegrationConfig& integration,
                            double smoothness_weight = 0.0, LossReport* report = nullptr,
                            double* smoothness_penalty = nullptr, int threads = 1);

// Optimizes one SVF (Adam, zero-initialized) moving `source` toward
// `target`. The target's area sets the adaptive edge target with
// N = source face count. Returns the best iterate seen.
StageResult fit_stage(const TriangleMesh& source, const TriangleMesh& target,
                      const StagePlan& plan, const FitConfig& config,
                      const std::string& label = "stage", const StageObserver& observer = {});

// White stages first (toward white_target, starting at the template), their
// fields then frozen; pial stages continue from the white result toward
// pial_target. Vertex correspondence to the template is preserved
// throughout. A diverged stage aborts the remaining stages; the partial
// result comes back with `failed` set.
FitResult fit_recurrent(const TriangleMesh& template_mesh, const TriangleMesh& white_target,
                        const TriangleMesh& pial_target, const FitConfig& config,
                        const StageObserver& observer = {});

}  // namespace meshflow
