#include "meshflow/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "meshflow/errors.hpp"
#include "meshflow/kdtree.hpp"
#include "meshflow/parallel.hpp"

namespace meshflow {

namespace {

// Unnormalized 6-neighbor graph Laplacian: (LV)_n = sum_m (V_m - V_n).
std::vector<Vec3> apply_grid_laplacian(const VelocityField& field, const std::vector<Vec3>& v) {
  const auto [nx, ny, nz] = field.dims;
  std::vector<Vec3> out(v.size());
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        std::int64_t n = field.node_index(i, j, k);
        Vec3 sum{};
        int degree = 0;
        auto add = [&](int ii, int jj, int kk) {
          sum += v[field.node_index(ii, jj, kk)];
          ++degree;
        };
        if (i > 0) add(i - 1, j, k);
        if (i + 1 < nx) add(i + 1, j, k);
        if (j > 0) add(i, j - 1, k);
        if (j + 1 < ny) add(i, j + 1, k);
        if (k > 0) add(i, j, k - 1);
        if (k + 1 < nz) add(i, j, k + 1);
        out[n] = sum - static_cast<double>(degree) * v[n];
      }
    }
  }
  return out;
}

// Adjoint of one sample() call: scatters the output adjoint into the node
// gradient and returns the adjoint with respect to the sample position.
Vec3 sample_adjoint(const VelocityField& field, const Vec3& position, const Vec3& out_adjoint,
                    std::vector<Vec3>& node_gradient) {
  TrilinearStencil s = trilinear_stencil(field, position);
  Vec3 position_adjoint{};
  for (int c = 0; c < 8; ++c) {
    node_gradient[s.index[c]] += s.weight[c] * out_adjoint;
    position_adjoint += dot(out_adjoint, field.data[s.index[c]]) * s.weight_gradient[c];
  }
  return position_adjoint;
}

struct AdamState {
  std::vector<Vec3> m;
  std::vector<Vec3> v;
  int t = 0;

  explicit AdamState(std::size_t n) : m(n), v(n) {}

  void update(std::vector<Vec3>& params, const std::vector<Vec3>& grad, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++t;
    double c1 = 1.0 - std::pow(beta1, t);
    double c2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        double g = grad[i][a];
        m[i][a] = beta1 * m[i][a] + (1.0 - beta1) * g;
        v[i][a] = beta2 * v[i][a] + (1.0 - beta2) * g * g;
        params[i][a] -= lr * (m[i][a] / c1) / (std::sqrt(v[i][a] / c2) + eps);
      }
    }
  }
};

VelocityField grid_for_meshes(const TriangleMesh& a, const TriangleMesh& b, GridDims dims) {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi = -lo;
  auto extend = [&](const TriangleMesh& m) {
    for (const Vec3& p : m.vertices) {
      for (int axis = 0; axis < 3; ++axis) {
        lo[axis] = std::min(lo[axis], p[axis]);
        hi[axis] = std::max(hi[axis], p[axis]);
      }
    }
  };
  extend(a);
  extend(b);
  Vec3 extent = hi - lo;
  double margin = 0.15 * std::max({extent.x, extent.y, extent.z, 1e-6});
  lo -= Vec3{margin, margin, margin};
  hi += Vec3{margin, margin, margin};
  Vec3 spacing{(hi.x - lo.x) / std::max(dims[0] - 1, 1),
               (hi.y - lo.y) / std::max(dims[1] - 1, 1),
               (hi.z - lo.z) / std::max(dims[2] - 1, 1)};
  return zero_field(dims, lo, spacing);
}

}  // namespace

VelocityField loss_gradient(const VelocityField& field, const TriangleMesh& source,
                            const TriangleMesh& target, const EdgeLossSpec& spec,
                            const LossWeights& weights, const IntegrationConfig& integration,
                            double smoothness_weight, LossReport* report,
                            double* smoothness_penalty, int threads) {
  if (source.vertices.empty() || target.vertices.empty()) {
    throw Error(ErrorCategory::validation, "fit requires non-empty source and target meshes");
  }
  const int n_vertices = source.vertex_count();
  const int steps = integration.step_count;
  const double h = integration.time_horizon / steps;
  const bool euler = integration.method == IntegrationConfig::Method::euler;

  // Forward pass: integrate all vertices, keeping each vertex's sample
  // positions so the adjoint can re-evaluate the stencils.
  const int samples_per_step = euler ? 1 : 4;
  std::vector<Vec3> tape(static_cast<std::size_t>(n_vertices) * steps * samples_per_step);
  std::vector<Vec3> deformed(n_vertices);

  auto tape_at = [&](int vertex, int step, int slot) -> Vec3& {
    return tape[(static_cast<std::size_t>(vertex) * steps + step) * samples_per_step + slot];
  };

  parallel_for(n_vertices, threads, [&](std::int64_t begin, std::int64_t end, int) {
    for (std::int64_t v = begin; v < end; ++v) {
      Vec3 x = source.vertices[v];
      for (int s = 0; s < steps; ++s) {
        if (euler) {
          tape_at(v, s, 0) = x;
          x += h * sample(field, x);
        } else {
          Vec3 a1 = x;
          Vec3 k1 = sample(field, a1);
          Vec3 a2 = x + (h * 0.5) * k1;
          Vec3 k2 = sample(field, a2);
          Vec3 a3 = x + (h * 0.5) * k2;
          Vec3 k3 = sample(field, a3);
          Vec3 a4 = x + h * k3;
          Vec3 k4 = sample(field, a4);
          tape_at(v, s, 0) = a1;
          tape_at(v, s, 1) = a2;
          tape_at(v, s, 2) = a3;
          tape_at(v, s, 3) = a4;
          x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
      deformed[v] = x;
    }
  });
  for (int v = 0; v < n_vertices; ++v) {
    if (!finite(deformed[v])) {
      throw Error(ErrorCategory::integration,
                  "non-finite deformed vertex " + std::to_string(v));
    }
  }

  // Losses and their adjoints with respect to the deformed vertices.
  // Chamfer nearest assignments are held fixed (standard subgradient).
  PointKdTree target_tree(target.vertices);
  PointKdTree deformed_tree(deformed);

  std::vector<Vec3> vertex_adjoint(n_vertices);
  double chamfer = 0.0;
  const double inv_p = 1.0 / static_cast<double>(n_vertices);
  const double inv_q = 1.0 / static_cast<double>(target.vertices.size());
  for (int v = 0; v < n_vertices; ++v) {
    auto hit = target_tree.nearest(deformed[v]);
    chamfer += hit.distance2 * inv_p;
    vertex_adjoint[v] += (2.0 * inv_p) * (deformed[v] - target.vertices[hit.index]);
  }
  for (const Vec3& q : target.vertices) {
    auto hit = deformed_tree.nearest(q);
    chamfer += hit.distance2 * inv_q;
    vertex_adjoint[hit.index] += (2.0 * inv_q) * (deformed[hit.index] - q);
  }

  const double mu = spec.target_edge_length;
  if (!(mu > 0.0)) {
    throw Error(ErrorCategory::validation, "target edge length must be positive");
  }
  auto neighbors = vertex_neighbors(source);
  double edge = 0.0;
  for (int i = 0; i < n_vertices; ++i) {
    if (neighbors[i].empty()) {
      throw Error(ErrorCategory::validation,
                  "vertex " + std::to_string(i) + " has no neighbors");
    }
    const double w = inv_p / static_cast<double>(neighbors[i].size());
    for (int j : neighbors[i]) {
      Vec3 e = deformed[i] - deformed[j];
      double d = norm(e);
      double r = mu - d;
      edge += w * r * r;
      if (d > 1e-150) {
        Vec3 g = (weights.lambda1 * w * 2.0 * r / d) * e;  // d(residual^2)/d(p_i)
        vertex_adjoint[i] -= g;
        vertex_adjoint[j] += g;
      }
    }
  }
  // Adjoint sweep through the integrator, one vertex at a time, into
  // per-chunk node-gradient buffers merged in chunk order.
  const std::size_t n_nodes = field.data.size();
  int max_chunks = threads < 1 ? 1 : threads;
  std::vector<std::vector<Vec3>> chunk_gradients(max_chunks);

  parallel_for(n_vertices, threads, [&](std::int64_t begin, std::int64_t end, int chunk) {
    std::vector<Vec3>& node_gradient = chunk_gradients[chunk];
    node_gradient.assign(n_nodes, Vec3{});
    for (std::int64_t v = begin; v < end; ++v) {
      Vec3 gbar = vertex_adjoint[v];
      for (int s = steps - 1; s >= 0; --s) {
        if (euler) {
          // x' = x + h*V(x)
          Vec3 abar = sample_adjoint(field, tape_at(v, s, 0), h * gbar, node_gradient);
          gbar += abar;
        } else {
          Vec3 a1 = tape_at(v, s, 0);
          Vec3 a2 = tape_at(v, s, 1);
          Vec3 a3 = tape_at(v, s, 2);
          Vec3 a4 = tape_at(v, s, 3);
          Vec3 k1bar = (h / 6.0) * gbar;
          Vec3 k2bar = (h / 3.0) * gbar;
          Vec3 k3bar = (h / 3.0) * gbar;
          Vec3 k4bar = (h / 6.0) * gbar;
          Vec3 xbar = gbar;

          Vec3 a4bar = sample_adjoint(field, a4, k4bar, node_gradient);
          xbar += a4bar;
          k3bar += h * a4bar;

          Vec3 a3bar = sample_adjoint(field, a3, k3bar, node_gradient);
          xbar += a3bar;
          k2bar += (h * 0.5) * a3bar;

          Vec3 a2bar = sample_adjoint(field, a2, k2bar, node_gradient);
          xbar += a2bar;
          k1bar += (h * 0.5) * a2bar;

          Vec3 a1bar = sample_adjoint(field, a1, k1bar, node_gradient);
          xbar += a1bar;

          gbar = xbar;
        }
      }
    }
  });

  VelocityField gradient = field;
  gradient.data.assign(n_nodes, Vec3{});
  for (auto& buffer : chunk_gradients) {
    if (buffer.empty()) continue;
    for (std::size_t n = 0; n < n_nodes; ++n) gradient.data[n] += buffer[n];
  }

  // Smoothness penalty: (1/n) * sum ||(L V)_n||^2, gradient (2/n) * L(L V).
  double penalty = 0.0;
  if (smoothness_weight > 0.0) {
    std::vector<Vec3> lap = apply_grid_laplacian(field, field.data);
    for (const Vec3& l : lap) penalty += norm2(l);
    penalty /= static_cast<double>(n_nodes);
    std::vector<Vec3> lap2 = apply_grid_laplacian(field, lap);
    double scale = smoothness_weight * 2.0 / static_cast<double>(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) gradient.data[n] += scale * lap2[n];
  }

  for (std::size_t n = 0; n < n_nodes; ++n) {
    if (!finite(gradient.data[n])) {
      throw Error(ErrorCategory::validation,
                  "non-finite gradient at node " + std::to_string(n));
    }
  }

  if (report) {
    *report = total_loss(chamfer, edge, 0.0, weights);
  }
  if (smoothness_penalty) {
    *smoothness_penalty = penalty;
  }
  return gradient;
}

StageResult fit_stage(const TriangleMesh& source, const TriangleMesh& target,
                      const StagePlan& plan, const FitConfig& config, const std::string& label,
                      const StageObserver& observer) {
  if (plan.iterations < 1) {
    throw Error(ErrorCategory::validation, "stage iteration budget must be >= 1");
  }
  double lr = plan.step_size > 0.0 ? plan.step_size : config.base_step_size;
  if (!(lr > 0.0)) {
    throw Error(ErrorCategory::validation, "step size must be positive");
  }

  EdgeLossSpec spec = EdgeLossSpec::adaptive(surface_area(target), source.face_count());

  StageResult result;
  result.field = grid_for_meshes(source, target, plan.grid_dims);
  AdamState adam(result.field.data.size());

  VelocityField best_field = result.field;
  double best_objective = std::numeric_limits<double>::infinity();
  std::vector<double> objective_history;
  double initial_total = 0.0;

  for (int iter = 0; iter < plan.iterations; ++iter) {
    LossReport report;
    double penalty = 0.0;
    VelocityField gradient =
        loss_gradient(result.field, source, target, spec, config.weights, config.integration,
                      config.smoothness_weight, &report, &penalty, config.threads);
    double objective = report.total + config.smoothness_weight * penalty;

    result.history.push_back(report);
    objective_history.push_back(objective);
    if (observer) observer(label, iter, result.field, report);

    if (iter == 0) initial_total = report.total;
    if (objective < best_objective) {
      best_objective = objective;
      best_field = result.field;
    }
    if (report.total > config.divergence_factor * initial_total && iter > 0) {
      result.diverged = true;
      break;
    }
    if (iter >= config.early_stop_window) {
      double then = objective_history[iter - config.early_stop_window];
      double improvement = (then - best_objective) / std::max(std::abs(then), 1e-30);
      if (improvement < config.early_stop_rel_improvement) break;
    }

    adam.update(result.field.data, gradient.data, lr);
  }

  result.field = best_field;
  result.mesh = deform_mesh(source, result.field, config.integration, config.threads);
  return result;
}

FitResult fit_recurrent(const TriangleMesh& template_mesh, const TriangleMesh& white_target,
                        const TriangleMesh& pial_target, const FitConfig& config,
                        const StageObserver& observer) {
  FitResult result;
  result.pipeline.template_mesh = template_mesh;

  struct StageSpec {
    const TriangleMesh* target;
    const StagePlan* plan;
    std::string label;
  };
  std::vector<StageSpec> stages;
  for (std::size_t i = 0; i < config.white_plan.size(); ++i) {
    stages.push_back({&white_target, &config.white_plan[i], "white-" + std::to_string(i + 1)});
  }
  for (std::size_t i = 0; i < config.pial_plan.size(); ++i) {
    stages.push_back({&pial_target, &config.pial_plan[i], "pial-" + std::to_string(i + 1)});
  }
  if (stages.empty()) {
    throw Error(ErrorCategory::validation, "fit needs at least one stage");
  }

  const TriangleMesh* current = &template_mesh;
  for (const StageSpec& stage : stages) {
    StageResult stage_result = fit_stage(*current, *stage.target, *stage.plan, config,
                                         stage.label, observer);
    result.pipeline.stages.push_back(std::move(stage_result.field));
    result.pipeline.outputs.push_back(std::move(stage_result.mesh));
    result.pipeline.stage_labels.push_back(stage.label);
    result.loss_history.push_back(std::move(stage_result.history));
    current = &result.pipeline.outputs.back();

    if (stage_result.diverged) {
      result.failed = true;
      result.failure_message = "stage " + stage.label + " diverged";
      break;
    }
  }

  // Accumulated prefix fields are only defined when every stage shares one
  // grid geometry (coarse-to-fine plans leave this empty).
  bool same_geometry = true;
  for (std::size_t i = 1; i < result.pipeline.stages.size(); ++i) {
    if (!result.pipeline.stages[i].same_geometry(result.pipeline.stages[0])) {
      same_geometry = false;
      break;
    }
  }
  if (same_geometry && !result.pipeline.stages.empty()) {
    std::vector<VelocityField> prefix;
    for (const VelocityField& f : result.pipeline.stages) {
      prefix.push_back(f);
      result.pipeline.accumulated.push_back(accumulate(prefix));
    }
  }

  for (std::size_t i = 0; i < result.pipeline.outputs.size(); ++i) {
    result.final_metrics.push_back(
        compare_surfaces(result.pipeline.outputs[i], *stages[i].target));
  }
  return result;
}

}  // namespace meshflow
