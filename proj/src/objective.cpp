#include "meshflow/objective.hpp"

#include <cmath>
#include <string>

#include "meshflow/errors.hpp"
#include "meshflow/kdtree.hpp"

namespace meshflow {

namespace {

constexpr double kLogClamp = 1e-7;
constexpr double kDiceSmoothing = 1e-6;

void check_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorCategory::validation, std::string(name) + " is not finite");
  }
}

}  // namespace

EdgeLossSpec EdgeLossSpec::fixed(double mu) {
  if (!(mu > 0.0)) {
    throw Error(ErrorCategory::validation, "target edge length must be positive");
  }
  return {mu};
}

EdgeLossSpec EdgeLossSpec::adaptive(double ground_truth_area, std::int64_t template_face_count) {
  return {adaptive_target_edge(ground_truth_area, template_face_count)};
}

double chamfer_loss(const std::vector<Vec3>& p, const std::vector<Vec3>& q) {
  if (p.empty() || q.empty()) {
    throw Error(ErrorCategory::validation, "chamfer loss requires non-empty point sets");
  }
  PointKdTree p_tree(p);
  PointKdTree q_tree(q);

  double sum_pq = 0.0;
  for (const Vec3& point : p) sum_pq += q_tree.nearest(point).distance2;
  double sum_qp = 0.0;
  for (const Vec3& point : q) sum_qp += p_tree.nearest(point).distance2;

  return sum_pq / static_cast<double>(p.size()) + sum_qp / static_cast<double>(q.size());
}

double chamfer_loss(const TriangleMesh& p, const TriangleMesh& q) {
  return chamfer_loss(p.vertices, q.vertices);
}

double adaptive_target_edge(double ground_truth_area, std::int64_t template_face_count) {
  if (!(ground_truth_area > 0.0)) {
    throw Error(ErrorCategory::validation, "ground-truth area must be positive");
  }
  if (template_face_count <= 0) {
    throw Error(ErrorCategory::validation, "template face count must be positive");
  }
  return 2.0 * std::sqrt(ground_truth_area /
                         (std::sqrt(3.0) * static_cast<double>(template_face_count)));
}

double edge_length_loss(const TriangleMesh& mesh, const EdgeLossSpec& spec) {
  if (!(spec.target_edge_length > 0.0)) {
    throw Error(ErrorCategory::validation, "target edge length must be positive");
  }
  if (mesh.vertices.empty()) {
    throw Error(ErrorCategory::validation, "edge loss requires a non-empty mesh");
  }
  const double mu = spec.target_edge_length;
  auto neighbors = vertex_neighbors(mesh);

  double vertex_sum = 0.0;
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    if (neighbors[i].empty()) {
      throw Error(ErrorCategory::validation,
                  "vertex " + std::to_string(i) + " has no neighbors");
    }
    double neighbor_sum = 0.0;
    for (int j : neighbors[i]) {
      double d = mu - distance(mesh.vertices[i], mesh.vertices[j]);
      neighbor_sum += d * d;
    }
    vertex_sum += neighbor_sum / static_cast<double>(neighbors[i].size());
  }
  return vertex_sum / static_cast<double>(mesh.vertex_count());
}

SegmentationLoss segmentation_loss(const VoxelGrid& prediction, const VoxelGrid& truth,
                                   double ce_weight, double dice_weight) {
  if (prediction.kind != VoxelGrid::Kind::probabilities) {
    throw Error(ErrorCategory::validation, "prediction grid must hold probabilities");
  }
  if (truth.kind != VoxelGrid::Kind::labels) {
    throw Error(ErrorCategory::validation, "truth grid must hold labels");
  }
  if (prediction.dims != truth.dims) {
    throw Error(ErrorCategory::validation, "prediction/truth dims mismatch");
  }
  const std::int64_t voxels = prediction.voxel_count();
  if (voxels == 0) {
    throw Error(ErrorCategory::validation, "empty voxel grids");
  }
  const int channels = prediction.channels;

  for (std::int64_t v = 0; v < voxels; ++v) {
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) {
      double p = prediction.prob(v, c);
      if (p < -1e-9 || p > 1.0 + 1e-9) {
        throw Error(ErrorCategory::validation,
                    "probability out of [0,1] at voxel " + std::to_string(v));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-5) {
      throw Error(ErrorCategory::validation,
                  "probabilities at voxel " + std::to_string(v) + " sum to " +
                      std::to_string(sum));
    }
    std::int32_t label = truth.labels[v];
    if (label < 0 || label >= channels) {
      throw Error(ErrorCategory::validation,
                  "label " + std::to_string(label) + " at voxel " + std::to_string(v) +
                      " outside channel range [0, " + std::to_string(channels) + ")");
    }
  }

  double ce = 0.0;
  for (std::int64_t v = 0; v < voxels; ++v) {
    ce -= std::log(std::max(prediction.prob(v, truth.labels[v]), kLogClamp));
  }
  ce /= static_cast<double>(voxels);

  // Soft Dice per foreground class (labels >= 1); background is class 0.
  double dice_sum = 0.0;
  int foreground = 0;
  for (int c = 1; c < channels; ++c) {
    double intersection = 0.0, pred_sum = 0.0, truth_sum = 0.0;
    for (std::int64_t v = 0; v < voxels; ++v) {
      double p = prediction.prob(v, c);
      double t = truth.labels[v] == c ? 1.0 : 0.0;
      intersection += p * t;
      pred_sum += p;
      truth_sum += t;
    }
    double dice = (2.0 * intersection + kDiceSmoothing) / (pred_sum + truth_sum + kDiceSmoothing);
    dice_sum += 1.0 - dice;
    ++foreground;
  }

  SegmentationLoss loss;
  loss.cross_entropy = ce;
  loss.dice = foreground > 0 ? dice_sum / foreground : 0.0;
  loss.total = ce_weight * loss.cross_entropy + dice_weight * loss.dice;
  return loss;
}

LossReport total_loss(double chamfer, double edge, double segmentation,
                      const LossWeights& weights) {
  check_finite(chamfer, "chamfer loss");
  check_finite(edge, "edge loss");
  check_finite(segmentation, "segmentation loss");
  if (!(weights.lambda1 >= 0.0) || !(weights.lambda2 >= 0.0)) {
    throw Error(ErrorCategory::validation, "loss weights must be non-negative");
  }
  LossReport report;
  report.chamfer = chamfer;
  report.edge = edge;
  report.segmentation = segmentation;
  report.total = chamfer + weights.lambda1 * edge + weights.lambda2 * segmentation;
  return report;
}

}  // namespace meshflow
