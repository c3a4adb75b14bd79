#pragma once

#include <vector>

#include "meshflow/mesh.hpp"
#include "meshflow/voxel.hpp"

namespace meshflow {

struct LossWeights {
  double lambda1 = 1.0;   // edge-length loss weight
  double lambda2 = 1e-3;  // segmentation loss weight
};

// Target edge length for the edge-length loss. `adaptive` derives the target
// from a ground-truth area and template face count.
struct EdgeLossSpec {
  double target_edge_length = 0.0;  // mm

  static EdgeLossSpec fixed(double mu);
  static EdgeLossSpec adaptive(double ground_truth_area, std::int64_t template_face_count);
};

struct LossReport {
  double chamfer = 0.0;       // mm^2
  double edge = 0.0;          // mm^2
  double segmentation = 0.0;  // dimensionless
  double total = 0.0;
};

struct SegmentationLoss {
  double cross_entropy = 0.0;
  double dice = 0.0;  // mean (1 - soft Dice) over foreground classes
  double total = 0.0;
};

// Symmetric mean squared vertex-to-vertex nearest-neighbor distance.
// Ties resolve to the lowest vertex index.
double chamfer_loss(const std::vector<Vec3>& p, const std::vector<Vec3>& q);
double chamfer_loss(const TriangleMesh& p, const TriangleMesh& q);

// Side length of an equilateral triangle of area S/N: mu = 2*sqrt(S/(sqrt(3)*N)).
double adaptive_target_edge(double ground_truth_area, std::int64_t template_face_count);

// Mean over vertices of the mean over their neighbors of
// (mu - |p - k|)^2, neighbors taken from the undirected edge adjacency.
double edge_length_loss(const TriangleMesh& mesh, const EdgeLossSpec& spec);

// Mean voxel cross-entropy plus mean soft-Dice loss over foreground classes.
// Probabilities are clamped at 1e-7 inside the log; Dice smoothing 1e-6.
SegmentationLoss segmentation_loss(const VoxelGrid& prediction, const VoxelGrid& truth,
                                   double ce_weight = 1.0, double dice_weight = 1.0);

LossReport total_loss(double chamfer, double edge, double segmentation,
                      const LossWeights& weights);

}  // namespace meshflow
