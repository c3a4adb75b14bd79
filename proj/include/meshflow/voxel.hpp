#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "meshflow/vec3.hpp"

namespace meshflow {

// Scalar volume: either per-voxel class probabilities (channels >= 1) or a
// single integer label per voxel.
struct VoxelGrid {
  enum class Kind { probabilities, labels };

  std::array<int, 3> dims{0, 0, 0};
  Vec3 origin{};
  Vec3 spacing{1.0, 1.0, 1.0};
  Kind kind = Kind::labels;
  int channels = 1;

  std::vector<double> probabilities;  // voxel-major, channel-minor; empty for labels
  std::vector<std::int32_t> labels;   // empty for probabilities

  std::int64_t voxel_count() const {
    return static_cast<std::int64_t>(dims[0]) * dims[1] * dims[2];
  }
  double prob(std::int64_t voxel, int channel) const {
    return probabilities[voxel * channels + channel];
  }

  static VoxelGrid make_probabilities(std::array<int, 3> dims, int channels);
  static VoxelGrid make_labels(std::array<int, 3> dims);
};

}  // namespace meshflow
