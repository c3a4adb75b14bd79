#include "meshflow/voxel.hpp"

#include "meshflow/errors.hpp"

namespace meshflow {

namespace {

void check_dims(std::array<int, 3> dims) {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) {
    throw Error(ErrorCategory::validation, "voxel grid dims must be positive");
  }
}

}  // namespace

VoxelGrid VoxelGrid::make_probabilities(std::array<int, 3> dims, int channels) {
  check_dims(dims);
  if (channels < 1) {
    throw Error(ErrorCategory::validation, "channel count must be positive");
  }
  VoxelGrid grid;
  grid.dims = dims;
  grid.kind = Kind::probabilities;
  grid.channels = channels;
  grid.probabilities.assign(static_cast<std::size_t>(grid.voxel_count()) * channels, 0.0);
  return grid;
}

VoxelGrid VoxelGrid::make_labels(std::array<int, 3> dims) {
  check_dims(dims);
  VoxelGrid grid;
  grid.dims = dims;
  grid.kind = Kind::labels;
  grid.channels = 1;
  grid.labels.assign(static_cast<std::size_t>(grid.voxel_count()), 0);
  return grid;
}

}  // namespace meshflow
