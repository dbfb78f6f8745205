#pragma once

#include <cstdint>
#include <vector>

#include "cortexa/volume.hpp"

namespace cortexa {

/// Per-voxel Euclidean distance (mm) from each voxel centre to the nearest
/// background voxel centre. Zero on background.
struct DistanceMap {
  Grid grid;
  std::vector<float> mm;

  float operator[](std::int64_t idx) const { return mm[static_cast<std::size_t>(idx)]; }
  Volume to_volume() const;
};

/// Linear index of one nearest background voxel for every voxel.
struct FeatureMap {
  Grid grid;
  std::vector<std::int64_t> nearest;

  std::int64_t operator[](std::int64_t idx) const { return nearest[static_cast<std::size_t>(idx)]; }
};

struct DistanceTransform {
  DistanceMap distance;
  FeatureMap feature;
};

/// Exact Euclidean distance and feature transform.
///
/// Three separable lower-envelope-of-parabolas passes (x, then y, then z),
/// each weighted by that axis' spacing, so anisotropic voxels are handled
/// exactly. Distances are measured in the sampling grid, i.e. the affine's
/// columns are assumed orthogonal. Throws when the mask has no background.
DistanceTransform distance_transform(const BinaryMask& mask);

}  // namespace cortexa
