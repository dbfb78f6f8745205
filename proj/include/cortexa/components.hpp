#pragma once

#include <cstdint>
#include <vector>

#include "cortexa/volume.hpp"

namespace cortexa {

enum class Connectivity : int { k6 = 6, k18 = 18, k26 = 26 };

Connectivity connectivity_from_int(int n);

/// Neighbour offsets (excluding the centre) for a connectivity.
std::vector<Index3> neighbor_offsets(Connectivity c);

struct ComponentLabels {
  /// 0 = background, 1..K ordered by decreasing size.
  Volume labels;
  /// sizes[k-1] is the voxel count of label k.
  std::vector<std::int64_t> sizes;

  std::size_t count() const { return sizes.size(); }
};

/// Labels foreground components. Equal sizes are ordered by their smallest
/// linear voxel index, so the labelling is fully deterministic.
ComponentLabels connected_components(const BinaryMask& mask, Connectivity connectivity);

/// Mask of the largest component (empty input gives an empty mask).
BinaryMask largest_component(const BinaryMask& mask, Connectivity connectivity);

}  // namespace cortexa
