#include "cortexa/components.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include <fmt/format.h>

namespace cortexa {

Connectivity connectivity_from_int(int n) {
  switch (n) {
    case 6: return Connectivity::k6;
    case 18: return Connectivity::k18;
    case 26: return Connectivity::k26;
    default: throw Error(fmt::format("connectivity must be 6, 18 or 26 (got {})", n));
  }
}

std::vector<Index3> neighbor_offsets(Connectivity c) {
  std::vector<Index3> out;
  for (std::int64_t dz = -1; dz <= 1; ++dz) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (c == Connectivity::k6 && manhattan > 1) continue;
        if (c == Connectivity::k18 && manhattan > 2) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

ComponentLabels connected_components(const BinaryMask& mask, Connectivity connectivity) {
  const Grid& grid = mask.grid();
  const auto offsets = neighbor_offsets(connectivity);
  const auto n = static_cast<std::size_t>(grid.size());

  // Provisional labels in order of first (= smallest) voxel index.
  std::vector<std::int32_t> provisional(n, 0);
  std::vector<std::int64_t> sizes;
  std::vector<std::int64_t> stack;
  for (std::int64_t seed = 0; seed < grid.size(); ++seed) {
    if (!mask[seed] || provisional[static_cast<std::size_t>(seed)] != 0) continue;
    const auto label = static_cast<std::int32_t>(sizes.size() + 1);
    std::int64_t size = 0;
    stack.push_back(seed);
    provisional[static_cast<std::size_t>(seed)] = label;
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      ++size;
      const Index3 v = grid.unravel(cur);
      for (const auto& o : offsets) {
        const Index3 u{v[0] + o[0], v[1] + o[1], v[2] + o[2]};
        if (!grid.contains(u)) continue;
        const auto ui = grid.linear(u);
        if (!mask[ui] || provisional[static_cast<std::size_t>(ui)] != 0) continue;
        provisional[static_cast<std::size_t>(ui)] = label;
        stack.push_back(ui);
      }
    }
    sizes.push_back(size);
  }

  // Stable sort keeps the smallest-index order among equal sizes.
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
  std::vector<std::int32_t> remap(sizes.size() + 1, 0);
  ComponentLabels out;
  out.sizes.reserve(sizes.size());
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    remap[order[rank] + 1] = static_cast<std::int32_t>(rank + 1);
    out.sizes.push_back(sizes[order[rank]]);
  }

  std::vector<float> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<float>(remap[static_cast<std::size_t>(provisional[i])]);
  const DataType dtype = sizes.size() <= 32767 ? DataType::kInt16 : DataType::kFloat32;
  out.labels = Volume(grid, dtype, std::move(labels));
  return out;
}

BinaryMask largest_component(const BinaryMask& mask, Connectivity connectivity) {
  const auto cc = connected_components(mask, connectivity);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(mask.size()), 0);
  if (cc.count() > 0) {
    const auto labels = cc.labels.voxels();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = labels[i] == 1.0f ? 1 : 0;
  }
  return BinaryMask(mask.grid(), std::move(bits));
}

}  // namespace cortexa
