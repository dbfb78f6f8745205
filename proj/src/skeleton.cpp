#include "cortexa/skeleton.hpp"

#include <algorithm>

#include "cortexa/components.hpp"

namespace cortexa {
namespace {

struct WeightedOffset {
  Index3 step;
  double mm;
};

std::vector<WeightedOffset> weighted_neighbors(const Grid& grid) {
  std::vector<WeightedOffset> out;
  for (const auto& o : neighbor_offsets(Connectivity::k26)) {
    const Vec3 d(o[0] * grid.spacing()[0], o[1] * grid.spacing()[1], o[2] * grid.spacing()[2]);
    out.push_back({o, d.norm()});
  }
  return out;
}

bool is_maximal(const BinaryMask& mask, const DistanceMap& dm,
                const std::vector<WeightedOffset>& neighbors, std::int64_t idx) {
  const Grid& grid = mask.grid();
  const Index3 v = grid.unravel(idx);
  const double rv = dm[idx];
  for (const auto& n : neighbors) {
    const Index3 u{v[0] + n.step[0], v[1] + n.step[1], v[2] + n.step[2]};
    if (!grid.contains(u)) continue;
    const auto ui = grid.linear(u);
    if (!mask[ui]) continue;
    if (ball_contained(rv, dm[ui], n.mm)) return false;
  }
  return true;
}

void check_inputs(const BinaryMask& mask, const DistanceMap& dm) {
  if (!mask.grid().same_geometry(dm.grid) || dm.mm.size() != static_cast<std::size_t>(mask.size())) {
    throw Error("distance map does not match the mask geometry");
  }
}

}  // namespace

bool ball_contained(double inner, double outer, double separation_mm) {
  const double slack = kBallContainmentRelTol * (outer + separation_mm);
  return outer >= inner + separation_mm - slack;
}

Skeleton skeletonize(const BinaryMask& mask, const DistanceMap& dm) {
  check_inputs(mask, dm);
  const auto neighbors = weighted_neighbors(mask.grid());
  Skeleton sk;
  sk.grid = mask.grid();
  for (std::int64_t i = 0; i < mask.size(); ++i) {
    if (mask[i] && is_maximal(mask, dm, neighbors, i)) sk.points.push_back({i, dm[i]});
  }
  return sk;
}

Skeleton skeletonize(const BinaryMask& mask, const DistanceMap& dm, std::span<const std::int64_t> region) {
  check_inputs(mask, dm);
  const auto neighbors = weighted_neighbors(mask.grid());
  std::vector<std::int64_t> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Skeleton sk;
  sk.grid = mask.grid();
  for (const auto i : sorted) {
    if (i < 0 || i >= mask.size()) throw Error("region index outside the volume");
    if (mask[i] && is_maximal(mask, dm, neighbors, i)) sk.points.push_back({i, dm[i]});
  }
  return sk;
}

InscribedSphere max_inscribed_sphere(const Skeleton& skeleton, std::span<const std::int64_t> region) {
  if (region.empty()) throw Error("inscribed sphere: region is empty");
  std::vector<std::int64_t> sorted(region.begin(), region.end());
  std::sort(sorted.begin(), sorted.end());

  const SkeletonPoint* best = nullptr;
  for (const auto& p : skeleton.points) {
    if (!std::binary_search(sorted.begin(), sorted.end(), p.index)) continue;
    if (best == nullptr || p.radius_mm > best->radius_mm) best = &p;
  }
  if (best == nullptr) throw Error("inscribed sphere: no skeleton voxel inside the region");
  InscribedSphere out;
  out.center = best->index;
  out.center_mm = skeleton.grid.voxel_to_phys(skeleton.grid.unravel(best->index));
  out.radius_mm = best->radius_mm;
  return out;
}

}  // namespace cortexa
