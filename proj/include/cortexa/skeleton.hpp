#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cortexa/distance.hpp"
#include "cortexa/volume.hpp"

namespace cortexa {

struct SkeletonPoint {
  std::int64_t index = 0;
  float radius_mm = 0.0f;
};

/// Centres of maximal balls, sorted by linear index.
struct Skeleton {
  Grid grid;
  std::vector<SkeletonPoint> points;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Relative slack used when comparing float radii in the containment test.
inline constexpr double kBallContainmentRelTol = 1e-6;

/// True when the ball of radius `inner` is inside the ball of radius `outer`
/// whose centre lies `separation_mm` away: outer >= inner + separation.
bool ball_contained(double inner, double outer, double separation_mm);

/// Medial axis as centres of maximal balls.
///
/// A foreground voxel v is dropped iff some 26-neighbour foreground voxel u
/// satisfies r(u) >= r(v) + |u - v| (physical), i.e. v's inscribed ball lies
/// inside u's. The rule is local, so the result does not depend on traversal
/// order. No pruning is applied.
Skeleton skeletonize(const BinaryMask& mask, const DistanceMap& dm);

/// Same rule, evaluated only for the voxels listed in `region`. Neighbours
/// outside the region still take part in the containment test.
Skeleton skeletonize(const BinaryMask& mask, const DistanceMap& dm, std::span<const std::int64_t> region);

struct InscribedSphere {
  std::int64_t center = 0;
  Vec3 center_mm = Vec3::Zero();
  double radius_mm = 0.0;
};

/// Largest skeleton ball whose centre lies in `region`. Ties go to the
/// smallest linear index. Throws when the region is empty or holds no
/// skeleton voxel.
InscribedSphere max_inscribed_sphere(const Skeleton& skeleton, std::span<const std::int64_t> region);

}  // namespace cortexa
