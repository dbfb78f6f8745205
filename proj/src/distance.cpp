#include "cortexa/distance.hpp"

#include <cmath>
#include <limits>

namespace cortexa {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Working buffers for one 1D lower-envelope pass, reused across lines.
struct LineScratch {
  std::vector<double> f;
  std::vector<std::int64_t> feat;
  std::vector<std::int64_t> hull;
  std::vector<double> bounds;

  explicit LineScratch(std::int64_t n)
      : f(static_cast<std::size_t>(n)),
        feat(static_cast<std::size_t>(n)),
        hull(static_cast<std::size_t>(n)),
        bounds(static_cast<std::size_t>(n) + 1) {}
};

// Squared distance transform of one line in place. `sq` and `nearest` are
// strided views into the volume-wide buffers.
void envelope_pass(double* sq, std::int64_t* nearest, std::int64_t n, std::int64_t stride,
                   double spacing, LineScratch& s) {
  for (std::int64_t q = 0; q < n; ++q) {
    s.f[q] = sq[q * stride];
    s.feat[q] = nearest[q * stride];
  }
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    if (s.f[q] == kInf) continue;
    const double xq = static_cast<double>(q) * spacing;
    double cross = -kInf;
    while (k >= 0) {
      const double xv = static_cast<double>(s.hull[k]) * spacing;
      cross = ((s.f[q] + xq * xq) - (s.f[s.hull[k]] + xv * xv)) / (2.0 * (xq - xv));
      if (cross <= s.bounds[k]) {
        --k;
        cross = -kInf;
      } else {
        break;
      }
    }
    ++k;
    s.hull[k] = q;
    s.bounds[k] = cross;
    s.bounds[k + 1] = kInf;
  }
  if (k < 0) return;  // no finite values on this line

  std::int64_t j = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    const double xq = static_cast<double>(q) * spacing;
    while (s.bounds[j + 1] < xq) ++j;
    const std::int64_t v = s.hull[j];
    const double dx = xq - static_cast<double>(v) * spacing;
    sq[q * stride] = dx * dx + s.f[v];
    nearest[q * stride] = s.feat[v];
  }
}

}  // namespace

Volume DistanceMap::to_volume() const {
  return Volume(grid, DataType::kFloat32, mm);
}

DistanceTransform distance_transform(const BinaryMask& mask) {
  const Grid& grid = mask.grid();
  const auto& d = grid.dims();
  const auto n = static_cast<std::size_t>(grid.size());

  std::vector<double> sq(n);
  std::vector<std::int64_t> nearest(n, -1);
  bool any_background = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[static_cast<std::int64_t>(i)]) {
      sq[i] = kInf;
    } else {
      sq[i] = 0.0;
      nearest[i] = static_cast<std::int64_t>(i);
      any_background = true;
    }
  }
  if (!any_background) throw Error("distance transform undefined: mask has no background voxel");

  const Vec3& sp = grid.spacing();
  {
    LineScratch s(d[0]);
    for (std::int64_t k = 0; k < d[2]; ++k) {
      for (std::int64_t j = 0; j < d[1]; ++j) {
        const auto base = grid.linear(0, j, k);
        envelope_pass(&sq[base], &nearest[base], d[0], 1, sp[0], s);
      }
    }
  }
  {
    LineScratch s(d[1]);
    for (std::int64_t k = 0; k < d[2]; ++k) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const auto base = grid.linear(i, 0, k);
        envelope_pass(&sq[base], &nearest[base], d[1], d[0], sp[1], s);
      }
    }
  }
  {
    LineScratch s(d[2]);
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        const auto base = grid.linear(i, j, 0);
        envelope_pass(&sq[base], &nearest[base], d[2], d[0] * d[1], sp[2], s);
      }
    }
  }

  DistanceTransform out;
  out.distance.grid = grid;
  out.distance.mm.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.distance.mm[i] = static_cast<float>(std::sqrt(sq[i]));
  out.feature.grid = grid;
  out.feature.nearest = std::move(nearest);
  return out;
}

}  // namespace cortexa
