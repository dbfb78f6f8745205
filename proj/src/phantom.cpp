#include "cortexa/phantom.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <fmt/format.h>

namespace cortexa {
namespace {

double bounding_radius(const PhantomSpec& s) {
  switch (s.kind) {
    case PhantomKind::kHollowSphere:
    case PhantomKind::kSolidBall: return s.radius_mm;
    case PhantomKind::kSlab: return s.extent_mm > 0 ? std::hypot(s.extent_mm, s.thickness_mm / 2) : s.thickness_mm / 2;
    case PhantomKind::kFoldedSheet: {
      const double h = s.amplitude_mm + s.thickness_mm / 2;
      return s.extent_mm > 0 ? std::hypot(s.extent_mm, h) : h;
    }
  }
  return 0.0;
}

bool inside(const PhantomSpec& s, const Vec3& q) {
  const double half = s.thickness_mm / 2;
  const bool lateral_ok = s.extent_mm <= 0 || std::hypot(q.x(), q.y()) <= s.extent_mm;
  switch (s.kind) {
    case PhantomKind::kSlab: return lateral_ok && std::abs(q.z()) <= half;
    case PhantomKind::kHollowSphere: {
      const double r = q.norm();
      return r >= s.radius_mm - s.thickness_mm && r <= s.radius_mm;
    }
    case PhantomKind::kFoldedSheet: {
      const double mid = s.amplitude_mm * std::sin(2 * std::numbers::pi * q.x() / s.period_mm);
      return lateral_ok && std::abs(q.z() - mid) <= half;
    }
    case PhantomKind::kSolidBall: return q.norm() <= s.radius_mm;
  }
  return false;
}

// Evenly spread unit vectors (Fibonacci lattice).
Vec3 sphere_direction(int k, int n) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double z = 1.0 - 2.0 * (k + 0.5) / n;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(golden * k), r * std::sin(golden * k), z};
}

// Landmarks in the shape's local frame.
std::vector<Vec3> local_landmarks(const PhantomSpec& s, double lateral_reach) {
  std::vector<Vec3> pts;
  const int n = s.landmark_count;
  switch (s.kind) {
    case PhantomKind::kSlab: {
      pts.push_back(Vec3::Zero());
      for (int k = 1; k < n; ++k) {
        const double theta = 2 * std::numbers::pi * (k - 1) / (n - 1);
        const double rho = 0.45 * lateral_reach * (k % 2 == 0 ? 1.0 : 0.5);
        pts.emplace_back(rho * std::cos(theta), rho * std::sin(theta), 0.0);
      }
      break;
    }
    case PhantomKind::kHollowSphere: {
      const double mid = s.radius_mm - s.thickness_mm / 2;
      for (int k = 0; k < n; ++k) pts.push_back(mid * sphere_direction(k, n));
      break;
    }
    case PhantomKind::kFoldedSheet: {
      const double span = std::min(s.period_mm, 1.2 * lateral_reach);
      for (int k = 0; k < n; ++k) {
        const double x = -span / 2 + span * (k + 0.5) / n;
        pts.emplace_back(x, 0.0, s.amplitude_mm * std::sin(2 * std::numbers::pi * x / s.period_mm));
      }
      break;
    }
    case PhantomKind::kSolidBall: {
      pts.push_back(Vec3::Zero());
      for (int k = 1; k < n; ++k) pts.push_back(0.25 * s.radius_mm * sphere_direction(k - 1, n - 1));
      break;
    }
  }
  return pts;
}

}  // namespace

std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::kSlab: return "slab";
    case PhantomKind::kHollowSphere: return "hollow-sphere";
    case PhantomKind::kFoldedSheet: return "folded-sheet";
    case PhantomKind::kSolidBall: return "solid-ball";
  }
  return "slab";
}

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "slab") return PhantomKind::kSlab;
  if (s == "hollow-sphere") return PhantomKind::kHollowSphere;
  if (s == "folded-sheet") return PhantomKind::kFoldedSheet;
  if (s == "solid-ball") return PhantomKind::kSolidBall;
  throw Error("unknown phantom kind '" + s + "'");
}

Eigen::Matrix3d rotation_from_euler_deg(const Vec3& deg) {
  const Vec3 rad = deg * std::numbers::pi / 180.0;
  return (Eigen::AngleAxisd(rad.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rad.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(rad.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Phantom generate_phantom(const PhantomSpec& spec) {
  if (!(spec.thickness_mm > 0)) throw Error("phantom thickness must be positive");
  if ((spec.kind == PhantomKind::kHollowSphere || spec.kind == PhantomKind::kSolidBall) && !(spec.radius_mm > 0)) {
    throw Error("phantom radius must be positive");
  }
  if (spec.kind == PhantomKind::kHollowSphere && !(spec.thickness_mm < spec.radius_mm)) {
    throw Error("hollow sphere wall must be thinner than its radius");
  }
  if (spec.kind == PhantomKind::kFoldedSheet && (!(spec.amplitude_mm > 0) || !(spec.period_mm > 0))) {
    throw Error("folded sheet amplitude and period must be positive");
  }
  if (!(spec.jitter >= 0.0 && spec.jitter <= 1.0)) throw Error("jitter must lie in [0, 1]");
  if (spec.landmark_count < 1) throw Error("phantom needs at least one landmark");

  const Grid grid(spec.dims, spec.spacing);
  Vec3 center_vox;
  double half_extent = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    center_vox[a] = std::floor(spec.dims[a] / 2.0) - 0.5;
    const double low = center_vox[a] * spec.spacing[a];
    const double high = (spec.dims[a] - 1 - center_vox[a]) * spec.spacing[a];
    half_extent = std::min({half_extent, low, high});
  }
  if (bounding_radius(spec) >= half_extent) {
    throw Error(fmt::format("{} phantom (bounding radius {:.3f} mm) exceeds the volume (half extent {:.3f} mm)",
                            to_string(spec.kind), bounding_radius(spec), half_extent));
  }

  Phantom out;
  out.rotation = rotation_from_euler_deg(spec.rotation_deg);
  out.center_mm = grid.voxel_to_phys(center_vox);
  const Eigen::Matrix3d to_local = out.rotation.transpose();

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(grid.size()), 0);
  for (std::int64_t k = 0; k < spec.dims[2]; ++k) {
    for (std::int64_t j = 0; j < spec.dims[1]; ++j) {
      for (std::int64_t i = 0; i < spec.dims[0]; ++i) {
        const Vec3 q = to_local * (grid.voxel_to_phys(Index3{i, j, k}) - out.center_mm);
        if (inside(spec, q)) bits[static_cast<std::size_t>(grid.linear(i, j, k))] = 1;
      }
    }
  }

  if (spec.jitter > 0.0) {
    const auto clean = bits;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const auto& d = spec.dims;
    for (std::int64_t k = 0; k < d[2]; ++k) {
      for (std::int64_t j = 0; j < d[1]; ++j) {
        for (std::int64_t i = 0; i < d[0]; ++i) {
          const auto idx = static_cast<std::size_t>(grid.linear(i, j, k));
          bool boundary = false;
          const Index3 steps[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
          for (const auto& s : steps) {
            const Index3 u{i + s[0], j + s[1], k + s[2]};
            if (grid.contains(u) && clean[static_cast<std::size_t>(grid.linear(u))] != clean[idx]) boundary = true;
          }
          if (boundary && coin(rng) < spec.jitter) bits[idx] ^= 1;
        }
      }
    }
  }

  switch (spec.kind) {
    case PhantomKind::kSolidBall: out.thickness_mm = 2 * spec.radius_mm; break;
    default: out.thickness_mm = spec.thickness_mm; break;
  }
  std::vector<float> field(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) field[i] = bits[i] ? static_cast<float>(out.thickness_mm) : 0.0f;
  out.thickness_field = Volume(grid, DataType::kFloat32, std::move(field));
  out.mask = BinaryMask(grid, std::move(bits));

  const double reach = spec.extent_mm > 0 ? std::min(spec.extent_mm, half_extent) : half_extent;
  const auto local = local_landmarks(spec, reach);
  for (std::size_t k = 0; k < local.size(); ++k) {
    out.landmarks.add(fmt::format("lm{:02d}", k + 1), out.center_mm + out.rotation * local[k]);
  }
  return out;
}

}  // namespace cortexa
