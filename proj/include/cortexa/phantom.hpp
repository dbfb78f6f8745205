#pragma once

#include <cstdint>
#include <string>

#include "cortexa/volume.hpp"

namespace cortexa {

enum class PhantomKind { kSlab, kHollowSphere, kFoldedSheet, kSolidBall };

std::string to_string(PhantomKind k);
PhantomKind phantom_kind_from_string(const std::string& s);

/// Implicit shape with known thickness, centred in the volume.
///
/// The shape centre sits on a half-integer voxel coordinate, so an
/// axis-aligned slab covers an even number of voxel layers.
struct PhantomSpec {
  PhantomKind kind = PhantomKind::kSlab;
  /// Slab and sheet thickness; wall thickness of the hollow sphere.
  double thickness_mm = 2.4;
  /// Outer radius of the hollow sphere, radius of the solid ball.
  double radius_mm = 20.0;
  /// Folded sheet: z = amplitude * sin(2 pi x / period).
  double amplitude_mm = 5.0;
  double period_mm = 20.0;
  /// In-plane radius limit for slab and sheet; 0 leaves them unbounded.
  double extent_mm = 0.0;
  Dims dims{64, 64, 64};
  Vec3 spacing = Vec3::Ones();
  /// Rigid rotation, applied about x, then y, then z (degrees).
  Vec3 rotation_deg = Vec3::Zero();
  /// Probability of flipping each boundary voxel.
  double jitter = 0.0;
  std::uint64_t seed = 0;
  int landmark_count = 10;
};

struct Phantom {
  BinaryMask mask;
  /// Analytic thickness (mm), constant over the shape.
  double thickness_mm = 0.0;
  /// thickness_mm on foreground voxels, 0 elsewhere.
  Volume thickness_field;
  /// Points on the analytic mid-surface (centre region for the solid ball).
  LandmarkSet landmarks;
  Vec3 center_mm = Vec3::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

/// Voxel-centre sampling of the implicit inequality (no anti-aliasing).
/// Throws if parameters are not positive or the shape reaches the volume
/// border.
Phantom generate_phantom(const PhantomSpec& spec);

Eigen::Matrix3d rotation_from_euler_deg(const Vec3& deg);

}  // namespace cortexa
