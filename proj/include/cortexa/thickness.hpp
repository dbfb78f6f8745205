#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cortexa/distance.hpp"
#include "cortexa/volume.hpp"

namespace cortexa {

struct ThicknessOptions {
  /// Geodesic radius of the ribbon grown around each landmark.
  double ribbon_radius_mm = 15.0;
  /// Farthest a landmark may be moved onto the mask foreground.
  double snap_cap_mm = 2.0;
  /// Worker threads for the per-landmark loop (1 = serial).
  int threads = 1;
};

/// Local cortical ribbon around one landmark: foreground voxels reachable from
/// the seed through 26-connected foreground within the geodesic radius.
struct RibbonExtraction {
  std::string landmark;
  bool found = false;
  /// Seed was moved because the landmark's own voxel is not foreground.
  bool snapped = false;
  Index3 seed{};
  double radius_mm = 0.0;
  double snap_mm = 0.0;
  /// Sorted linear indices.
  std::vector<std::int64_t> voxels;
};

/// Seeds at the foreground voxel nearest to `point` (within `snap_cap_mm`),
/// then grows by Dijkstra over 26-neighbour foreground using physical centre
/// distances as edge lengths, keeping voxels at geodesic distance <= radius.
/// `found` is false when no foreground lies within the snap cap.
RibbonExtraction extract_ribbon(const BinaryMask& mask, const Landmark& landmark, double radius_mm,
                                double snap_cap_mm);

enum class LandmarkStatus { kOk, kSnapped, kFailed };

std::string to_string(LandmarkStatus s);
LandmarkStatus status_from_string(const std::string& s);

struct ThicknessEntry {
  std::string name;
  LandmarkStatus status = LandmarkStatus::kFailed;
  /// 2 * radius_mm; NaN when failed.
  double thickness_mm = 0.0;
  double radius_mm = 0.0;
  Vec3 center_mm = Vec3::Zero();
  std::int64_t ribbon_voxels = 0;
  double snap_mm = 0.0;
  std::string message;
};

struct ThicknessReport {
  std::vector<ThicknessEntry> entries;

  std::size_t failures() const;
  const ThicknessEntry* find(const std::string& name) const;
};

/// Thickness at each landmark as the diameter of the largest inscribed ball
/// centred on the medial axis inside the landmark's ribbon.
///
/// Distances are taken against the anatomical background of the whole mask,
/// so the cut faces where the ribbon was cropped do not shrink the balls.
/// A landmark failure is recorded in its entry; the batch always completes
/// and entries follow the landmark order.
ThicknessReport thickness_at_landmarks(const BinaryMask& mask, const LandmarkSet& landmarks,
                                       const ThicknessOptions& options = {});

/// Same, reusing a distance map computed from `mask`.
ThicknessReport thickness_at_landmarks(const BinaryMask& mask, const DistanceMap& dm,
                                       const LandmarkSet& landmarks, const ThicknessOptions& options = {});

/// subject -> landmark -> thickness (mm).
using ThicknessSeries = std::map<std::string, std::map<std::string, double>>;

/// Adds a subject's successful measurements to a series.
void add_subject(ThicknessSeries& series, const std::string& subject, const ThicknessReport& report);

struct PairedLandmark {
  std::string name;
  std::vector<std::string> subjects;
  std::vector<double> automated;
  std::vector<double> manual;
};

struct PairedTable {
  std::vector<PairedLandmark> landmarks;
  std::vector<std::string> warnings;
};

/// Pairs automated and manual thickness per landmark over the subjects that
/// have both. Landmarks with fewer than `min_subjects` pairs are skipped with
/// a warning. Landmarks are ordered by name.
PairedTable compare_thickness(const ThicknessSeries& automated, const ThicknessSeries& manual,
                              std::size_t min_subjects = 3);

struct LandmarkAgreement {
  std::string name;
  std::size_t n = 0;
  bool valid = false;
  double r = 0.0;
  double p = 1.0;
  /// Average fixed raters (consistency) ICC over the two series.
  double icc = 0.0;
  /// Absolute-agreement counterpart, sensitive to systematic offsets.
  double icc_agreement = 0.0;
  double mean_difference_mm = 0.0;
  std::string message;
};

/// Pearson r, p and ICC for every paired landmark.
std::vector<LandmarkAgreement> thickness_agreement(const PairedTable& table);

}  // namespace cortexa
