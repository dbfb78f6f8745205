#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cortexa/volume.hpp"

namespace cortexa {

inline constexpr std::int64_t kPatchSize = 64;
inline constexpr std::int64_t kPatchVoxels = kPatchSize * kPatchSize * kPatchSize;

/// Intensity statistics used to normalise a patch. `min`/`max` are taken
/// after standardisation.
struct NormalizationRecord {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// std < 1e-8 or max == min: the patch was set to all zeros.
  bool degenerate = false;
  std::int64_t padded_voxels = 0;
};

/// 64^3 crop of a volume with values in [0, 1]. Voxels outside the source are
/// zero padding.
struct Patch {
  Index3 origin{};
  Dims source_dims{};
  Vec3 spacing = Vec3::Ones();
  std::vector<float> values;
  NormalizationRecord normalization;

  static std::int64_t local_index(std::int64_t i, std::int64_t j, std::int64_t k) {
    return i + kPatchSize * (j + kPatchSize * k);
  }
  /// Whether local voxel (i, j, k) maps inside the source volume.
  bool in_bounds(std::int64_t i, std::int64_t j, std::int64_t k) const;
  Volume to_volume() const;
};

/// Crops [center - 32, center + 32) on every axis, zero-pads outside the
/// volume, standardises the in-bounds voxels (zero mean, unit population
/// std) and rescales them to [0, 1]. Throws when the centre is outside.
Patch extract_patch(const Volume& v, const Index3& center);

/// Same normalisation for the patch whose first voxel is `origin`. The patch
/// must overlap the volume.
Patch extract_patch_at(const Volume& v, const Index3& origin);

/// Maps a normalised patch to a foreground probability patch of the same
/// shape with values in [0, 1]. Implementations must be pure.
class PatchPredictor {
 public:
  virtual ~PatchPredictor() = default;
  virtual std::vector<float> predict(const Patch& patch) const = 0;
};

/// Reference predictor: probability 1 where the normalised value >= level.
class ThresholdPredictor : public PatchPredictor {
 public:
  explicit ThresholdPredictor(float level) : level_(level) {}
  std::vector<float> predict(const Patch& patch) const override;

 private:
  float level_;
};

/// Reads precomputed probabilities from `<dir>/tile_<x>_<y>_<z>.nii.gz`, where
/// x, y, z is the tile origin in source voxels.
class TileDirectoryPredictor : public PatchPredictor {
 public:
  explicit TileDirectoryPredictor(std::string directory) : directory_(std::move(directory)) {}
  std::vector<float> predict(const Patch& patch) const override;

  static std::string tile_name(const Index3& origin);

 private:
  std::string directory_;
};

struct StitchOptions {
  std::int64_t stride = 32;
  double threshold = 0.5;
  /// Weight overlapping predictions by a Gaussian centred on each tile.
  bool gaussian_weighting = false;
};

/// Tile origins on a regular grid (step = stride) starting at 0 and covering
/// every voxel of `dims`.
std::vector<Index3> tile_origins(const Dims& dims, std::int64_t stride);

/// Sliding-window reassembly: predicts every tile, averages probabilities
/// over overlapping in-bounds voxels and keeps voxels with mean >= threshold.
/// Throws if the predictor returns the wrong shape or values outside [0, 1].
BinaryMask stitch(const Volume& v, const PatchPredictor& predictor, const StitchOptions& options = {});

struct RaterPairAgreement {
  std::size_t rater_a = 0;
  std::size_t rater_b = 0;
  /// Dice (%) per shared patch.
  std::vector<double> dsc;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single patch.
  double sd = 0.0;

  std::string formatted() const;
};

/// "95.26 ± 1.37 %"
std::string format_mean_sd(double mean, double sd);

/// Pairwise Dice between raters over aligned patch lists (raters[r][p] is
/// rater r's mask of patch p).
std::vector<RaterPairAgreement> interrater_dsc(const std::vector<std::vector<BinaryMask>>& raters);

}  // namespace cortexa
