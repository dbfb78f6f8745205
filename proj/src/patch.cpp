#include "cortexa/patch.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>

#include <fmt/format.h>

#include "cortexa/nifti.hpp"
#include "cortexa/stats.hpp"

namespace cortexa {
namespace {

constexpr double kDegenerateStd = 1e-8;

void normalize(Patch& p, const std::vector<std::uint8_t>& valid) {
  double sum = 0.0;
  std::int64_t n = 0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    if (!valid[i]) continue;
    sum += p.values[i];
    ++n;
  }
  auto& rec = p.normalization;
  rec.padded_voxels = kPatchVoxels - n;
  rec.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    if (valid[i]) ss += (p.values[i] - rec.mean) * (p.values[i] - rec.mean);
  }
  rec.std = std::sqrt(ss / static_cast<double>(n));

  auto zero = [&] {
    rec.degenerate = true;
    std::fill(p.values.begin(), p.values.end(), 0.0f);
  };
  if (rec.std < kDegenerateStd) return zero();

  std::vector<double> z(p.values.size(), 0.0);
  rec.min = std::numeric_limits<double>::infinity();
  rec.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!valid[i]) continue;
    z[i] = (p.values[i] - rec.mean) / rec.std;
    rec.min = std::min(rec.min, z[i]);
    rec.max = std::max(rec.max, z[i]);
  }
  const double range = rec.max - rec.min;
  if (!(range > 0.0)) return zero();
  for (std::size_t i = 0; i < z.size(); ++i) {
    p.values[i] = valid[i] ? static_cast<float>(std::clamp((z[i] - rec.min) / range, 0.0, 1.0)) : 0.0f;
  }
}

}  // namespace

bool Patch::in_bounds(std::int64_t i, std::int64_t j, std::int64_t k) const {
  const Index3 s{origin[0] + i, origin[1] + j, origin[2] + k};
  return s[0] >= 0 && s[1] >= 0 && s[2] >= 0 && s[0] < source_dims[0] && s[1] < source_dims[1] &&
         s[2] < source_dims[2];
}

Volume Patch::to_volume() const {
  Affine a = diagonal_affine(spacing);
  for (int ax = 0; ax < 3; ++ax) a(ax, 3) = static_cast<double>(origin[ax]) * spacing[ax];
  return Volume(Grid({kPatchSize, kPatchSize, kPatchSize}, spacing, a), DataType::kFloat32, values);
}

Patch extract_patch(const Volume& v, const Index3& center) {
  if (!v.grid().contains(center)) {
    throw Error(fmt::format("patch centre ({}, {}, {}) is outside the volume", center[0], center[1], center[2]));
  }
  const auto half = kPatchSize / 2;
  return extract_patch_at(v, {center[0] - half, center[1] - half, center[2] - half});
}

Patch extract_patch_at(const Volume& v, const Index3& origin) {
  const auto& d = v.dims();
  for (int a = 0; a < 3; ++a) {
    if (origin[a] + kPatchSize <= 0 || origin[a] >= d[a]) {
      throw Error(fmt::format("patch at origin ({}, {}, {}) does not overlap the volume", origin[0], origin[1],
                              origin[2]));
    }
  }
  Patch p;
  p.origin = origin;
  p.source_dims = d;
  p.spacing = v.spacing();
  p.values.assign(static_cast<std::size_t>(kPatchVoxels), 0.0f);
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(kPatchVoxels), 0);
  for (std::int64_t k = 0; k < kPatchSize; ++k) {
    for (std::int64_t j = 0; j < kPatchSize; ++j) {
      for (std::int64_t i = 0; i < kPatchSize; ++i) {
        if (!p.in_bounds(i, j, k)) continue;
        const auto li = static_cast<std::size_t>(Patch::local_index(i, j, k));
        p.values[li] = v.at(origin[0] + i, origin[1] + j, origin[2] + k);
        valid[li] = 1;
      }
    }
  }
  normalize(p, valid);
  return p;
}

std::vector<float> ThresholdPredictor::predict(const Patch& patch) const {
  std::vector<float> out(patch.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = patch.values[i] >= level_ ? 1.0f : 0.0f;
  return out;
}

std::string TileDirectoryPredictor::tile_name(const Index3& origin) {
  return fmt::format("tile_{}_{}_{}.nii.gz", origin[0], origin[1], origin[2]);
}

std::vector<float> TileDirectoryPredictor::predict(const Patch& patch) const {
  const auto path = (std::filesystem::path(directory_) / tile_name(patch.origin)).string();
  if (!std::filesystem::exists(path)) throw Error("missing tile prediction '" + path + "'");
  const Volume v = read_nifti(path);
  return {v.voxels().begin(), v.voxels().end()};
}

std::vector<Index3> tile_origins(const Dims& dims, std::int64_t stride) {
  if (stride < 1 || stride > kPatchSize) throw Error(fmt::format("stride must be in [1, {}]", kPatchSize));
  std::array<std::vector<std::int64_t>, 3> axis;
  for (int a = 0; a < 3; ++a) {
    std::int64_t o = 0;
    axis[a].push_back(o);
    while (o + kPatchSize < dims[a]) {
      o += stride;
      axis[a].push_back(o);
    }
  }
  std::vector<Index3> out;
  for (const auto z : axis[2]) {
    for (const auto y : axis[1]) {
      for (const auto x : axis[0]) out.push_back({x, y, z});
    }
  }
  return out;
}

BinaryMask stitch(const Volume& v, const PatchPredictor& predictor, const StitchOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold < 1.0)) throw Error("threshold must lie in (0, 1)");
  const auto origins = tile_origins(v.dims(), options.stride);

  std::vector<double> weights(static_cast<std::size_t>(kPatchVoxels), 1.0);
  if (options.gaussian_weighting) {
    const double sigma = kPatchSize / 8.0;
    const double c = (kPatchSize - 1) / 2.0;
    for (std::int64_t k = 0; k < kPatchSize; ++k) {
      for (std::int64_t j = 0; j < kPatchSize; ++j) {
        for (std::int64_t i = 0; i < kPatchSize; ++i) {
          const double r2 = (i - c) * (i - c) + (j - c) * (j - c) + (k - c) * (k - c);
          weights[static_cast<std::size_t>(Patch::local_index(i, j, k))] =
              std::max(std::exp(-r2 / (2.0 * sigma * sigma)), 1e-6);
        }
      }
    }
  }

  const Grid& g = v.grid();
  std::vector<double> sum(static_cast<std::size_t>(g.size()), 0.0);
  std::vector<double> weight(static_cast<std::size_t>(g.size()), 0.0);
  for (const auto& origin : origins) {
    const Patch patch = extract_patch_at(v, origin);
    const auto prob = predictor.predict(patch);
    if (static_cast<std::int64_t>(prob.size()) != kPatchVoxels) {
      throw Error(fmt::format("predictor returned {} values for tile ({}, {}, {}); expected {}", prob.size(),
                              origin[0], origin[1], origin[2], kPatchVoxels));
    }
    for (std::int64_t k = 0; k < kPatchSize; ++k) {
      for (std::int64_t j = 0; j < kPatchSize; ++j) {
        for (std::int64_t i = 0; i < kPatchSize; ++i) {
          if (!patch.in_bounds(i, j, k)) continue;
          const auto li = static_cast<std::size_t>(Patch::local_index(i, j, k));
          const double p = prob[li];
          if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(fmt::format("predictor returned {} at tile ({}, {}, {}) voxel ({}, {}, {}); expected [0, 1]",
                                    p, origin[0], origin[1], origin[2], i, j, k));
          }
          const auto gi = static_cast<std::size_t>(g.linear(origin[0] + i, origin[1] + j, origin[2] + k));
          sum[gi] += weights[li] * p;
          weight[gi] += weights[li];
        }
      }
    }
  }

  std::vector<std::uint8_t> bits(sum.size(), 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = weight[i] > 0.0 && sum[i] / weight[i] >= options.threshold ? 1 : 0;
  }
  return BinaryMask(g, std::move(bits));
}

std::string format_mean_sd(double mean, double sd) {
  return fmt::format("{:.2f} ± {:.2f} %", mean, sd);
}

std::string RaterPairAgreement::formatted() const { return format_mean_sd(mean, sd); }

std::vector<RaterPairAgreement> interrater_dsc(const std::vector<std::vector<BinaryMask>>& raters) {
  if (raters.size() < 2) throw Error("inter-rater agreement needs at least two raters");
  const auto patches = raters.front().size();
  for (std::size_t r = 0; r < raters.size(); ++r) {
    if (raters[r].size() != patches) {
      throw Error(fmt::format("rater {} has {} patches, rater 1 has {}", r + 1, raters[r].size(), patches));
    }
  }
  if (patches == 0) throw Error("inter-rater agreement needs at least one patch");

  std::vector<RaterPairAgreement> out;
  for (std::size_t a = 0; a < raters.size(); ++a) {
    for (std::size_t b = a + 1; b < raters.size(); ++b) {
      RaterPairAgreement pair;
      pair.rater_a = a;
      pair.rater_b = b;
      for (std::size_t p = 0; p < patches; ++p) pair.dsc.push_back(dice(raters[a][p], raters[b][p]).percent);
      double s = 0.0;
      for (const auto x : pair.dsc) s += x;
      pair.mean = s / static_cast<double>(patches);
      if (patches > 1) {
        double ss = 0.0;
        for (const auto x : pair.dsc) ss += (x - pair.mean) * (x - pair.mean);
        pair.sd = std::sqrt(ss / static_cast<double>(patches - 1));
      }
      out.push_back(std::move(pair));
    }
  }
  return out;
}

}  // namespace cortexa
