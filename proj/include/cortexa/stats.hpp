#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cortexa/volume.hpp"

namespace cortexa {

struct DiceResult {
  double percent = 0.0;
  /// Both masks empty; percent is reported as 100.
  bool both_empty = false;
};

/// 100 * 2|A n B| / (|A| + |B|). Throws on a shape mismatch.
DiceResult dice(const BinaryMask& a, const BinaryMask& b);

/// Foreground voxels with at least one background face neighbour or lying on
/// the image border. Sorted linear indices.
std::vector<std::int64_t> surface_voxels(const BinaryMask& mask);

/// Distances (mm) from every surface voxel of `from` to the nearest surface
/// voxel of `to`, in surface-voxel index order.
std::vector<double> directed_surface_distances(const BinaryMask& from, const BinaryMask& to);

/// Linear-interpolation percentile: rank = q * (n - 1). `values` need not be sorted.
double percentile_linear(std::vector<double> values, double q);

/// Symmetric 95th-percentile surface distance in mm:
/// max(P95(A->B), P95(B->A)). Throws when either mask is empty or the
/// geometries differ.
double hd95(const BinaryMask& a, const BinaryMask& b);

/// Regularised incomplete beta function I_x(a, b), evaluated with a
/// modified-Lentz continued fraction.
double incomplete_beta(double a, double b, double x);

/// Student t cumulative distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct PearsonResult {
  double r = 0.0;
  double t = 0.0;
  /// Two-sided, t distribution with n - 2 degrees of freedom.
  double p = 1.0;
  std::size_t n = 0;
};

/// Pearson correlation with its two-sided t-test p-value.
/// Requires n >= 3 and nonzero variance in both series.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

/// Two-way ANOVA without interaction for an n-subjects x k-raters table.
struct TwoWayAnova {
  std::size_t subjects = 0;
  std::size_t raters = 0;
  double ss_rows = 0.0;
  double ss_cols = 0.0;
  double ss_error = 0.0;
  double ms_rows = 0.0;
  double ms_cols = 0.0;
  double ms_error = 0.0;
};

TwoWayAnova two_way_anova(const Eigen::MatrixXd& table);

/// Average-measures, fixed-raters consistency ICC (Shrout-Fleiss ICC(3,k)):
/// (MS_rows - MS_error) / MS_rows. Constant per-rater offsets do not lower it.
/// May be negative. Requires n >= 3, k >= 2, finite entries, MS_rows > 0.
double icc_avg_fixed(const Eigen::MatrixXd& table);

/// Average-measures absolute-agreement ICC (ICC(2,k)); unlike icc_avg_fixed
/// it is penalised by systematic offsets between raters.
double icc_avg_agreement(const Eigen::MatrixXd& table);

}  // namespace cortexa
