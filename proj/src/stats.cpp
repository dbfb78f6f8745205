#include "cortexa/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "cortexa/distance.hpp"

namespace cortexa {
namespace {

void require_same_geometry(const BinaryMask& a, const BinaryMask& b) {
  if (a.dims() != b.dims()) {
    throw Error(fmt::format("mask shapes differ: {}x{}x{} vs {}x{}x{}", a.dims()[0], a.dims()[1],
                            a.dims()[2], b.dims()[0], b.dims()[1], b.dims()[2]));
  }
  if ((a.spacing() - b.spacing()).cwiseAbs().maxCoeff() > 1e-6) throw Error("mask spacings differ");
}

// Continued fraction for I_x(a, b); converges quickly for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error("incomplete beta: continued fraction did not converge");
}

}  // namespace

DiceResult dice(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b);
  std::int64_t na = 0, nb = 0, both = 0;
  const auto ba = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    na += ba[i];
    nb += bb[i];
    both += ba[i] & bb[i];
  }
  if (na + nb == 0) return {100.0, true};
  return {100.0 * 2.0 * static_cast<double>(both) / static_cast<double>(na + nb), false};
}

std::vector<std::int64_t> surface_voxels(const BinaryMask& mask) {
  const Grid& g = mask.grid();
  const auto& d = g.dims();
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0; k < d[2]; ++k) {
    for (std::int64_t j = 0; j < d[1]; ++j) {
      for (std::int64_t i = 0; i < d[0]; ++i) {
        if (!mask.at(i, j, k)) continue;
        const bool border = i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1;
        if (border || !mask.at(i - 1, j, k) || !mask.at(i + 1, j, k) || !mask.at(i, j - 1, k) ||
            !mask.at(i, j + 1, k) || !mask.at(i, j, k - 1) || !mask.at(i, j, k + 1)) {
          out.push_back(g.linear(i, j, k));
        }
      }
    }
  }
  return out;
}

std::vector<double> directed_surface_distances(const BinaryMask& from, const BinaryMask& to) {
  require_same_geometry(from, to);
  const auto from_surface = surface_voxels(from);
  const auto to_surface = surface_voxels(to);
  if (from_surface.empty() || to_surface.empty()) throw Error("surface distance undefined for an empty mask");

  // Distance to the nearest `to` surface voxel = EDT with that surface as background.
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(to.size()), 1);
  for (const auto i : to_surface) bits[static_cast<std::size_t>(i)] = 0;
  const auto dt = distance_transform(BinaryMask(to.grid(), std::move(bits)));
  std::vector<double> out;
  out.reserve(from_surface.size());
  for (const auto i : from_surface) out.push_back(dt.distance[i]);
  return out;
}

double percentile_linear(std::vector<double> values, double q) {
  if (values.empty()) throw Error("percentile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("percentile fraction must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double rank = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double hd95(const BinaryMask& a, const BinaryMask& b) {
  require_same_geometry(a, b);
  if (a.count() == 0 || b.count() == 0) throw Error("HD95 undefined: empty mask");
  const double ab = percentile_linear(directed_surface_distances(a, b), 0.95);
  const double ba = percentile_linear(directed_surface_distances(b, a), 0.95);
  return std::max(ab, ba);
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw Error("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw Error("t distribution needs df > 0");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("pearson: series lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw Error("pearson: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error("pearson: non-finite value");
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: zero variance");

  PearsonResult out;
  out.n = n;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double one_minus_r2 = (1.0 - out.r) * (1.0 + out.r);
  if (one_minus_r2 <= 0.0) {
    out.t = std::copysign(std::numeric_limits<double>::infinity(), out.r);
    out.p = 0.0;
    return out;
  }
  out.t = out.r * std::sqrt(df / one_minus_r2);
  // Two-sided tail 2 * (1 - F(|t|)) = I_{df / (df + t^2)}(df / 2, 1 / 2), and
  // df / (df + t^2) simplifies to 1 - r^2.
  out.p = std::clamp(incomplete_beta(0.5 * df, 0.5, one_minus_r2), 0.0, 1.0);
  return out;
}

TwoWayAnova two_way_anova(const Eigen::MatrixXd& table) {
  const auto n = static_cast<std::size_t>(table.rows());
  const auto k = static_cast<std::size_t>(table.cols());
  if (n < 3 || k < 2) throw Error("ICC needs at least 3 subjects and 2 raters");
  if (!table.allFinite()) throw Error("ICC table is incomplete (non-finite entries)");

  const double grand = table.mean();
  const Eigen::VectorXd row_means = table.rowwise().mean();
  const Eigen::RowVectorXd col_means = table.colwise().mean();

  TwoWayAnova a;
  a.subjects = n;
  a.raters = k;
  a.ss_rows = static_cast<double>(k) * (row_means.array() - grand).square().sum();
  a.ss_cols = static_cast<double>(n) * (col_means.array() - grand).square().sum();
  double ss_total = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      const double e = table(i, j) - row_means(i) - col_means(j) + grand;
      a.ss_error += e * e;
      ss_total += (table(i, j) - grand) * (table(i, j) - grand);
    }
  }
  // Residuals at round-off level are zero (e.g. raters that differ by a constant).
  if (a.ss_error <= 1e-12 * ss_total) a.ss_error = 0.0;
  a.ms_rows = a.ss_rows / static_cast<double>(n - 1);
  a.ms_cols = a.ss_cols / static_cast<double>(k - 1);
  a.ms_error = a.ss_error / static_cast<double>((n - 1) * (k - 1));
  return a;
}

double icc_avg_fixed(const Eigen::MatrixXd& table) {
  const auto a = two_way_anova(table);
  if (!(a.ms_rows > 0.0)) throw Error("ICC undefined: no between-subject variance");
  return (a.ms_rows - a.ms_error) / a.ms_rows;
}

double icc_avg_agreement(const Eigen::MatrixXd& table) {
  const auto a = two_way_anova(table);
  const double denom = a.ms_rows + (a.ms_cols - a.ms_error) / static_cast<double>(a.subjects);
  if (!(denom > 0.0)) throw Error("ICC undefined: degenerate mean squares");
  return (a.ms_rows - a.ms_error) / denom;
}

}  // namespace cortexa
