#include "cortexa/thickness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "cortexa/components.hpp"
#include "cortexa/skeleton.hpp"
#include "cortexa/stats.hpp"

namespace cortexa {
namespace {

struct Seed {
  bool found = false;
  bool snapped = false;
  Index3 index{};
  double distance_mm = 0.0;
};

Seed find_seed(const BinaryMask& mask, const Vec3& point, double snap_cap_mm) {
  const Grid& g = mask.grid();
  Seed seed;
  const NearestVoxel nv = g.nearest_voxel(point);
  if (nv.inside && mask.at(nv.index)) {
    seed.found = true;
    seed.index = nv.index;
    seed.distance_mm = (g.voxel_to_phys(nv.index) - point).norm();
    return seed;
  }
  // Box search around the continuous position; the half-width covers the
  // snap cap along every axis of a rotated grid.
  const Vec3 c = g.phys_to_voxel(point);
  const double reach = snap_cap_mm / g.spacing().minCoeff() + 1.0;
  Index3 lo{}, hi{};
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(c[a] - reach)));
    hi[a] = std::min<std::int64_t>(g.dims()[a] - 1, static_cast<std::int64_t>(std::ceil(c[a] + reach)));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::int64_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::int64_t i = lo[0]; i <= hi[0]; ++i) {
        if (!mask.at(i, j, k)) continue;
        const double d = (g.voxel_to_phys(Index3{i, j, k}) - point).norm();
        if (d < best) {
          best = d;
          seed.index = {i, j, k};
        }
      }
    }
  }
  if (best <= snap_cap_mm) {
    seed.found = true;
    seed.snapped = true;
    seed.distance_mm = best;
  }
  return seed;
}

ThicknessEntry measure(const BinaryMask& mask, const DistanceMap* dm, const Landmark& landmark,
                       const ThicknessOptions& options) {
  ThicknessEntry e;
  e.name = landmark.name;
  e.thickness_mm = std::numeric_limits<double>::quiet_NaN();
  e.radius_mm = std::numeric_limits<double>::quiet_NaN();
  e.center_mm = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  e.status = LandmarkStatus::kFailed;
  try {
    const auto ribbon = extract_ribbon(mask, landmark, options.ribbon_radius_mm, options.snap_cap_mm);
    e.ribbon_voxels = static_cast<std::int64_t>(ribbon.voxels.size());
    e.snap_mm = ribbon.snap_mm;
    if (!ribbon.found) {
      e.message = fmt::format("no foreground within {} mm", options.snap_cap_mm);
      return e;
    }
    if (dm == nullptr) {
      e.message = "mask has no background; distance undefined";
      return e;
    }
    const auto sk = skeletonize(mask, *dm, ribbon.voxels);
    const auto sphere = max_inscribed_sphere(sk, ribbon.voxels);
    e.radius_mm = sphere.radius_mm;
    e.thickness_mm = 2.0 * sphere.radius_mm;
    e.center_mm = sphere.center_mm;
    e.status = ribbon.snapped ? LandmarkStatus::kSnapped : LandmarkStatus::kOk;
  } catch (const Error& err) {
    e.message = err.what();
  }
  return e;
}

}  // namespace

std::string to_string(LandmarkStatus s) {
  switch (s) {
    case LandmarkStatus::kOk: return "ok";
    case LandmarkStatus::kSnapped: return "snapped";
    case LandmarkStatus::kFailed: return "failed";
  }
  return "failed";
}

LandmarkStatus status_from_string(const std::string& s) {
  if (s == "ok") return LandmarkStatus::kOk;
  if (s == "snapped") return LandmarkStatus::kSnapped;
  if (s == "failed") return LandmarkStatus::kFailed;
  throw Error("unknown landmark status '" + s + "'");
}

RibbonExtraction extract_ribbon(const BinaryMask& mask, const Landmark& landmark, double radius_mm,
                                double snap_cap_mm) {
  if (!(radius_mm > 0.0)) throw Error("ribbon radius must be positive");
  if (!(snap_cap_mm >= 0.0)) throw Error("snap cap must be non-negative");
  RibbonExtraction out;
  out.landmark = landmark.name;
  out.radius_mm = radius_mm;
  const Seed seed = find_seed(mask, landmark.point, snap_cap_mm);
  if (!seed.found) return out;
  out.found = true;
  out.snapped = seed.snapped;
  out.seed = seed.index;
  out.snap_mm = seed.distance_mm;

  const Grid& g = mask.grid();
  struct Step {
    Index3 offset;
    double mm;
  };
  std::vector<Step> steps;
  for (const auto& o : neighbor_offsets(Connectivity::k26)) {
    steps.push_back({o, Vec3(o[0] * g.spacing()[0], o[1] * g.spacing()[1], o[2] * g.spacing()[2]).norm()});
  }

  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  std::unordered_map<std::int64_t, double> dist;
  const auto start = g.linear(seed.index);
  dist[start] = 0.0;
  queue.push({0.0, start});
  const double limit = radius_mm * (1.0 + 1e-12);
  while (!queue.empty()) {
    const auto [d, cur] = queue.top();
    queue.pop();
    if (d > dist[cur]) continue;
    out.voxels.push_back(cur);
    const Index3 v = g.unravel(cur);
    for (const auto& s : steps) {
      const Index3 u{v[0] + s.offset[0], v[1] + s.offset[1], v[2] + s.offset[2]};
      if (!g.contains(u) || !mask.at(u)) continue;
      const double nd = d + s.mm;
      if (nd > limit) continue;
      const auto ui = g.linear(u);
      auto it = dist.find(ui);
      if (it == dist.end() || nd < it->second) {
        dist[ui] = nd;
        queue.push({nd, ui});
      }
    }
  }
  std::sort(out.voxels.begin(), out.voxels.end());
  return out;
}

std::size_t ThicknessReport::failures() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) {
    return e.status == LandmarkStatus::kFailed;
  }));
}

const ThicknessEntry* ThicknessReport::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ThicknessReport thickness_at_landmarks(const BinaryMask& mask, const LandmarkSet& landmarks,
                                       const ThicknessOptions& options) {
  const auto n = mask.count();
  if (n == 0 || n == mask.size()) {
    // No foreground, or no background to measure against: every landmark fails.
    ThicknessReport report;
    for (const auto& l : landmarks.items()) report.entries.push_back(measure(mask, nullptr, l, options));
    return report;
  }
  const auto dt = distance_transform(mask);
  return thickness_at_landmarks(mask, dt.distance, landmarks, options);
}

ThicknessReport thickness_at_landmarks(const BinaryMask& mask, const DistanceMap& dm,
                                       const LandmarkSet& landmarks, const ThicknessOptions& options) {
  if (!(options.ribbon_radius_mm > 0.0)) throw Error("ribbon radius must be positive");
  if (!(options.snap_cap_mm >= 0.0)) throw Error("snap cap must be non-negative");
  ThicknessReport report;
  report.entries.resize(landmarks.size());
  const auto& items = landmarks.items();
  const int workers = std::clamp<int>(options.threads, 1, static_cast<int>(std::max<std::size_t>(1, items.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) report.entries[i] = measure(mask, &dm, items[i], options);
    return report;
  }
  // Each worker writes only its own slots, so the result is scheduling-independent.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < items.size(); i = next++) {
        report.entries[i] = measure(mask, &dm, items[i], options);
      }
    });
  }
  for (auto& t : pool) t.join();
  return report;
}

void add_subject(ThicknessSeries& series, const std::string& subject, const ThicknessReport& report) {
  auto& row = series[subject];
  for (const auto& e : report.entries) {
    if (e.status != LandmarkStatus::kFailed && std::isfinite(e.thickness_mm)) row[e.name] = e.thickness_mm;
  }
}

PairedTable compare_thickness(const ThicknessSeries& automated, const ThicknessSeries& manual,
                              std::size_t min_subjects) {
  std::set<std::string> names;
  for (const auto& [subject, row] : automated) {
    for (const auto& [name, value] : row) names.insert(name);
  }
  for (const auto& [subject, row] : manual) {
    for (const auto& [name, value] : row) names.insert(name);
  }

  PairedTable table;
  for (const auto& name : names) {
    PairedLandmark pl;
    pl.name = name;
    for (const auto& [subject, row] : automated) {
      const auto m = manual.find(subject);
      if (m == manual.end()) continue;
      const auto a_it = row.find(name);
      const auto m_it = m->second.find(name);
      if (a_it == row.end() || m_it == m->second.end()) continue;
      pl.subjects.push_back(subject);
      pl.automated.push_back(a_it->second);
      pl.manual.push_back(m_it->second);
    }
    if (pl.subjects.size() < min_subjects) {
      table.warnings.push_back(fmt::format("landmark '{}' skipped: {} paired subject(s), need {}", name,
                                           pl.subjects.size(), min_subjects));
      continue;
    }
    table.landmarks.push_back(std::move(pl));
  }
  return table;
}

std::vector<LandmarkAgreement> thickness_agreement(const PairedTable& table) {
  std::vector<LandmarkAgreement> out;
  for (const auto& pl : table.landmarks) {
    LandmarkAgreement a;
    a.name = pl.name;
    a.n = pl.subjects.size();
    double diff = 0.0;
    for (std::size_t i = 0; i < a.n; ++i) diff += pl.automated[i] - pl.manual[i];
    a.mean_difference_mm = a.n > 0 ? diff / static_cast<double>(a.n) : 0.0;
    try {
      const auto pr = pearson(pl.automated, pl.manual);
      a.r = pr.r;
      a.p = pr.p;
      Eigen::MatrixXd t(static_cast<Eigen::Index>(a.n), 2);
      for (std::size_t i = 0; i < a.n; ++i) {
        t(static_cast<Eigen::Index>(i), 0) = pl.automated[i];
        t(static_cast<Eigen::Index>(i), 1) = pl.manual[i];
      }
      a.icc = icc_avg_fixed(t);
      a.icc_agreement = icc_avg_agreement(t);
      a.valid = true;
    } catch (const Error& e) {
      a.message = e.what();
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace cortexa
