// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cortexa/distance.hpp"
#include "cortexa/nifti.hpp"
#include "cortexa/patch.hpp"
#include "cortexa/phantom.hpp"
#include "cortexa/skeleton.hpp"
#include "cortexa/stats.hpp"
#include "cortexa/thickness.hpp"
#include "oracles.hpp"

using namespace cortexa;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Slab thickness sweep tolerances, in voxel spacings.
constexpr double kAxisTolSpacings = 1.0;
constexpr double kRotatedTolSpacings = 2.0;
constexpr double kRuntimeBudgetS = 60.0;

Outcome slab_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Vec3> rotations{Vec3::Zero(), Vec3(30, 0, 0), Vec3(0, 45, 0), Vec3(30, 45, 0)};
  double worst = 0.0;
  std::string worst_case;
  int landmarks = 0;
  for (const double t : {0.6, 1.2, 2.4, 3.6}) {
    for (const double s : {0.28, 0.3, 0.5}) {
      for (const auto& rot : rotations) {
        PhantomSpec spec;
        spec.thickness_mm = t;
        spec.spacing = Vec3::Constant(s);
        spec.rotation_deg = rot;
        spec.extent_mm = 6.0;
        const auto n = static_cast<std::int64_t>(std::ceil(2.0 * (std::hypot(6.0, t / 2) + 1.0) / s)) + 2;
        spec.dims = {n, n, n};
        spec.landmark_count = 5;
        const auto ph = generate_phantom(spec);
        const auto rep = thickness_at_landmarks(ph.mask, ph.landmarks);
        const bool rotated = rot != Vec3::Zero();
        const double tol = (rotated ? kRotatedTolSpacings : kAxisTolSpacings) * s;
        for (const auto& e : rep.entries) {
          ++landmarks;
          const double err = std::isfinite(e.thickness_mm) ? std::abs(e.thickness_mm - t) : INFINITY;
          if (err / tol > worst) {
            worst = err / tol;
            worst_case = fmt::format("t={} s={} rot=({},{},{}) {}: {:.3f} mm", t, s, rot.x(), rot.y(), rot.z(),
                                     e.name, e.thickness_mm);
          }
          if (!(err <= tol + 1e-9)) o.pass = false;
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= kRuntimeBudgetS) o.pass = false;
  o.detail = fmt::format("{} landmarks, worst error {:.2f} x tolerance ({}), {:.1f} s", landmarks, worst,
                         worst_case, secs);
  return o;
}

Outcome curved_suite() {
  Outcome o;
  PhantomSpec shell;
  shell.kind = PhantomKind::kHollowSphere;
  shell.radius_mm = 20.0;
  shell.thickness_mm = 3.0;
  shell.spacing = Vec3::Constant(0.5);
  shell.dims = {88, 88, 88};
  shell.landmark_count = 10;
  const auto ps = generate_phantom(shell);
  const auto rs = thickness_at_landmarks(ps.mask, ps.landmarks);
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& e : rs.entries) {
    lo = std::min(lo, e.thickness_mm);
    hi = std::max(hi, e.thickness_mm);
    if (!(std::abs(e.thickness_mm - 3.0) <= 0.5)) o.pass = false;
  }
  if (rs.entries.size() != 10) o.pass = false;

  PhantomSpec fold;
  fold.kind = PhantomKind::kFoldedSheet;
  fold.amplitude_mm = 5.0;
  fold.period_mm = 20.0;
  fold.thickness_mm = 2.4;
  fold.spacing = Vec3::Constant(0.3);
  fold.dims = {100, 100, 60};
  const auto pf = generate_phantom(fold);
  const auto rf = thickness_at_landmarks(pf.mask, pf.landmarks);
  double flo = INFINITY, fhi = -INFINITY;
  for (const auto& e : rf.entries) {
    flo = std::min(flo, e.thickness_mm);
    fhi = std::max(fhi, e.thickness_mm);
    if (!(std::abs(e.thickness_mm - 2.4) <= 0.6)) o.pass = false;
  }
  o.detail = fmt::format("shell {} landmarks in [{:.3f}, {:.3f}] mm; folded sheet {} landmarks in [{:.3f}, {:.3f}] mm",
                         rs.entries.size(), lo, hi, rf.entries.size(), flo, fhi);
  return o;
}

Outcome edt_exactness() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 10);
  std::uniform_real_distribution<double> sp(0.2, 3.0), fill(0.2, 0.98);
  std::int64_t voxels = 0, bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    BinaryMask m;
    do {
      m = oracle::random_mask(rng, {dim(rng), dim(rng), dim(rng)}, Vec3(sp(rng), sp(rng), sp(rng)), fill(rng));
    } while (m.count() == m.size());
    const auto dt = distance_transform(m);
    const auto ref = oracle::brute_force_edt(m);
    for (std::int64_t i = 0; i < m.size(); ++i) {
      const double err = std::abs(dt.distance[i] - ref[static_cast<std::size_t>(i)]);
      worst = std::max(worst, err);
      bad += err > 1e-5;
      ++voxels;
    }
  }
  o.pass = bad == 0;
  o.detail = fmt::format("200 masks, {} voxels, {} over 1e-5 mm, worst {:.2e} mm", voxels, bad, worst);
  return o;
}

Outcome skeleton_properties() {
  Outcome o;
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> fill(0.5, 0.95);
  std::int64_t retained = 0, rule_violations = 0, uncovered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    BinaryMask m;
    do {
      m = oracle::random_mask(rng, {8, 8, 8}, Vec3::Ones(), fill(rng));
    } while (m.count() == m.size() || m.count() == 0);
    const auto dm = distance_transform(m).distance;
    const auto sk = skeletonize(m, dm);
    const Grid& g = m.grid();
    for (const auto& p : sk.points) {
      ++retained;
      const Index3 v = g.unravel(p.index);
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const Index3 u{v[0] + dx, v[1] + dy, v[2] + dz};
            if ((dx | dy | dz) == 0 || !g.contains(u) || !m.at(u)) continue;
            const double sep = oracle::phys_dist(g, p.index, g.linear(u));
            // Retained means no neighbour's ball swallows this one.
            if (dm[g.linear(u)] >= dm[p.index] + sep - 1e-6 * (dm[g.linear(u)] + sep)) ++rule_violations;
          }
        }
      }
    }
    for (std::int64_t i = 0; i < m.size(); ++i) {
      if (!m[i]) continue;
      bool hit = false;
      for (const auto& p : sk.points) {
        if (oracle::phys_dist(g, i, p.index) <= p.radius_mm + 1e-9) {
          hit = true;
          break;
        }
      }
      uncovered += !hit;
    }
  }
  o.pass = rule_violations == 0 && uncovered == 0;
  o.detail = fmt::format("100 masks, {} skeleton voxels, {} rule violations, {} uncovered foreground voxels",
                         retained, rule_violations, uncovered);
  return o;
}

Outcome metric_oracles() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_real_distribution<double> sp(0.3, 2.0), fill(0.1, 0.9);
  int fixtures = 0;
  double worst_dsc = 0.0, worst_hd = 0.0;
  while (fixtures < 100) {
    const Dims d{dim(rng), dim(rng), dim(rng)};
    const Vec3 s(sp(rng), sp(rng), sp(rng));
    const auto a = oracle::random_mask(rng, d, s, fill(rng));
    const auto b = oracle::random_mask(rng, d, s, fill(rng));
    if (a.count() == 0 || b.count() == 0) continue;
    worst_dsc = std::max(worst_dsc, std::abs(dice(a, b).percent - oracle::brute_force_dice(a, b)));
    worst_hd = std::max(worst_hd, std::abs(hd95(a, b) - oracle::brute_force_hd95(a, b)));
    ++fixtures;
  }
  int self_ok = 0;
  for (int i = 0; i < 50;) {
    const auto a = oracle::random_mask(rng, {dim(rng) + 2, dim(rng) + 2, dim(rng) + 2}, Vec3(sp(rng), sp(rng), sp(rng)),
                                       fill(rng));
    if (a.count() == 0) continue;
    self_ok += dice(a, a).percent == 100.0 && hd95(a, a) == 0.0;
    ++i;
  }
  o.pass = worst_dsc <= 1e-5 && worst_hd <= 1e-5 && self_ok == 50;
  o.detail = fmt::format("{} fixtures: worst |dDSC| {:.1e}, worst |dHD95| {:.1e} mm; self-identity {}/50", fixtures,
                         worst_dsc, worst_hd, self_ok);
  return o;
}

Outcome statistics() {
  Outcome o;
  // Affine series.
  std::vector<double> x(10), up(10), down(10);
  for (int i = 0; i < 10; ++i) {
    x[static_cast<std::size_t>(i)] = i + 1;
    up[static_cast<std::size_t>(i)] = 2.0 * (i + 1) + 1.0;
    down[static_cast<std::size_t>(i)] = -(i + 1.0);
  }
  const auto pu = pearson(x, up), pd = pearson(x, down);
  const bool affine_ok = pu.r == 1.0 && pu.p == 0.0 && pd.r == -1.0 && pd.p == 0.0;

  std::mt19937_64 rng(109);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> len(5, 60), nn(3, 20), kk(2, 6);
  double wr = 0.0, wp = 0.0;
  for (int t = 0; t < 20; ++t) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> a(n), b(n);
    const double slope = g(rng);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = g(rng);
      b[i] = slope * a[i] + g(rng);
    }
    const auto got = pearson(a, b);
    const auto ref = oracle::pearson_oracle(a, b);
    wr = std::max(wr, std::abs(got.r - ref.r));
    wp = std::max(wp, std::abs(got.p - ref.p));
  }

  double wi = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = nn(rng), k = kk(rng);
    Eigen::MatrixXd tab(n, k);
    for (int i = 0; i < n; ++i) {
      const double subj = 3.0 * g(rng);
      for (int j = 0; j < k; ++j) tab(i, j) = subj + 0.5 * j + g(rng);
    }
    wi = std::max(wi, std::abs(icc_avg_fixed(tab) - oracle::icc3k_oracle(tab)));
  }

  int offsets_exact = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = nn(rng), k = kk(rng);
    Eigen::MatrixXd tab(n, k);
    std::vector<double> off(static_cast<std::size_t>(k));
    for (auto& v : off) v = 2.0 * g(rng);
    for (int i = 0; i < n; ++i) {
      const double subj = 3.0 + g(rng);
      for (int j = 0; j < k; ++j) tab(i, j) = subj + off[static_cast<std::size_t>(j)];
    }
    offsets_exact += icc_avg_fixed(tab) == 1.0;
  }

  o.pass = affine_ok && wr <= 1e-6 && wp <= 1e-6 && wi <= 1e-9 && offsets_exact == 20;
  o.detail = fmt::format("affine r=+-1,p=0: {}; pearson worst |dr| {:.1e} |dp| {:.1e}; icc worst {:.1e}; "
                         "offset tables exactly 1.0: {}/20",
                         affine_ok ? "yes" : "no", wr, wp, wi, offsets_exact);
  return o;
}

class MaskOracle : public PatchPredictor {
 public:
  explicit MaskOracle(const BinaryMask& m) : mask_(m) {}
  std::vector<float> predict(const Patch& p) const override {
    std::vector<float> out(static_cast<std::size_t>(kPatchVoxels), 0.0f);
    for (std::int64_t k = 0; k < kPatchSize; ++k) {
      for (std::int64_t j = 0; j < kPatchSize; ++j) {
        for (std::int64_t i = 0; i < kPatchSize; ++i) {
          if (p.in_bounds(i, j, k) && mask_.at(p.origin[0] + i, p.origin[1] + j, p.origin[2] + k)) {
            out[static_cast<std::size_t>(Patch::local_index(i, j, k))] = 1.0f;
          }
        }
      }
    }
    return out;
  }

 private:
  const BinaryMask& mask_;
};

class Zero : public PatchPredictor {
 public:
  std::vector<float> predict(const Patch&) const override { return std::vector<float>(kPatchVoxels, 0.0f); }
};

Outcome stitching() {
  Outcome o;
  PhantomSpec spec;
  spec.kind = PhantomKind::kFoldedSheet;
  spec.thickness_mm = 3.0;
  spec.spacing = Vec3::Constant(0.5);
  spec.dims = {120, 112, 116};
  spec.rotation_deg = Vec3(10, 5, 20);
  spec.extent_mm = 25.0;
  const auto ph = generate_phantom(spec);
  const auto intensity = ph.mask.to_volume();
  const MaskOracle oracle(ph.mask);
  std::string parts;
  for (const std::int64_t stride : {16, 32, 64}) {
    const bool eq = stitch(intensity, oracle, {stride, 0.5, false}) == ph.mask;
    o.pass &= eq;
    parts += fmt::format("stride {}: {}; ", stride, eq ? "exact" : "differs");
  }
  const auto empty = stitch(intensity, Zero()).count();
  o.pass &= empty == 0;
  o.detail = fmt::format("{}constant-0 predictor: {} foreground voxels", parts, empty);
  return o;
}

BinaryMask small(const std::vector<int>& on) {
  std::vector<std::uint8_t> bits(27, 0);
  for (const int i : on) bits[static_cast<std::size_t>(i)] = 1;
  return BinaryMask(Grid({3, 3, 3}, Vec3::Ones()), std::move(bits));
}

Outcome interrater() {
  Outcome o;
  std::mt19937_64 rng(113);
  std::vector<BinaryMask> patches;
  for (int i = 0; i < 5; ++i) patches.push_back(oracle::random_mask(rng, {16, 16, 16}, Vec3::Ones(), 0.4));
  const auto same = interrater_dsc({patches, patches});
  const bool identical = same.size() == 1 && same[0].formatted() == "100.00 ± 0.00 %";

  // Hand-counted Dice: 2*2/(4+4) = 50, 2*3/(3+3) = 100, 2*2/(2+6) = 50.
  // Mean 66.6667, sample sd 28.8675.
  const std::vector<BinaryMask> r1{small({0, 1, 2, 3}), small({5, 6, 7}), small({0, 1})};
  const std::vector<BinaryMask> r2{small({2, 3, 4, 5}), small({5, 6, 7}), small({0, 1, 2, 3, 4, 5})};
  const auto f = interrater_dsc({r1, r2});
  const bool fixture = std::abs(f[0].mean - 66.6667) <= 0.01 && std::abs(f[0].sd - 28.8675) <= 0.01;
  o.pass = identical && fixture;
  o.detail = fmt::format("identical raters: \"{}\"; fixture: \"{}\" (expected 66.67 ± 28.87 %)", same[0].formatted(),
                         f[0].formatted());
  return o;
}

Outcome nifti_roundtrip() {
  Outcome o;
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "cortexa_acceptance";
  fs::create_directories(dir);
  std::mt19937_64 rng(127);
  int ok = 0, total = 0;
  const DataType dtypes[3] = {DataType::kUInt8, DataType::kInt16, DataType::kFloat32};
  for (int i = 0; i < 20; ++i) {
    const DataType dtype = dtypes[i % 3];
    const char* ext = (i / 3) % 2 == 0 ? ".nii.gz" : ".nii";
    const Volume v = oracle::random_volume(rng, dtype);
    const auto p1 = (dir / (fmt::format("v{}", i) + ext)).string();
    const auto p2 = (dir / (fmt::format("w{}", i) + ext)).string();
    write_nifti(v, p1);
    const Volume back = read_nifti(p1);
    write_nifti(back, p2);
    const auto h1 = read_nifti_header(p1), h2 = read_nifti_header(p2);
    const bool header = std::memcmp(&h1, &h2, sizeof(NiftiHeader)) == 0;
    const bool voxels = back.dims() == v.dims() && back.dtype() == v.dtype() &&
                        std::memcmp(back.voxels().data(), v.voxels().data(), v.voxels().size_bytes()) == 0;
    const bool affine = back.affine() == v.affine();
    ok += header && voxels && affine;
    ++total;
  }
  o.pass = ok == total;
  o.detail = fmt::format("{}/{} volumes bit-exact (uint8/int16/float32, plain and gzip)", ok, total);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"slab thickness sweep", slab_suite},
      {"hollow sphere and folded sheet thickness", curved_suite},
      {"distance transform exactness", edt_exactness},
      {"skeleton removal rule and coverage", skeleton_properties},
      {"DSC/HD95 against brute force", metric_oracles},
      {"Pearson and ICC against references", statistics},
      {"stitching self-consistency", stitching},
      {"inter-rater harness", interrater},
      {"NIfTI round trip", nifti_roundtrip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    fmt::print("{} {} {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
