#include <cmath>
#include <random>

#include "doctest.h"

#include "cortexa/distance.hpp"
#include "oracles.hpp"

using namespace cortexa;

TEST_CASE("single voxel in background") {
  const Grid g({3, 3, 3}, Vec3::Ones());
  std::vector<std::uint8_t> bits(27, 0);
  bits[13] = 1;
  const auto dt = distance_transform(BinaryMask(g, bits));
  CHECK(dt.distance[13] == 1.0f);
  CHECK(dt.distance[0] == 0.0f);
}

TEST_CASE("one-voxel-wide rod of five") {
  const Grid g({7, 1, 1}, Vec3::Ones());
  const BinaryMask m(g, {0, 1, 1, 1, 1, 1, 0});
  const auto dt = distance_transform(m);
  const float expected[7] = {0, 1, 2, 3, 2, 1, 0};
  for (int i = 0; i < 7; ++i) CHECK(dt.distance[i] == expected[i]);
}

TEST_CASE("matches brute force on random anisotropic masks") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> sp(0.2, 2.5);
  std::uniform_real_distribution<double> fill(0.3, 0.97);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto m = oracle::random_mask(rng, {dim(rng), dim(rng), dim(rng)}, Vec3(sp(rng), sp(rng), sp(rng)), fill(rng));
    if (m.count() == m.size()) continue;
    const auto dt = distance_transform(m);
    const auto ref = oracle::brute_force_edt(m);
    double worst = 0.0;
    bool features_ok = true;
    for (std::int64_t i = 0; i < m.size(); ++i) {
      worst = std::max(worst, std::abs(dt.distance[i] - ref[static_cast<std::size_t>(i)]));
      const auto f = dt.feature[i];
      features_ok &= !m[f];
      features_ok &= std::abs(oracle::phys_dist(m.grid(), i, f) - ref[static_cast<std::size_t>(i)]) < 1e-9;
    }
    CHECK(worst < 1e-5);
    CHECK(features_ok);
    ++checked;
  }
  CHECK(checked > 40);
}

TEST_CASE("anisotropic spacing is honoured") {
  const Grid g({1, 1, 5}, Vec3(1.0, 1.0, 0.3));
  const BinaryMask m(g, {0, 1, 1, 1, 0});
  const auto dt = distance_transform(m);
  CHECK(dt.distance[2] == doctest::Approx(0.6));
  CHECK(dt.distance.to_volume().at(0, 0, 1) == doctest::Approx(0.3));
}

TEST_CASE("all-foreground mask is rejected") {
  const Grid g({2, 2, 2}, Vec3::Ones());
  CHECK_THROWS_AS(distance_transform(BinaryMask(g, std::vector<std::uint8_t>(8, 1))), Error);
}

TEST_CASE("empty mask gives zero distance") {
  const auto dt = distance_transform(BinaryMask::empty(Grid({4, 4, 4}, Vec3::Ones())));
  for (const auto d : dt.distance.mm) CHECK(d == 0.0f);
}
