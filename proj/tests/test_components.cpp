#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"

#include "cortexa/components.hpp"
#include "oracles.hpp"

using namespace cortexa;

namespace {

BinaryMask mask_with(const Dims& dims, const std::vector<Index3>& on) {
  const Grid g(dims, Vec3::Ones());
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(g.size()), 0);
  for (const auto& v : on) bits[static_cast<std::size_t>(g.linear(v))] = 1;
  return BinaryMask(g, std::move(bits));
}

}  // namespace

TEST_CASE("corner-touching voxels depend on connectivity") {
  const auto m = mask_with({3, 3, 3}, {{0, 0, 0}, {1, 1, 1}});
  CHECK(connected_components(m, Connectivity::k6).count() == 2);
  CHECK(connected_components(m, Connectivity::k18).count() == 2);
  CHECK(connected_components(m, Connectivity::k26).count() == 1);
}

TEST_CASE("solid cube is one component") {
  const Grid g({3, 3, 3}, Vec3::Ones());
  const BinaryMask m(g, std::vector<std::uint8_t>(27, 1));
  const auto cc = connected_components(m, Connectivity::k6);
  REQUIRE(cc.count() == 1);
  CHECK(cc.sizes[0] == 27);
  CHECK(std::all_of(cc.labels.voxels().begin(), cc.labels.voxels().end(), [](float x) { return x == 1.0f; }));
}

TEST_CASE("labels are ordered by size, ties by first voxel") {
  // Sizes 1, 3, 1 in scan order.
  const auto m = mask_with({7, 1, 1}, {{0, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}, {6, 0, 0}});
  const auto cc = connected_components(m, Connectivity::k26);
  REQUIRE(cc.count() == 3);
  CHECK(cc.sizes == std::vector<std::int64_t>{3, 1, 1});
  CHECK(cc.labels[2] == 1.0f);
  CHECK(cc.labels[0] == 2.0f);
  CHECK(cc.labels[6] == 3.0f);
  CHECK(cc.labels[1] == 0.0f);
  CHECK(largest_component(m, Connectivity::k26).count() == 3);
}

TEST_CASE("two separate voxels give two components") {
  const auto m = mask_with({4, 1, 1}, {{0, 0, 0}, {3, 0, 0}});
  CHECK(connected_components(m, Connectivity::k26).count() == 2);
}

TEST_CASE("component sizes add up and labels are consistent with adjacency") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = oracle::random_mask(rng, {7, 6, 5}, Vec3::Ones(), 0.35);
    for (const auto c : {Connectivity::k6, Connectivity::k18, Connectivity::k26}) {
      const auto cc = connected_components(m, c);
      CHECK(std::accumulate(cc.sizes.begin(), cc.sizes.end(), std::int64_t{0}) == m.count());
      CHECK(std::is_sorted(cc.sizes.rbegin(), cc.sizes.rend()));
      const Grid& g = m.grid();
      bool adjacent_same = true;
      for (std::int64_t i = 0; i < m.size(); ++i) {
        if (!m[i]) {
          adjacent_same &= cc.labels[i] == 0.0f;
          continue;
        }
        const Index3 v = g.unravel(i);
        for (const auto& o : neighbor_offsets(c)) {
          const Index3 u{v[0] + o[0], v[1] + o[1], v[2] + o[2]};
          if (g.contains(u) && m.at(u)) adjacent_same &= cc.labels[g.linear(u)] == cc.labels[i];
        }
      }
      CHECK(adjacent_same);
    }
  }
}

TEST_CASE("neighbour counts and connectivity parsing") {
  CHECK(neighbor_offsets(Connectivity::k6).size() == 6);
  CHECK(neighbor_offsets(Connectivity::k18).size() == 18);
  CHECK(neighbor_offsets(Connectivity::k26).size() == 26);
  CHECK(connectivity_from_int(18) == Connectivity::k18);
  CHECK_THROWS_AS(connectivity_from_int(8), Error);
}

TEST_CASE("empty mask has no components") {
  const auto m = BinaryMask::empty(Grid({3, 3, 3}, Vec3::Ones()));
  CHECK(connected_components(m, Connectivity::k26).count() == 0);
  CHECK(largest_component(m, Connectivity::k26).count() == 0);
}
