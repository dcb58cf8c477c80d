#include <algorithm>
#include <limits>
#include <vector>

#include "doctest.h"
#include "geokrige/spatial_index.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace geokrige;

namespace {

void check_matches_brute(const SpatialDataset& ds, const Location& center,
                         double radius, std::size_t max_count) {
  SpatialIndex index(ds);
  const auto got = index.neighbors_within(center, radius, max_count);
  const auto want = oracle::neighbors_brute(ds, center, radius, max_count);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].index == want[i].index);
    CHECK(got[i].dist == want[i].dist);
    CHECK(got[i].point_id == want[i].point_id);
  }
}

}  // namespace

TEST_CASE("radius queries equal a brute-force scan") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto uniform = testutil::random_dataset(300, 5000.0, seed);
    const auto clustered = testutil::clustered_dataset(300, 5000.0, seed + 100);
    for (const auto* ds : {&uniform, &clustered}) {
      for (double radius : {0.0, 150.0, 900.0, 5000.0}) {
        for (std::size_t cap : {std::size_t{0}, std::size_t{7}, std::size_t{50}}) {
          check_matches_brute(*ds, {2500.0, 2500.0}, radius, cap);
          check_matches_brute(*ds, {0.0, 0.0}, radius, cap);
          check_matches_brute(*ds, {-310.0, 5990.0}, radius, cap);
        }
      }
    }
  }
}

TEST_CASE("infinite radius returns the whole dataset") {
  const auto ds = testutil::random_dataset(120, 1000.0, 5);
  SpatialIndex index(ds);
  const auto all = index.neighbors_within(
      {500.0, 500.0}, std::numeric_limits<double>::infinity(), 0);
  CHECK(all.size() == ds.size());
  const auto capped = index.neighbors_within(
      {500.0, 500.0}, std::numeric_limits<double>::infinity(), 10);
  CHECK(capped.size() == 10);
}

TEST_CASE("equidistant ties order by point_id then variable_id") {
  SpatialDataset ds;
  // Four points on a circle of radius 100 around the origin, ids shuffled.
  ds.add({7, {100.0, 0.0}, 1.0, 0});
  ds.add({3, {-100.0, 0.0}, 2.0, 0});
  ds.add({5, {0.0, 100.0}, 3.0, 1});
  ds.add({5, {0.0, -100.0}, 4.0, 0});
  SpatialIndex index(ds);
  const auto got = index.neighbors_within({0.0, 0.0}, 150.0, 0);
  REQUIRE(got.size() == 4);
  CHECK(got[0].point_id == 3);
  CHECK(got[1].point_id == 5);
  CHECK(got[1].variable_id == 0);
  CHECK(got[2].point_id == 5);
  CHECK(got[2].variable_id == 1);
  CHECK(got[3].point_id == 7);
}

TEST_CASE("duplicate locations are all reported") {
  SpatialDataset ds;
  ds.add({0, {10.0, 10.0}, 1.0, 0});
  ds.add({1, {10.0, 10.0}, 2.0, 0});
  ds.add({2, {40.0, 10.0}, 3.0, 0});
  SpatialIndex index(ds);
  const auto got = index.neighbors_within({10.0, 10.0}, 5.0, 0);
  REQUIRE(got.size() == 2);
  CHECK(got[0].dist == 0.0);
  CHECK(got[1].dist == 0.0);
}

TEST_CASE("translation by representable offsets preserves the neighbor list") {
  // Coordinates and shifts are small integers, so translated distances are
  // computed from exactly shifted operands.
  const auto base = testutil::random_dataset(150, 100.0, 77);
  SpatialDataset shifted;
  const double dx = 4096.0, dy = -2048.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    auto p = base[i];
    p.loc.x += dx;
    p.loc.y += dy;
    shifted.add(p);
  }
  SpatialIndex a(base), b(shifted);
  const auto na = a.neighbors_within({50.0, 50.0}, 30.0, 0);
  const auto nb = b.neighbors_within({50.0 + dx, 50.0 + dy}, 30.0, 0);
  REQUIRE(na.size() == nb.size());
  for (std::size_t i = 0; i < na.size(); ++i) CHECK(na[i].index == nb[i].index);
}

TEST_CASE("for_each_within visits exactly the in-radius points") {
  const auto ds = testutil::clustered_dataset(200, 2000.0, 9);
  SpatialIndex index(ds);
  const Location center{777.0, 1234.0};
  const double radius = 350.0;
  std::vector<std::size_t> seen;
  index.for_each_within(center, radius,
                        [&](std::size_t i, double) { seen.push_back(i); });
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
  auto want = oracle::neighbors_brute(ds, center, radius, 0);
  std::vector<std::size_t> want_idx;
  for (const auto& n : want) want_idx.push_back(n.index);
  std::sort(want_idx.begin(), want_idx.end());
  CHECK(seen == want_idx);
}

TEST_CASE("an empty dataset cannot be indexed") {
  SpatialDataset empty;
  CHECK_THROWS_AS(SpatialIndex{empty}, std::invalid_argument);
}

TEST_CASE("negative radius yields no neighbors") {
  const auto ds = testutil::random_dataset(10, 100.0, 3);
  SpatialIndex index(ds);
  CHECK(index.neighbors_within({50.0, 50.0}, -1.0, 0).empty());
}
