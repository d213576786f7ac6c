#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "globreg/preprocess.hpp"

namespace globreg {
namespace {

bool contains(const PointCloud& c, const Point3& p) {
  return std::find(c.points.begin(), c.points.end(), p) != c.points.end();
}

TEST(VoxelDownsample, KeepsFirstPointOfVoxel) {
  const PointCloud c({Point3(0.1, 0, 0), Point3(0.2, 0, 0)});
  const PointCloud out = voxel_downsample(c, 1.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], Point3(0.1, 0, 0));
}

TEST(VoxelDownsample, EmptyStaysEmpty) {
  EXPECT_TRUE(voxel_downsample(PointCloud{}, 0.5).empty());
}

TEST(VoxelDownsample, UnitCubeCornersAllSurvive) {
  PointCloud c;
  for (int i = 0; i < 8; ++i) c.points.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  EXPECT_EQ(voxel_downsample(c, 0.5).size(), 8u);
}

TEST(VoxelDownsample, NegativeCoordinatesUseFloor) {
  // -0.1 and 0.1 straddle zero: truncation would merge them
  const PointCloud c({Point3(-0.1, 0, 0), Point3(0.1, 0, 0), Point3(-0.9, 0, 0)});
  const auto idx = voxel_downsample_indices(c, 1.0);
  EXPECT_EQ(idx, (std::vector<std::uint32_t>{0, 1}));
}

TEST(VoxelDownsample, SubsetOrderStableAndIdempotent) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  PointCloud c;
  for (int i = 0; i < 5000; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  const auto idx = voxel_downsample_indices(c, 0.4);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  const PointCloud once = voxel_downsample(c, 0.4);
  ASSERT_EQ(once.size(), idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(once[k], c[idx[k]]);
  const PointCloud twice = voxel_downsample(once, 0.4);
  EXPECT_EQ(twice.points, once.points);
}

TEST(VoxelDownsample, AtMostOnePerVoxel) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-2, 2);
  PointCloud c;
  for (int i = 0; i < 3000; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  const PointCloud out = voxel_downsample(c, 0.3);
  std::set<std::tuple<long, long, long>> keys;
  for (const auto& p : out.points) {
    EXPECT_TRUE(keys.emplace(std::floor(p.x() / 0.3), std::floor(p.y() / 0.3), std::floor(p.z() / 0.3)).second);
  }
}

PointCloud floor_and_wall(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 10);
  PointCloud c;
  for (int i = 0; i < 1000; ++i) c.points.emplace_back(u(rng), u(rng), 0.0);
  for (int i = 0; i < 100; ++i) c.points.emplace_back(12.0, u(rng), 0.5 + u(rng));
  return c;
}

TEST(GeometricSuppression, DisabledIsIdentity) {
  std::mt19937_64 rng(1);
  const PointCloud c = floor_and_wall(rng);
  EXPECT_EQ(geometric_suppression(c, false, 0.05).points, c.points);
}

TEST(GeometricSuppression, RemovesTheFloor) {
  std::mt19937_64 rng(2);
  const PointCloud c = floor_and_wall(rng);
  const PointCloud out = geometric_suppression(c, true, 0.05);
  ASSERT_EQ(out.size(), 100u);
  for (std::size_t i = 1000; i < 1100; ++i) EXPECT_TRUE(contains(out, c[i]));
}

TEST(GeometricSuppression, TwoPointsUnchanged) {
  const PointCloud c({Point3(0, 0, 0), Point3(1, 0, 0)});
  EXPECT_EQ(geometric_suppression(c, true, 0.1).points, c.points);
}

TEST(GeometricSuppression, VerticalPlaneIsKept) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 10);
  PointCloud c;
  for (int i = 0; i < 500; ++i) c.points.emplace_back(0.0, u(rng), u(rng));
  EXPECT_EQ(geometric_suppression(c, true, 0.05).points, c.points);
}

TEST(GeometricSuppression, SmallPlaneBelowFractionIsKept) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 10);
  PointCloud c;
  for (int i = 0; i < 50; ++i) c.points.emplace_back(u(rng), u(rng), 0.0);
  for (int i = 0; i < 950; ++i) c.points.emplace_back(u(rng), u(rng), 1 + u(rng));
  EXPECT_EQ(geometric_suppression(c, true, 0.05, 0.2).points, c.points);
}

TEST(GeometricSuppression, DeterministicForSeed) {
  std::mt19937_64 rng(8);
  const PointCloud c = floor_and_wall(rng);
  EXPECT_EQ(geometric_suppression_indices(c, true, 0.05), geometric_suppression_indices(c, true, 0.05));
}

}  // namespace
}  // namespace globreg
