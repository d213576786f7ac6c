#pragma once

#include <cstdint>

#include "globreg/geometry.hpp"

namespace globreg {

/// Keeps the first point (in input order) of every cubic voxel of side `voxel_size`.
/// Voxel keys are floor(coordinate / voxel_size) per axis.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);
/// Input positions of the points voxel_downsample keeps, ascending.
std::vector<std::uint32_t> voxel_downsample_indices(const PointCloud& cloud, double voxel_size);

/// Copies the listed points (and normals) in the given order.
PointCloud select(const PointCloud& cloud, const std::vector<std::uint32_t>& indices);

struct PlaneFit {
  Point3 normal = Point3::UnitZ();  // unit
  double offset = 0.0;              // plane: normal . x + offset = 0
  std::size_t inliers = 0;
};

/// Best single plane by seeded random consensus; nullopt when fewer than 3 points
/// or every sample was degenerate.
std::optional<PlaneFit> fit_dominant_plane(const PointCloud& cloud, double distance_threshold,
                                           int iterations, std::uint64_t seed);

/// Removes the inliers of the dominant plane when it holds at least
/// `min_plane_fraction` of the points and its normal is within 30 degrees of +z.
/// Otherwise, or when disabled, returns the cloud unchanged.
PointCloud geometric_suppression(const PointCloud& cloud, bool enable, double plane_distance_threshold,
                                 double min_plane_fraction = 0.2, int iterations = 200,
                                 std::uint64_t seed = 0x5eed);
/// Positions geometric_suppression keeps, ascending.
std::vector<std::uint32_t> geometric_suppression_indices(const PointCloud& cloud, bool enable,
                                                         double plane_distance_threshold,
                                                         double min_plane_fraction = 0.2, int iterations = 200,
                                                         std::uint64_t seed = 0x5eed);

}  // namespace globreg
