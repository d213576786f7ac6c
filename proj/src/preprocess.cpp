#include "globreg/preprocess.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include "globreg/error.hpp"

namespace globreg {
namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

VoxelKey voxel_key(const Point3& p, double inv_voxel) {
  return {static_cast<std::int64_t>(std::floor(p.x() * inv_voxel)),
          static_cast<std::int64_t>(std::floor(p.y() * inv_voxel)),
          static_cast<std::int64_t>(std::floor(p.z() * inv_voxel))};
}

}  // namespace

std::vector<std::uint32_t> voxel_downsample_indices(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error(ErrorKind::kInvalidArgument, "voxel size must be positive");
  std::vector<std::uint32_t> kept;
  const double inv = 1.0 / voxel_size;
  std::unordered_set<VoxelKey, VoxelKeyHash> seen;
  seen.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (seen.insert(voxel_key(cloud.points[i], inv)).second) kept.push_back(static_cast<std::uint32_t>(i));
  }
  return kept;
}

PointCloud select(const PointCloud& cloud, const std::vector<std::uint32_t>& indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  for (auto i : indices) out.points.push_back(cloud.points[i]);
  if (cloud.normals) {
    std::vector<Point3> normals;
    normals.reserve(indices.size());
    for (auto i : indices) normals.push_back((*cloud.normals)[i]);
    out.normals = std::move(normals);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  return select(cloud, voxel_downsample_indices(cloud, voxel_size));
}

std::optional<PlaneFit> fit_dominant_plane(const PointCloud& cloud, double distance_threshold,
                                           int iterations, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (n < 3) return std::nullopt;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::optional<PlaneFit> best;
  for (int it = 0; it < iterations; ++it) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    std::size_t k = pick(rng);
    if (i == j || j == k || i == k) continue;
    const Point3& a = cloud.points[i];
    Point3 normal = (cloud.points[j] - a).cross(cloud.points[k] - a);
    const double len = normal.norm();
    if (len < 1e-12) continue;
    normal /= len;
    const double offset = -normal.dot(a);
    std::size_t count = 0;
    for (const auto& p : cloud.points) {
      if (std::abs(normal.dot(p) + offset) <= distance_threshold) ++count;
    }
    if (!best || count > best->inliers) best = PlaneFit{normal, offset, count};
  }
  return best;
}

std::vector<std::uint32_t> geometric_suppression_indices(const PointCloud& cloud, bool enable,
                                                         double plane_distance_threshold, double min_plane_fraction,
                                                         int iterations, std::uint64_t seed) {
  std::vector<std::uint32_t> kept(cloud.size());
  for (std::uint32_t i = 0; i < kept.size(); ++i) kept[i] = i;
  if (!enable || cloud.size() < 3) return kept;
  const auto plane = fit_dominant_plane(cloud, plane_distance_threshold, iterations, seed);
  if (!plane) return kept;
  const double fraction = static_cast<double>(plane->inliers) / static_cast<double>(cloud.size());
  const double cos_limit = std::cos(30.0 * std::numbers::pi / 180.0);
  // plane normals are unsigned, so compare against both +z and -z
  if (fraction < min_plane_fraction || std::abs(plane->normal.z()) < cos_limit) return kept;
  std::erase_if(kept, [&](std::uint32_t i) {
    return std::abs(plane->normal.dot(cloud.points[i]) + plane->offset) <= plane_distance_threshold;
  });
  return kept;
}

PointCloud geometric_suppression(const PointCloud& cloud, bool enable, double plane_distance_threshold,
                                 double min_plane_fraction, int iterations, std::uint64_t seed) {
  if (!enable) return cloud;
  return select(cloud, geometric_suppression_indices(cloud, enable, plane_distance_threshold, min_plane_fraction,
                                                     iterations, seed));
}

}  // namespace globreg
