#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <vector>

#include "globreg/geometry.hpp"

namespace globreg {

/// Static 3D k-d tree answering exact radius queries over a fixed cloud.
/// Queries are read-only and may run concurrently; a relaxed atomic counter
/// records how many were issued.
class SpatialIndex {
 public:
  static constexpr std::size_t kLeafSize = 16;

  /// Throws Error(kEmptyCloud) on an empty cloud. The index keeps its own copy
  /// of the points.
  explicit SpatialIndex(const PointCloud& cloud);

  SpatialIndex(SpatialIndex&&) noexcept = default;
  SpatialIndex& operator=(SpatialIndex&&) noexcept = default;

  /// Indices s with ||p_s - query|| < radius, ascending. Squared distances
  /// are appended in the same order when `squared_distances` is non-null.
  std::vector<std::uint32_t> radius_search(const Point3& query, double radius,
                                           std::vector<double>* squared_distances = nullptr) const;

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  std::uint64_t query_count() const { return queries_->load(std::memory_order_relaxed); }
  void reset_query_count() { queries_->store(0, std::memory_order_relaxed); }

 private:
  struct Node {
    // Leaf when left == right == kNone; then [begin, end) indexes order_.
    std::uint32_t begin = 0, end = 0;
    std::uint32_t left = kNone, right = kNone;
    int axis = 0;
    double split = 0.0;
    Eigen::AlignedBox3d box;
  };
  static constexpr std::uint32_t kNone = 0xffffffffu;

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::unique_ptr<std::atomic<std::uint64_t>> queries_;
};

inline SpatialIndex build_index(const PointCloud& cloud) { return SpatialIndex(cloud); }

inline std::vector<std::uint32_t> radius_search(const SpatialIndex& index, const Point3& query, double radius) {
  return index.radius_search(query, radius);
}

}  // namespace globreg
