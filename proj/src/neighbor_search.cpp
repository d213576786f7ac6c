#include "globreg/neighbor_search.hpp"

#include <algorithm>
#include <limits>

#include "globreg/error.hpp"

namespace globreg {

SpatialIndex::SpatialIndex(const PointCloud& cloud)
    : points_(cloud.points), queries_(std::make_unique<std::atomic<std::uint64_t>>(0)) {
  if (points_.empty()) throw Error(ErrorKind::kEmptyCloud, "empty cloud");
  if (points_.size() >= kNone) throw Error(ErrorKind::kInvalidArgument, "cloud too large to index");
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * (points_.size() / kLeafSize + 1));
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::uint32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Eigen::AlignedBox3d box;
  for (std::uint32_t i = begin; i < end; ++i) box.extend(points_[order_[i]]);
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  nodes_[id].box = box;
  if (end - begin <= kLeafSize) return id;

  Eigen::Index axis = 0;
  box.sizes().maxCoeff(&axis);
  if (box.sizes()[axis] <= 0.0) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  nodes_[id].axis = static_cast<int>(axis);
  nodes_[id].split = points_[order_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

std::vector<std::uint32_t> SpatialIndex::radius_search(const Point3& query, double radius,
                                                       std::vector<double>* squared_distances) const {
  queries_->fetch_add(1, std::memory_order_relaxed);
  std::vector<std::uint32_t> found;
  if (!(radius > 0.0)) return found;
  // box test is a conservative prefilter; membership uses the exact norm below
  const double prune_sq = radius * radius * (1.0 + 1e-10);

  std::vector<std::uint32_t> stack;
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.box.squaredExteriorDistance(query) > prune_sq) continue;
    if (node.left == kNone) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t idx = order_[i];
        if ((points_[idx] - query).norm() < radius) found.push_back(idx);
      }
      continue;
    }
    stack.push_back(node.right);
    stack.push_back(node.left);
  }
  std::sort(found.begin(), found.end());
  if (squared_distances) {
    squared_distances->clear();
    squared_distances->reserve(found.size());
    for (auto idx : found) squared_distances->push_back((points_[idx] - query).squaredNorm());
  }
  return found;
}

}  // namespace globreg
