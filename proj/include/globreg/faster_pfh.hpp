#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "globreg/geometry.hpp"
#include "globreg/neighbor_search.hpp"

namespace globreg {

struct NormalEstimate {
  Point3 normal = Point3::UnitZ();
  double linearity = 0.0;
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // descending
};

/// Smallest-eigenvalue direction of the neighborhood covariance, oriented so
/// that n.z >= 0 (ties toward +x, then +y), with linearity (l1 - l2) / l1.
/// Throws Error(kDegenerateNeighborhood) for fewer than 3 points or a zero
/// covariance.
NormalEstimate estimate_normal_pca(std::span<const Point3> neighbors);

/// Output of the neighbor-search / normal-filtering stage.
struct ReliabilityTables {
  std::vector<std::uint32_t> valid;                    // J, ascending
  std::vector<std::uint8_t> is_valid;                  // B
  std::vector<Point3> normals;                         // V (meaningful where B is set)
  std::vector<std::vector<std::uint32_t>> neighbors;   // M, restricted to valid indices
  std::vector<std::uint32_t> step1_valid;              // J before the neighbor-count refinement
};

/// One r_fpfh query per point, normals from the r_normal subset, linearity
/// gate, then removal of queries left with fewer than tau_num valid neighbors.
ReliabilityTables estimate_reliable_normals(const PointCloud& cloud, const SpatialIndex& index,
                                            const Params& params);

struct AngularFeatures {
  double f1 = 0.0;  // (-pi, pi]
  double f2 = 0.0;  // [-1, 1]
  double f3 = 0.0;  // [-1, 1]
};

/// Darboux-frame features of a point pair. The source of the frame is the
/// endpoint whose normal makes the smaller angle with the segment pointing
/// away from it (q on ties). Throws Error(kCoincidentPoints) if p_q == p_k.
AngularFeatures angular_features(const Point3& p_q, const Point3& n_q, const Point3& p_k, const Point3& n_k);

/// 1-based histogram bin of feature `l` (1, 2 or 3) among `bins` bins.
/// Values outside the feature range are clamped.
int bin_index(double f, int l, int bins);

using Histogram = Eigen::VectorXd;

/// Per-feature blocks of `bins` entries, each summing to 100.
Histogram compute_spfh(std::uint32_t q, const ReliabilityTables& tables, const PointCloud& cloud, int bins);

struct FpfhDescriptor {
  std::uint32_t owner = 0;
  Histogram signature;
};

/// `spfh` is indexed by cloud index; only entries for q and its neighbors are read.
FpfhDescriptor compute_fpfh(std::uint32_t q, std::span<const Histogram> spfh, const ReliabilityTables& tables,
                            const PointCloud& cloud);

/// Descriptors of the reliable points, row r belonging to cloud index indices[r].
struct DescriptorSet {
  std::vector<std::uint32_t> indices;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> features;
  std::uint64_t radius_queries = 0;

  std::size_t size() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  int dim() const { return static_cast<int>(features.cols()); }
};

/// Full extraction: index build, reliability tables, SPFH, FPFH.
/// Throws Error(kNoReliablePoints) when nothing survives the filters.
DescriptorSet extract(const PointCloud& cloud, const Params& params);

}  // namespace globreg
