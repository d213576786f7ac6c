#include "globreg/faster_pfh.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "globreg/error.hpp"
#include "globreg/parallel.hpp"

namespace globreg {
namespace {

// Components this close to zero count as ties in the sign convention.
constexpr double kSignTieTolerance = 1e-12;
constexpr double kOrthogonalTolerance = 1e-9;

Point3 orient_upward(const Point3& n) {
  for (int axis : {2, 0, 1}) {
    if (n[axis] > kSignTieTolerance) return n;
    if (n[axis] < -kSignTieTolerance) return -n;
  }
  return n;
}

// Flips n to face `toward`. Directions within round-off of the tangent plane
// keep the upward convention, so planar clouds do not flip at random.
Point3 orient_toward(const Point3& n, const Point3& toward) {
  const double c = n.dot(toward);
  if (std::abs(c) <= kOrthogonalTolerance * toward.norm()) return n;
  return c < 0.0 ? Point3(-n) : n;
}

struct FeatureRange {
  double lo, hi;
};

FeatureRange feature_range(int l) {
  switch (l) {
    case 1: return {-std::numbers::pi, std::numbers::pi};
    case 2:
    case 3: return {-1.0, 1.0};
    default: throw Error(ErrorKind::kInvalidArgument, "feature index must be 1, 2 or 3");
  }
}

}  // namespace

NormalEstimate estimate_normal_pca(std::span<const Point3> neighbors) {
  if (neighbors.size() < 3) throw Error(ErrorKind::kDegenerateNeighborhood, "degenerate neighborhood");
  Point3 mean = Point3::Zero();
  for (const auto& p : neighbors) mean += p;
  mean /= static_cast<double>(neighbors.size());
  Matrix3 cov = Matrix3::Zero();
  for (const auto& p : neighbors) {
    const Point3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(neighbors.size());

  Eigen::SelfAdjointEigenSolver<Matrix3> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kDegenerateNeighborhood, "degenerate neighborhood");
  }
  // ascending from Eigen; clamp round-off negatives
  const Eigen::Vector3d ev = solver.eigenvalues().cwiseMax(0.0);
  const double l1 = ev(2), l2 = ev(1), l3 = ev(0);
  if (!(l1 > 0.0) || l1 <= 1e-300) throw Error(ErrorKind::kDegenerateNeighborhood, "degenerate neighborhood");

  NormalEstimate out;
  out.eigenvalues = Eigen::Vector3d(l1, l2, l3);
  out.linearity = (l1 - l2) / l1;
  out.normal = orient_upward(solver.eigenvectors().col(0).normalized());
  return out;
}

ReliabilityTables estimate_reliable_normals(const PointCloud& cloud, const SpatialIndex& index,
                                            const Params& params) {
  const std::size_t n = cloud.size();
  ReliabilityTables t;
  t.is_valid.assign(n, 0);
  t.normals.assign(n, Point3::Zero());
  t.neighbors.assign(n, {});
  const auto tau_num = static_cast<std::size_t>(params.tau_num);
  const double r_normal = params.r_normal;
  const bool to_centroid = params.orientation == NormalOrientation::kTowardCentroid;
  Point3 centroid = Point3::Zero();
  for (const auto& p : cloud.points) centroid += p;
  if (n > 0) centroid /= static_cast<double>(n);

  parallel_for(n, params.workers, [&](std::size_t q) {
    std::vector<double> sq;
    auto found = index.radius_search(cloud.points[q], params.r_fpfh, &sq);
    if (found.size() < tau_num) return;
    std::vector<Point3> normal_support;
    normal_support.reserve(found.size());
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (std::sqrt(sq[i]) < r_normal) normal_support.push_back(cloud.points[found[i]]);
    }
    if (normal_support.size() < tau_num) return;
    NormalEstimate est;
    try {
      est = estimate_normal_pca(normal_support);
    } catch (const Error&) {
      return;
    }
    if (!(est.linearity < params.tau_lin)) return;
    t.is_valid[q] = 1;
    t.normals[q] = to_centroid ? orient_toward(est.normal, centroid - cloud.points[q]) : est.normal;
    t.neighbors[q] = std::move(found);
  });

  for (std::uint32_t q = 0; q < n; ++q) {
    if (t.is_valid[q]) t.step1_valid.push_back(q);
  }

  // Restrict neighbor lists to indices that received a normal, then drop queries
  // with too few valid neighbors. Repeated until stable so that every listed
  // neighbor keeps a histogram of its own.
  std::vector<std::uint32_t> current = t.step1_valid;
  while (true) {
    for (auto q : current) {
      auto& list = t.neighbors[q];
      std::erase_if(list, [&](std::uint32_t i) { return !t.is_valid[i]; });
    }
    std::vector<std::uint32_t> kept;
    kept.reserve(current.size());
    std::vector<std::uint32_t> dropped;
    for (auto q : current) {
      if (t.neighbors[q].size() < tau_num) {
        dropped.push_back(q);
      } else {
        kept.push_back(q);
      }
    }
    for (auto q : dropped) {
      t.is_valid[q] = 0;
      t.neighbors[q].clear();
    }
    current = std::move(kept);
    if (dropped.empty()) break;
  }
  t.valid = std::move(current);
  return t;
}

AngularFeatures angular_features(const Point3& p_q, const Point3& n_q, const Point3& p_k, const Point3& n_k) {
  const Point3 delta = p_k - p_q;
  const double dist = delta.norm();
  if (!(dist > 0.0)) throw Error(ErrorKind::kCoincidentPoints, "coincident points");
  const Point3 d_qk = delta / dist;
  const Point3 d_kq = (p_q - p_k) / dist;

  // larger cosine <=> smaller angle
  const bool q_is_source = n_q.dot(d_qk) >= n_k.dot(d_kq);
  const Point3& u = q_is_source ? n_q : n_k;
  const Point3& n_b = q_is_source ? n_k : n_q;
  const Point3& d = q_is_source ? d_qk : d_kq;

  const Point3 v = d.cross(u);
  const Point3 w = u.cross(v);
  AngularFeatures f;
  const double y = w.dot(n_b), x = u.dot(n_b);
  f.f1 = (y == 0.0 && x == 0.0) ? 0.0 : std::atan2(y, x);
  if (f.f1 == -std::numbers::pi) f.f1 = std::numbers::pi;
  f.f2 = v.dot(n_b);
  f.f3 = u.dot(d);
  return f;
}

int bin_index(double f, int l, int bins) {
  const FeatureRange r = feature_range(l);
  const double eps = 1e-9 * (r.hi - r.lo);
  const double clamped = std::clamp(f, r.lo, r.hi);
  const int bin = static_cast<int>(std::floor(bins * (clamped - r.lo) / (r.hi + eps - r.lo))) + 1;
  return std::clamp(bin, 1, bins);
}

Histogram compute_spfh(std::uint32_t q, const ReliabilityTables& tables, const PointCloud& cloud, int bins) {
  std::vector<int> counts(3 * static_cast<std::size_t>(bins), 0);
  int effective = 0;
  const Point3& p_q = cloud.points[q];
  const Point3& n_q = tables.normals[q];
  for (auto k : tables.neighbors[q]) {
    if (k == q) continue;
    const AngularFeatures f = angular_features(p_q, n_q, cloud.points[k], tables.normals[k]);
    ++counts[bin_index(f.f1, 1, bins) - 1];
    ++counts[bins + bin_index(f.f2, 2, bins) - 1];
    ++counts[2 * bins + bin_index(f.f3, 3, bins) - 1];
    ++effective;
  }
  Histogram h = Histogram::Zero(3 * bins);
  if (effective == 0) return h;
  const double scale = 100.0 / effective;
  for (int i = 0; i < 3 * bins; ++i) h(i) = counts[i] * scale;
  return h;
}

FpfhDescriptor compute_fpfh(std::uint32_t q, std::span<const Histogram> spfh, const ReliabilityTables& tables,
                            const PointCloud& cloud) {
  FpfhDescriptor out;
  out.owner = q;
  const Histogram& own = spfh[q];
  Histogram blend = Histogram::Zero(own.size());
  int effective = 0;
  for (auto k : tables.neighbors[q]) {
    if (k == q) continue;
    const double omega = (cloud.points[q] - cloud.points[k]).norm();
    blend += spfh[k] / omega;
    ++effective;
  }
  out.signature = effective > 0 ? Histogram(own + blend / effective) : own;
  return out;
}

DescriptorSet extract(const PointCloud& cloud, const Params& params) {
  params.validate();
  const SpatialIndex index(cloud);
  const ReliabilityTables tables = estimate_reliable_normals(cloud, index, params);
  DescriptorSet out;
  out.radius_queries = index.query_count();
  if (tables.valid.empty()) throw Error(ErrorKind::kNoReliablePoints, "no reliable points");

  std::vector<Histogram> spfh(cloud.size());
  parallel_for(tables.valid.size(), params.workers, [&](std::size_t r) {
    const auto q = tables.valid[r];
    spfh[q] = compute_spfh(q, tables, cloud, params.bins);
  });

  out.indices = tables.valid;
  out.features.resize(static_cast<Eigen::Index>(tables.valid.size()), params.descriptor_dim());
  parallel_for(tables.valid.size(), params.workers, [&](std::size_t r) {
    out.features.row(static_cast<Eigen::Index>(r)) =
        compute_fpfh(tables.valid[r], spfh, tables, cloud).signature.transpose();
  });
  return out;
}

}  // namespace globreg
