#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace globreg {

using Point3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;

bool is_finite(const Point3& p);

/// Ordered list of points in meters, optionally with unit normals.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<Point3>> normals;

  PointCloud() = default;
  explicit PointCloud(std::vector<Point3> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Point3& operator[](std::size_t i) const { return points[i]; }

  // Throws on non-finite coordinates or malformed normals.
  void validate() const;
};

/// Rigid transform x -> R x + t with R in SO(3).
class Pose {
 public:
  static constexpr double kConstructionTolerance = 1e-6;
  static constexpr double kInternalTolerance = 1e-9;

  Pose() : rotation_(Matrix3::Identity()), translation_(Point3::Zero()) {}

  /// Rejects R with |det R - 1| or ||R^T R - I||_F above 1e-6. Inputs that
  /// pass but drift by more than 1e-9 are projected back onto SO(3).
  Pose(const Matrix3& rotation, const Point3& translation);

  static Pose identity() { return Pose(); }
  static Pose from_matrix(const Matrix4& homogeneous);
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Point3& translation);
  /// Rotation of `angle_rad` about `axis` (normalized internally).
  static Pose from_axis_angle(const Point3& axis, double angle_rad, const Point3& translation);

  const Matrix3& rotation() const { return rotation_; }
  const Point3& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Pose inverse() const;
  /// (*this) after `rhs`: x -> this(rhs(x)).
  Pose compose(const Pose& rhs) const;
  Matrix4 matrix() const;
  Eigen::Quaterniond quaternion() const;

  bool operator==(const Pose& other) const {
    return rotation_ == other.rotation_ && translation_ == other.translation_;
  }

 private:
  Matrix3 rotation_;
  Point3 translation_;
};

Point3 se3_apply(const Pose& pose, const Point3& p);
Pose se3_inverse(const Pose& pose);

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose);

/// Closest rotation to `m` in the Frobenius sense (SVD projection onto SO(3)).
Matrix3 project_to_rotation(const Matrix3& m);

/// Deviation measures used by the Pose invariants.
double orthonormality_error(const Matrix3& r);

struct GncSettings {
  double noise_bound = 0.0;  // defaults to beta when zero
  double factor = 1.4;
  int max_iterations = 100;
  double weight_tolerance = 1e-6;
  double cost_tolerance = 1e-6;
};

struct SuppressionSettings {
  bool enable = false;
  double plane_distance_multiplier = 1.0;  // times voxel size
  double min_plane_fraction = 0.2;
  int iterations = 200;
  std::uint64_t seed = 0x5eed;
};

/// Sign convention for the normals used by the descriptors.
enum class NormalOrientation {
  kUpward,         // n.z >= 0, ties toward +x then +y
  kTowardCentroid  // n points toward the cloud centroid; kUpward when orthogonal
};

/// Every tunable, derived from the voxel size.
struct Params {
  double voxel_size = 0.0;
  double r_normal = 0.0;
  double r_fpfh = 0.0;
  int tau_num = 3;
  double tau_lin = 0.99;
  double beta = 0.0;
  std::size_t n_tau = 3000;
  int bins = 11;
  NormalOrientation orientation = NormalOrientation::kTowardCentroid;
  GncSettings gnc;
  std::size_t tau_valid = 5;
  SuppressionSettings suppression;
  int workers = 0;  // 0 selects hardware concurrency

  /// r_normal = 3.5 v, r_fpfh = 5 v, beta = 1.5 v (scaled by beta_mult).
  static Params from_voxel(double voxel_size, double beta_mult = 1.5);

  double noise_bound() const { return gnc.noise_bound > 0.0 ? gnc.noise_bound : beta; }
  int descriptor_dim() const { return 3 * bins; }

  /// Throws Error(kInvalidArgument) when any invariant is violated.
  void validate() const;
};

}  // namespace globreg
