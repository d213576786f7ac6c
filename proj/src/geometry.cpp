#include "globreg/geometry.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

#include "globreg/error.hpp"

namespace globreg {

bool is_finite(const Point3& p) {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

void PointCloud::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!is_finite(points[i])) {
      throw Error(ErrorKind::kInvalidArgument, "non-finite coordinate at point " + std::to_string(i));
    }
  }
  if (!normals) return;
  if (normals->size() != points.size()) {
    throw Error(ErrorKind::kInvalidArgument, "normal count does not match point count");
  }
  for (std::size_t i = 0; i < normals->size(); ++i) {
    if (std::abs((*normals)[i].norm() - 1.0) > 1e-6) {
      throw Error(ErrorKind::kInvalidArgument, "normal " + std::to_string(i) + " is not unit length");
    }
  }
}

double orthonormality_error(const Matrix3& r) {
  return (r.transpose() * r - Matrix3::Identity()).norm();
}

Matrix3 project_to_rotation(const Matrix3& m) {
  Eigen::JacobiSVD<Matrix3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return u * d * v.transpose();
}

Pose::Pose(const Matrix3& rotation, const Point3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !is_finite(translation)) {
    throw Error(ErrorKind::kInvalidArgument, "pose has non-finite entries");
  }
  const double ortho = orthonormality_error(rotation);
  const double det = rotation.determinant();
  if (std::abs(det - 1.0) > kConstructionTolerance || ortho > kConstructionTolerance) {
    throw Error(ErrorKind::kInvalidArgument, "rotation is not in SO(3)");
  }
  if (ortho > kInternalTolerance || std::abs(det - 1.0) > kInternalTolerance) {
    rotation_ = project_to_rotation(rotation);
  }
}

Pose Pose::from_matrix(const Matrix4& homogeneous) {
  const auto bottom = homogeneous.row(3);
  if (std::abs(bottom(0)) > kConstructionTolerance || std::abs(bottom(1)) > kConstructionTolerance ||
      std::abs(bottom(2)) > kConstructionTolerance || std::abs(bottom(3) - 1.0) > kConstructionTolerance) {
    throw Error(ErrorKind::kInvalidArgument, "last row of a homogeneous pose must be 0 0 0 1");
  }
  return Pose(homogeneous.topLeftCorner<3, 3>(), homogeneous.topRightCorner<3, 1>());
}

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Point3& translation) {
  if (q.norm() == 0.0) throw Error(ErrorKind::kInvalidArgument, "zero quaternion");
  return Pose(q.normalized().toRotationMatrix(), translation);
}

Pose Pose::from_axis_angle(const Point3& axis, double angle_rad, const Point3& translation) {
  if (axis.norm() == 0.0) throw Error(ErrorKind::kInvalidArgument, "zero rotation axis");
  return Pose(Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(), translation);
}

Pose Pose::inverse() const {
  const Matrix3 rt = rotation_.transpose();
  return Pose(rt, -(rt * translation_));
}

Pose Pose::compose(const Pose& rhs) const {
  return Pose(rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_);
}

Matrix4 Pose::matrix() const {
  Matrix4 m = Matrix4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Point3 se3_apply(const Pose& pose, const Point3& p) { return pose.apply(p); }

Pose se3_inverse(const Pose& pose) { return pose.inverse(); }

PointCloud transform_cloud(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(pose.apply(p));
  if (cloud.normals) {
    std::vector<Point3> normals;
    normals.reserve(cloud.normals->size());
    for (const auto& n : *cloud.normals) normals.push_back(pose.rotation() * n);
    out.normals = std::move(normals);
  }
  return out;
}

Params Params::from_voxel(double voxel_size, double beta_mult) {
  Params p;
  p.voxel_size = voxel_size;
  p.r_normal = 3.5 * voxel_size;
  p.r_fpfh = 5.0 * voxel_size;
  p.beta = beta_mult * voxel_size;
  return p;
}

void Params::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) fail("voxel size must be positive");
  if (!(r_normal > 0.0) || !(r_fpfh > 0.0)) fail("search radii must be positive");
  if (r_normal > r_fpfh) fail("r_normal must not exceed r_fpfh");
  if (!(tau_lin > 0.0) || tau_lin > 1.0) fail("tau_lin must lie in (0, 1]");
  if (tau_num < 3) fail("tau_num must be at least 3");
  if (n_tau < 1) fail("n_tau must be at least 1");
  if (bins < 2) fail("histogram needs at least 2 bins");
  if (!(beta > 0.0)) fail("beta must be positive");
  if (!(gnc.factor > 1.0)) fail("gnc factor must exceed 1");
  if (gnc.noise_bound < 0.0) fail("gnc noise bound must be positive");
  if (gnc.max_iterations < 1) fail("gnc needs at least one iteration");
  if (suppression.iterations < 1) fail("suppression needs at least one iteration");
  if (suppression.min_plane_fraction < 0.0 || suppression.min_plane_fraction > 1.0) {
    fail("min_plane_fraction must lie in [0, 1]");
  }
}

}  // namespace globreg
