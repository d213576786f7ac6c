#include "globreg/solver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "globreg/error.hpp"

namespace globreg {

Pose weighted_procrustes(std::span<const PointPair> pairs, std::span<const double> weights) {
  if (pairs.size() != weights.size()) throw Error(ErrorKind::kInvalidArgument, "one weight per pair required");
  std::size_t support = 0;
  double total = 0.0;
  Point3 src_mean = Point3::Zero(), tgt_mean = Point3::Zero();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double w = weights[k];
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::kInvalidArgument, "weights must be finite and non-negative");
    if (w == 0.0) continue;
    ++support;
    total += w;
    src_mean += w * pairs[k].src;
    tgt_mean += w * pairs[k].tgt;
  }
  if (support < 3) throw Error(ErrorKind::kInsufficientSupport, "insufficient support");
  src_mean /= total;
  tgt_mean /= total;

  Matrix3 cross = Matrix3::Zero();
  Matrix3 scatter = Matrix3::Zero();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    const Point3 a = pairs[k].src - src_mean;
    const Point3 b = pairs[k].tgt - tgt_mean;
    cross.noalias() += w * a * b.transpose();
    scatter.noalias() += w * a * a.transpose();
  }
  const Eigen::Vector3d spread = Eigen::SelfAdjointEigenSolver<Matrix3>(scatter, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(spread(2) > 0.0) || spread(1) <= 1e-12 * spread(2)) throw Error(ErrorKind::kRankDeficient, "rank-deficient");

  Eigen::JacobiSVD<Matrix3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix3& u = svd.matrixU();
  const Matrix3& v = svd.matrixV();
  Matrix3 d = Matrix3::Identity();
  d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Matrix3 rotation = v * d * u.transpose();
  return Pose(rotation, tgt_mean - rotation * src_mean);
}

double gnc_tls_weight(double residual_sq, double mu, double noise_bound) {
  const double bound_sq = noise_bound * noise_bound;
  if (residual_sq <= mu / (mu + 1.0) * bound_sq) return 1.0;
  if (residual_sq >= (mu + 1.0) / mu * bound_sq) return 0.0;
  const double w = noise_bound * std::sqrt(mu * (mu + 1.0)) / std::sqrt(residual_sq) - mu;
  return std::clamp(w, 0.0, 1.0);
}

double gnc_surrogate_cost(std::span<const PointPair> pairs, std::span<const double> weights, const Pose& pose,
                          double mu, double noise_bound) {
  const double bound_sq = noise_bound * noise_bound;
  double cost = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const double r_sq = (pairs[k].tgt - pose.apply(pairs[k].src)).squaredNorm();
    const double w = weights[k];
    cost += w * r_sq + mu * bound_sq * (1.0 - w) / (mu + w);
  }
  return cost;
}

namespace {

std::vector<double> squared_residuals(std::span<const PointPair> pairs, const Pose& pose) {
  std::vector<double> r(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) r[k] = (pairs[k].tgt - pose.apply(pairs[k].src)).squaredNorm();
  return r;
}

Pose refit(std::span<const PointPair> pairs, std::span<const double> weights) {
  try {
    return weighted_procrustes(pairs, weights);
  } catch (const Error& e) {
    throw Error(ErrorKind::kSolverDegenerate, std::string("solver degenerate: ") + e.what());
  }
}

}  // namespace

RegistrationResult gnc_solve(std::span<const PointPair> pairs, const GncSettings& settings, std::size_t tau_valid,
                             std::vector<GncIterate>* trace) {
  if (pairs.size() < 3) throw Error(ErrorKind::kInsufficientSupport, "insufficient support");
  if (!(settings.noise_bound > 0.0)) throw Error(ErrorKind::kInvalidArgument, "gnc noise bound must be positive");
  if (!(settings.factor > 1.0)) throw Error(ErrorKind::kInvalidArgument, "gnc factor must exceed 1");
  const double bound = settings.noise_bound;
  const double bound_sq = bound * bound;

  RegistrationResult result;
  result.weights.assign(pairs.size(), 1.0);
  result.pose = refit(pairs, result.weights);
  result.iterations = 1;
  auto residuals = squared_residuals(pairs, result.pose);

  const double max_residual_sq = *std::max_element(residuals.begin(), residuals.end());
  const double denom = 2.0 * max_residual_sq - bound_sq;
  if (denom > 0.0) {
    double mu = std::max(bound_sq / denom, 1e-6);
    double prev_cost = std::numeric_limits<double>::infinity();
    std::vector<double> next(pairs.size());
    for (int it = 0; it < settings.max_iterations; ++it) {
      GncIterate step;
      step.mu = mu;
      if (trace) step.cost_before = gnc_surrogate_cost(pairs, result.weights, result.pose, mu, bound);

      std::size_t support = 0;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        next[k] = gnc_tls_weight(residuals[k], mu, bound);
        step.max_weight_change = std::max(step.max_weight_change, std::abs(next[k] - result.weights[k]));
        if (next[k] > 0.0) ++support;
      }
      result.weights = next;
      if (support < 3) break;  // no consensus left to fit

      result.pose = refit(pairs, result.weights);
      result.iterations = it + 2;
      residuals = squared_residuals(pairs, result.pose);

      double cost = 0.0;
      for (std::size_t k = 0; k < pairs.size(); ++k) cost += result.weights[k] * residuals[k];
      if (trace) {
        step.cost_after = gnc_surrogate_cost(pairs, result.weights, result.pose, mu, bound);
        trace->push_back(step);
      }
      const double cost_change = std::abs(cost - prev_cost);
      prev_cost = cost;
      mu *= settings.factor;
      if (step.max_weight_change < settings.weight_tolerance || cost_change < settings.cost_tolerance) break;
    }
  }

  for (std::uint32_t k = 0; k < result.weights.size(); ++k) {
    if (result.weights[k] > 0.5) result.inliers.push_back(k);
  }
  result.valid = validate(result, tau_valid);
  return result;
}

}  // namespace globreg
