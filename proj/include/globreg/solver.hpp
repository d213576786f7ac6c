#pragma once

#include <span>
#include <vector>

#include "globreg/geometry.hpp"

namespace globreg {

/// A putative source/target point pair.
struct PointPair {
  Point3 src;
  Point3 tgt;
};

/// Closed-form minimizer of sum_k w_k |tgt_k - R src_k - t|^2 over SE(3).
/// Throws Error(kInsufficientSupport) with fewer than 3 positive weights and
/// Error(kRankDeficient) when the weighted source points are collinear.
Pose weighted_procrustes(std::span<const PointPair> pairs, std::span<const double> weights);

struct RegistrationResult {
  Pose pose;
  std::vector<std::uint32_t> inliers;  // weight > 0.5
  std::vector<double> weights;
  bool valid = false;
  int iterations = 0;
};

/// One outer GNC step, recorded for diagnostics.
struct GncIterate {
  double mu = 0.0;
  double cost_before = 0.0;  // surrogate at (previous weights, previous pose), this mu
  double cost_after = 0.0;   // surrogate at (updated weights, refit pose), this mu
  double max_weight_change = 0.0;
};

/// Graduated non-convexity over the truncated least squares cost with bound
/// settings.noise_bound (must be positive). If the weights leave fewer than
/// three supporting pairs the loop stops and the result is invalid.
/// Throws Error(kInsufficientSupport) for fewer than 3 pairs and
/// Error(kSolverDegenerate) when a weighted refit is rank-deficient.
RegistrationResult gnc_solve(std::span<const PointPair> pairs, const GncSettings& settings,
                             std::size_t tau_valid = 5, std::vector<GncIterate>* trace = nullptr);

/// TLS-GNC surrogate: sum_k w_k r_k^2 + mu * bound^2 * (1 - w_k) / (mu + w_k).
double gnc_surrogate_cost(std::span<const PointPair> pairs, std::span<const double> weights, const Pose& pose,
                          double mu, double noise_bound);

/// Closed-form weight minimizing the surrogate for a squared residual.
double gnc_tls_weight(double residual_sq, double mu, double noise_bound);

inline bool validate(const RegistrationResult& result, std::size_t tau_valid) {
  return result.inliers.size() >= tau_valid;
}

}  // namespace globreg
