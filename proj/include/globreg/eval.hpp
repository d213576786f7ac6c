#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "globreg/geometry.hpp"
#include "globreg/matching.hpp"

namespace globreg {

/// Synthetic indoor scene: floor, three walls and axis-aligned boxes.
struct SceneConfig {
  std::uint64_t seed = 1;
  std::size_t n_points = 20000;
  double extent = 10.0;                 // room side length, meters
  Pose pose_gt;                         // maps source coordinates to target coordinates
  double noise_sigma = 0.0;             // per-axis Gaussian noise on the target, meters
  double clutter_fraction = 0.0;        // extra target-only box points, relative to n_points
  std::size_t num_pairs = 0;            // labeled correspondences to emit
  double outlier_ratio = 0.0;           // fraction of those that are outliers
};

struct LabeledPair {
  std::uint32_t src = 0;
  std::uint32_t tgt = 0;
  bool inlier = false;
};

struct Scene {
  PointCloud src;
  PointCloud tgt;
  Pose pose_gt;
  std::vector<LabeledPair> pairs;
};

/// Deterministic for a given config. Target point i (i < src.size()) is the
/// noisy image of source point i; clutter points follow.
Scene generate_scene(const SceneConfig& config);

/// Labeled pairs as correspondences (descriptor fields zeroed).
CorrespondenceSet to_correspondences(const std::vector<LabeledPair>& pairs);

/// Uniform random axis, angle uniform in [0, max_angle_deg], translation of
/// uniform random direction and length uniform in [0, max_translation].
Pose random_pose(std::mt19937_64& rng, double max_angle_deg, double max_translation);

/// Euclidean translation error, meters.
double rte(const Point3& t_est, const Point3& t_gt);
/// Geodesic rotation error, degrees in [0, 180].
double rre(const Matrix3& r_est, const Matrix3& r_gt);

struct BenchmarkConfig {
  std::uint64_t seed = 42;
  std::size_t num_scenes = 50;              // per regime
  std::vector<double> clutter_regimes = {0.0, 0.2, 0.4};
  std::size_t n_points = 20000;
  double extent = 10.0;
  double voxel_size = 0.0;                  // 0 selects extent / 50
  double noise_sigma_voxels = 0.1;          // target noise in voxel units
  double max_rotation_deg = 180.0;
  double max_translation_extents = 10.0;
  double beta_mult = 1.5;
  std::size_t n_tau = 3000;
  std::size_t tau_valid = 5;
  bool suppress_ground = false;
  double rte_threshold = 2.0;               // meters, strict
  double rre_threshold_deg = 5.0;           // degrees, strict
  int workers = 0;                          // scenes evaluated concurrently

  double effective_voxel() const { return voxel_size > 0.0 ? voxel_size : extent / 50.0; }
};

struct SceneOutcome {
  std::size_t regime = 0;
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool valid = false;
  bool success = false;
  double rte = 0.0;
  double rre = 0.0;
  std::size_t num_inliers = 0;
  std::string failure_stage;
  std::map<std::string, double> stage_ms;
};

struct RegimeSummary {
  double clutter = 0.0;
  std::size_t scenes = 0;
  std::size_t valid = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_rte = 0.0;  // over successes only
  double mean_rre = 0.0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<SceneOutcome> scenes;
  std::vector<RegimeSummary> regimes;
  RegimeSummary overall;

  /// Deterministic content only unless `with_timings`.
  nlohmann::json to_json(bool with_timings = false) const;
  /// Per-stage p50 / p90 / max wall time in milliseconds.
  nlohmann::json timing_json() const;
  void write_table(std::ostream& os) const;
};

/// Scene seed for (regime, index), independent of evaluation order.
std::uint64_t scene_seed(std::uint64_t base, std::size_t regime, std::size_t index);

BenchmarkReport run_benchmark(const BenchmarkConfig& config);

}  // namespace globreg
