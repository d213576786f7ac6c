#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "globreg/eval.hpp"

namespace globreg {
namespace {

TEST(Rte, HandCases) {
  EXPECT_EQ(rte(Point3(1, 2, 3), Point3(1, 2, 3)), 0.0);
  EXPECT_DOUBLE_EQ(rte(Point3(0, 0, 0), Point3(3, 4, 0)), 5.0);
  const Point3 a(1.5, -2, 7), b(-0.5, 3, 1);
  EXPECT_DOUBLE_EQ(rte(a, b), std::sqrt(4.0 + 25.0 + 36.0));
}

TEST(Rte, TriangleInequality) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 10);
  for (int i = 0; i < 1000; ++i) {
    const Point3 a(g(rng), g(rng), g(rng)), b(g(rng), g(rng), g(rng)), c(g(rng), g(rng), g(rng));
    EXPECT_LE(rte(a, c), rte(a, b) + rte(b, c) + 1e-12);
  }
}

TEST(Rre, HandCases) {
  const Matrix3 i = Matrix3::Identity();
  EXPECT_EQ(rre(i, i), 0.0);
  const Matrix3 five = Eigen::AngleAxisd(5.0 * std::numbers::pi / 180.0, Point3::UnitZ()).toRotationMatrix();
  EXPECT_NEAR(rre(five, i), 5.0, 1e-9);
  const Matrix3 half = Eigen::AngleAxisd(std::numbers::pi, Point3(1, 1, 0).normalized()).toRotationMatrix();
  EXPECT_NEAR(rre(half, i), 180.0, 1e-6);
}

TEST(Rre, SymmetricAndBounded) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    const Matrix3 a = random_pose(rng, 180, 0).rotation(), b = random_pose(rng, 180, 0).rotation();
    EXPECT_NEAR(rre(a, b), rre(b, a), 1e-9);
    EXPECT_GE(rre(a, b), 0.0);
    EXPECT_LE(rre(a, b), 180.0);
  }
}

TEST(RandomPose, RespectsBounds) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Pose p = random_pose(rng, 30.0, 2.0);
    EXPECT_LE(rre(p.rotation(), Matrix3::Identity()), 30.0 + 1e-9);
    EXPECT_LE(p.translation().norm(), 2.0 + 1e-12);
  }
}

TEST(GenerateScene, NoiselessIdentityCopies) {
  SceneConfig cfg;
  cfg.n_points = 3000;
  const Scene s = generate_scene(cfg);
  EXPECT_EQ(s.src.points, s.tgt.points);
}

TEST(GenerateScene, DeterministicForSeed) {
  SceneConfig cfg;
  cfg.seed = 77;
  cfg.n_points = 2000;
  cfg.noise_sigma = 0.05;
  cfg.clutter_fraction = 0.3;
  cfg.pose_gt = Pose::from_axis_angle(Point3(1, 1, 1), 1.0, Point3(1, 2, 3));
  cfg.num_pairs = 50;
  cfg.outlier_ratio = 0.5;
  const Scene a = generate_scene(cfg), b = generate_scene(cfg);
  EXPECT_EQ(a.src.points, b.src.points);
  EXPECT_EQ(a.tgt.points, b.tgt.points);
  ASSERT_EQ(a.pairs.size(), b.pairs.size());
  for (std::size_t k = 0; k < a.pairs.size(); ++k) {
    EXPECT_EQ(a.pairs[k].src, b.pairs[k].src);
    EXPECT_EQ(a.pairs[k].tgt, b.pairs[k].tgt);
  }
  EXPECT_EQ(a.tgt.size(), 2000u + 600u);
}

TEST(GenerateScene, LabelCountsAndGeometry) {
  SceneConfig cfg;
  cfg.seed = 5;
  cfg.n_points = 4000;
  cfg.pose_gt = Pose::from_axis_angle(Point3(0, 0, 1), 0.3, Point3(5, 0, 0));
  cfg.num_pairs = 200;
  cfg.outlier_ratio = 0.7;
  const Scene s = generate_scene(cfg);
  ASSERT_EQ(s.pairs.size(), 200u);
  std::size_t outliers = 0;
  for (const auto& p : s.pairs) {
    const double err = (s.tgt[p.tgt] - cfg.pose_gt.apply(s.src[p.src])).norm();
    if (p.inlier) {
      EXPECT_LT(err, 1e-9);
    } else {
      ++outliers;
      EXPECT_GT(err, 0.1 * cfg.extent);
    }
  }
  EXPECT_EQ(outliers, 140u);
}

BenchmarkConfig small_battery() {
  BenchmarkConfig cfg;
  cfg.num_scenes = 3;
  cfg.clutter_regimes = {0.0, 0.3};
  cfg.n_points = 8000;
  cfg.workers = 2;
  return cfg;
}

TEST(Benchmark, IdentityBatteryAllSucceed) {
  BenchmarkConfig cfg = small_battery();
  cfg.max_rotation_deg = 0.0;
  cfg.max_translation_extents = 0.0;
  const auto report = run_benchmark(cfg);
  EXPECT_EQ(report.overall.successes, report.overall.scenes);
  EXPECT_DOUBLE_EQ(report.overall.success_rate, 1.0);
}

TEST(Benchmark, SuccessRequiresValidity) {
  BenchmarkConfig cfg = small_battery();
  cfg.tau_valid = 1000000;  // nothing can be valid
  const auto report = run_benchmark(cfg);
  EXPECT_EQ(report.overall.valid, 0u);
  EXPECT_EQ(report.overall.successes, 0u);
  EXPECT_EQ(report.overall.mean_rre, 0.0);
  for (const auto& s : report.scenes) EXPECT_FALSE(s.success);
}

TEST(Benchmark, SuccessClassificationIsStrict) {
  const auto report = run_benchmark(small_battery());
  double sum_rre = 0;
  std::size_t n = 0;
  for (const auto& s : report.scenes) {
    EXPECT_EQ(s.success, s.valid && s.rte < 2.0 && s.rre < 5.0);
    if (s.success) {
      sum_rre += s.rre;
      ++n;
    }
  }
  ASSERT_GT(n, 0u);
  EXPECT_NEAR(report.overall.mean_rre, sum_rre / n, 1e-12);
}

TEST(Benchmark, ReportIsBitIdentical) {
  BenchmarkConfig cfg = small_battery();
  const auto a = run_benchmark(cfg).to_json().dump();
  cfg.workers = 1;
  const auto b = run_benchmark(cfg).to_json().dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("\"ms\""), std::string::npos);
  EXPECT_EQ(a.find("stage_ms"), std::string::npos);
}

TEST(SceneSeed, DependsOnPosition) {
  EXPECT_NE(scene_seed(42, 0, 1), scene_seed(42, 1, 0));
  EXPECT_EQ(scene_seed(42, 2, 3), scene_seed(42, 2, 3));
}

}  // namespace
}  // namespace globreg
