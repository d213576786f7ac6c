// Command-line front end: register, extract, bench, scene.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>

#include "globreg/error.hpp"
#include "globreg/eval.hpp"
#include "globreg/faster_pfh.hpp"
#include "globreg/io.hpp"
#include "globreg/pipeline.hpp"
#include "globreg/preprocess.hpp"

namespace {

constexpr int kExitValid = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;

struct RegisterArgs {
  std::string source, target, json_out;
  double voxel = 0.0;
  double beta_mult = 1.5;
  std::size_t ntau = 3000;
  std::size_t tau_valid = 5;
  bool suppress_ground = false;
  int workers = 0;
};

struct ExtractArgs {
  std::string input, output;
  double voxel = 0.0;
  int workers = 0;
};

struct BenchArgs {
  globreg::BenchmarkConfig config;
  std::string json_out, timings_out;
};

struct SceneArgs {
  std::uint64_t seed = 7;
  std::size_t points = 20000;
  double extent = 10.0;
  double angle_deg = 30.0;
  double translation = 5.0;
  double noise = 0.02;
  double clutter = 0.2;
  std::string source_out, target_out, pose_out;
};

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw globreg::Error(globreg::ErrorKind::kIo, "cannot write " + path);
  out << j.dump(2) << '\n';
}

int run_register(const RegisterArgs& args) {
  const auto src = globreg::read_cloud(args.source);
  const auto tgt = globreg::read_cloud(args.target);
  globreg::Params params = globreg::Params::from_voxel(args.voxel, args.beta_mult);
  params.n_tau = args.ntau;
  params.tau_valid = args.tau_valid;
  params.suppression.enable = args.suppress_ground;
  params.workers = args.workers;
  params.validate();

  const auto result = globreg::register_clouds(src, tgt, params);
  std::cout << globreg::pose_to_text(result.pose());
  std::cout << "inliers: " << result.num_inliers() << '\n';
  std::cout << "valid: " << (result.valid() ? "true" : "false") << '\n';
  if (!result.failure_stage.empty()) {
    std::cout << "failure: " << result.failure_stage << ": " << result.failure_reason << '\n';
  }
  std::cout << std::left << std::setw(18) << "stage" << std::right << std::setw(10) << "count" << std::setw(12)
            << "ms" << '\n';
  for (const auto& s : result.stage_trace) {
    std::cout << std::left << std::setw(18) << s.stage << std::right << std::setw(10) << s.count << std::setw(12)
              << std::fixed << std::setprecision(2) << s.ms << '\n';
  }
  if (!args.json_out.empty()) write_json_file(args.json_out, globreg::to_json(result));
  return result.valid() ? kExitValid : kExitInvalid;
}

int run_extract(const ExtractArgs& args) {
  const auto cloud = globreg::voxel_downsample(globreg::read_cloud(args.input), args.voxel);
  globreg::Params params = globreg::Params::from_voxel(args.voxel);
  params.workers = args.workers;
  const auto descriptors = globreg::extract(cloud, params);
  if (args.output.empty()) {
    globreg::write_descriptors(std::cout, descriptors);
  } else {
    std::ofstream out(args.output);
    if (!out) throw globreg::Error(globreg::ErrorKind::kIo, "cannot write " + args.output);
    globreg::write_descriptors(out, descriptors);
  }
  std::cerr << descriptors.size() << " descriptors from " << cloud.size() << " voxelized points\n";
  return kExitValid;
}

int run_bench(const BenchArgs& args) {
  const auto report = globreg::run_benchmark(args.config);
  report.write_table(std::cout);
  if (!args.json_out.empty()) write_json_file(args.json_out, report.to_json(false));
  if (!args.timings_out.empty()) write_json_file(args.timings_out, report.timing_json());
  return kExitValid;
}

int run_scene(const SceneArgs& args) {
  std::mt19937_64 rng(args.seed);
  globreg::SceneConfig config;
  config.seed = args.seed;
  config.n_points = args.points;
  config.extent = args.extent;
  globreg::Point3 axis(rng() % 1000 + 1.0, rng() % 1000 + 1.0, rng() % 1000 + 1.0);
  globreg::Point3 dir(rng() % 1000 + 1.0, rng() % 1000 + 1.0, rng() % 1000 + 1.0);
  config.pose_gt = globreg::Pose::from_axis_angle(axis, args.angle_deg * std::numbers::pi / 180.0,
                                                  dir.normalized() * args.translation);
  config.noise_sigma = args.noise;
  config.clutter_fraction = args.clutter;
  const auto scene = globreg::generate_scene(config);
  globreg::write_xyz(args.source_out, scene.src);
  globreg::write_xyz(args.target_out, scene.tgt);
  if (!args.pose_out.empty()) {
    std::ofstream out(args.pose_out);
    if (!out) throw globreg::Error(globreg::ErrorKind::kIo, "cannot write " + args.pose_out);
    out << globreg::pose_to_text(scene.pose_gt);
  }
  return kExitValid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global point cloud registration from a single voxel size"};
  app.require_subcommand(1);

  RegisterArgs reg;
  auto* reg_cmd = app.add_subcommand("register", "Estimate the pose mapping --source onto --target");
  reg_cmd->add_option("--source", reg.source, "Source cloud (.xyz or ASCII .ply)")->required()->check(CLI::ExistingFile);
  reg_cmd->add_option("--target", reg.target, "Target cloud (.xyz or ASCII .ply)")->required()->check(CLI::ExistingFile);
  reg_cmd->add_option("--voxel", reg.voxel, "Voxel size in meters")->required()->check(CLI::PositiveNumber);
  reg_cmd->add_flag("--suppress-ground", reg.suppress_ground, "Remove the dominant up-facing plane first");
  reg_cmd->add_option("--beta-mult", reg.beta_mult, "Noise bound as a multiple of the voxel size")
      ->capture_default_str()->check(CLI::PositiveNumber);
  reg_cmd->add_option("--ntau", reg.ntau, "Maximum correspondences kept by the ratio filter")
      ->capture_default_str()->check(CLI::PositiveNumber);
  reg_cmd->add_option("--tau-valid", reg.tau_valid, "Minimum final inliers for a valid result")->capture_default_str();
  reg_cmd->add_option("--json", reg.json_out, "Write the result as JSON");
  reg_cmd->add_option("--workers", reg.workers, "Worker threads (0 = all cores)")->capture_default_str();

  ExtractArgs ext;
  auto* ext_cmd = app.add_subcommand("extract", "Voxelize a cloud and dump its descriptors");
  ext_cmd->add_option("--input", ext.input, "Input cloud")->required()->check(CLI::ExistingFile);
  ext_cmd->add_option("--voxel", ext.voxel, "Voxel size in meters")->required()->check(CLI::PositiveNumber);
  ext_cmd->add_option("--output", ext.output, "Output file (default stdout)");
  ext_cmd->add_option("--workers", ext.workers, "Worker threads (0 = all cores)")->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic registration benchmark");
  bench_cmd->add_option("--seed", bench.config.seed, "Battery seed")->capture_default_str();
  bench_cmd->add_option("--scenes", bench.config.num_scenes, "Scenes per clutter regime")->capture_default_str();
  bench_cmd->add_option("--clutter", bench.config.clutter_regimes, "Clutter fractions, one regime each");
  bench_cmd->add_option("--points", bench.config.n_points, "Points per scene")->capture_default_str();
  bench_cmd->add_option("--extent", bench.config.extent, "Scene extent in meters")->capture_default_str();
  bench_cmd->add_option("--voxel", bench.config.voxel_size, "Voxel size (0 = extent / 50)")->capture_default_str();
  bench_cmd->add_option("--max-rotation", bench.config.max_rotation_deg, "Degrees")->capture_default_str();
  bench_cmd->add_option("--max-translation", bench.config.max_translation_extents, "In scene extents")
      ->capture_default_str();
  bench_cmd->add_option("--tau-valid", bench.config.tau_valid)->capture_default_str();
  bench_cmd->add_flag("--suppress-ground", bench.config.suppress_ground);
  bench_cmd->add_option("--workers", bench.config.workers, "Scenes evaluated concurrently")->capture_default_str();
  bench_cmd->add_option("--json", bench.json_out, "Write the deterministic report JSON");
  bench_cmd->add_option("--timings", bench.timings_out, "Write per-stage timing percentiles JSON");

  SceneArgs scene;
  auto* scene_cmd = app.add_subcommand("scene", "Write a synthetic source/target pair");
  scene_cmd->add_option("--seed", scene.seed)->capture_default_str();
  scene_cmd->add_option("--points", scene.points)->capture_default_str();
  scene_cmd->add_option("--extent", scene.extent)->capture_default_str();
  scene_cmd->add_option("--angle", scene.angle_deg, "Rotation angle in degrees")->capture_default_str();
  scene_cmd->add_option("--translation", scene.translation, "Translation length in meters")->capture_default_str();
  scene_cmd->add_option("--noise", scene.noise, "Target noise sigma in meters")->capture_default_str();
  scene_cmd->add_option("--clutter", scene.clutter, "Target-only clutter fraction")->capture_default_str();
  scene_cmd->add_option("--source-out", scene.source_out)->required();
  scene_cmd->add_option("--target-out", scene.target_out)->required();
  scene_cmd->add_option("--pose-out", scene.pose_out, "Ground-truth 4x4 pose");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*reg_cmd) return run_register(reg);
    if (*ext_cmd) return run_extract(ext);
    if (*bench_cmd) return run_bench(bench);
    if (*scene_cmd) return run_scene(scene);
  } catch (const globreg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
