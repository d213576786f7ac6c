#include "globreg/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "globreg/error.hpp"
#include "globreg/parallel.hpp"
#include "globreg/pipeline.hpp"

namespace globreg {
namespace {

// Parallelogram patch: origin + s * edge_a + t * edge_b for s, t in [0, 1].
struct Patch {
  Point3 origin;
  Point3 edge_a;
  Point3 edge_b;

  double area() const { return edge_a.cross(edge_b).norm(); }
};

void add_box(std::vector<Patch>& patches, const Point3& lo, const Point3& size) {
  const Point3 ex(size.x(), 0, 0), ey(0, size.y(), 0), ez(0, 0, size.z());
  patches.push_back({lo + ez, ex, ey});       // top
  patches.push_back({lo, ex, ez});            // y = lo
  patches.push_back({lo + ey, ex, ez});       // y = hi
  patches.push_back({lo, ey, ez});            // x = lo
  patches.push_back({lo + ex, ey, ez});       // x = hi
}

Point3 random_box_size(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> footprint(0.05 * extent, 0.2 * extent);
  std::uniform_real_distribution<double> height(0.05 * extent, 0.3 * extent);
  return {footprint(rng), footprint(rng), height(rng)};
}

Point3 random_box_corner(std::mt19937_64& rng, double extent, const Point3& size) {
  const double half = extent / 2.0;
  std::uniform_real_distribution<double> x(-half, half - size.x());
  std::uniform_real_distribution<double> y(-half, half - size.y());
  return {x(rng), y(rng), 0.0};
}

std::vector<Point3> sample_patches(std::mt19937_64& rng, const std::vector<Patch>& patches, std::size_t count) {
  std::vector<double> cumulative;
  cumulative.reserve(patches.size());
  double total = 0.0;
  for (const auto& p : patches) {
    total += p.area();
    cumulative.push_back(total);
  }
  std::uniform_real_distribution<double> pick(0.0, total);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Point3> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double r = pick(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    if (it == cumulative.end()) --it;
    const Patch& p = patches[static_cast<std::size_t>(it - cumulative.begin())];
    const double s = unit(rng), t = unit(rng);
    out.push_back(p.origin + s * p.edge_a + t * p.edge_b);
  }
  return out;
}

// Braced init fixes the draw order (constructor arguments have none).
Point3 gaussian_vector(std::mt19937_64& rng, std::normal_distribution<double>& gauss) {
  const std::array<double, 3> v{gauss(rng), gauss(rng), gauss(rng)};
  return {v[0], v[1], v[2]};
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  return values[std::clamp<std::size_t>(rank, 1, values.size()) - 1];
}

RegimeSummary summarize(const std::vector<const SceneOutcome*>& outcomes, double clutter) {
  RegimeSummary s;
  s.clutter = clutter;
  s.scenes = outcomes.size();
  double sum_rte = 0.0, sum_rre = 0.0;
  for (const auto* o : outcomes) {
    if (o->valid) ++s.valid;
    if (!o->success) continue;
    ++s.successes;
    sum_rte += o->rte;
    sum_rre += o->rre;
  }
  if (s.scenes > 0) s.success_rate = static_cast<double>(s.successes) / static_cast<double>(s.scenes);
  if (s.successes > 0) {
    s.mean_rte = sum_rte / static_cast<double>(s.successes);
    s.mean_rre = sum_rre / static_cast<double>(s.successes);
  }
  return s;
}

nlohmann::json summary_json(const RegimeSummary& s) {
  return {{"clutter", s.clutter},       {"scenes", s.scenes},       {"valid", s.valid},
          {"successes", s.successes},   {"success_rate", s.success_rate},
          {"mean_rte_m", s.mean_rte},   {"mean_rre_deg", s.mean_rre}};
}

}  // namespace

Scene generate_scene(const SceneConfig& config) {
  if (!(config.extent > 0.0)) throw Error(ErrorKind::kInvalidArgument, "scene extent must be positive");
  if (config.outlier_ratio < 0.0 || config.outlier_ratio > 1.0) {
    throw Error(ErrorKind::kInvalidArgument, "outlier ratio must lie in [0, 1]");
  }
  std::mt19937_64 rng(config.seed);
  const double e = config.extent;
  const double half = e / 2.0;
  const double wall = 0.3 * e;

  std::vector<Patch> patches;
  patches.push_back({Point3(-half, -half, 0), Point3(e, 0, 0), Point3(0, e, 0)});      // floor
  patches.push_back({Point3(-half, -half, 0), Point3(0, e, 0), Point3(0, 0, wall)});   // x = -half
  patches.push_back({Point3(half, -half, 0), Point3(0, e, 0), Point3(0, 0, wall)});    // x = +half
  patches.push_back({Point3(-half, half, 0), Point3(e, 0, 0), Point3(0, 0, wall)});    // y = +half
  for (int b = 0; b < 10; ++b) {
    const Point3 size = random_box_size(rng, e);
    add_box(patches, random_box_corner(rng, e, size), size);
  }

  Scene scene;
  scene.pose_gt = config.pose_gt;
  scene.src.points = sample_patches(rng, patches, config.n_points);

  std::normal_distribution<double> noise(0.0, 1.0);
  scene.tgt.points.reserve(scene.src.size());
  for (const auto& p : scene.src.points) {
    Point3 q = config.pose_gt.apply(p);
    if (config.noise_sigma > 0.0) q += config.noise_sigma * gaussian_vector(rng, noise);
    scene.tgt.points.push_back(q);
  }

  const auto clutter_count = static_cast<std::size_t>(std::llround(config.clutter_fraction * config.n_points));
  if (clutter_count > 0) {
    std::vector<Patch> clutter;
    for (int b = 0; b < 3; ++b) {
      const Point3 size = random_box_size(rng, e);
      add_box(clutter, random_box_corner(rng, e, size), size);
    }
    for (const auto& p : sample_patches(rng, clutter, clutter_count)) {
      scene.tgt.points.push_back(config.pose_gt.apply(p));
    }
  }

  if (config.num_pairs > 0) {
    if (config.num_pairs > scene.src.size()) throw Error(ErrorKind::kInvalidArgument, "more pairs than points");
    const auto n_out = static_cast<std::size_t>(std::llround(config.outlier_ratio * config.num_pairs));
    const std::size_t n_in = config.num_pairs - n_out;
    std::vector<std::uint32_t> src_ids(scene.src.size());
    std::iota(src_ids.begin(), src_ids.end(), 0u);
    std::shuffle(src_ids.begin(), src_ids.end(), rng);
    src_ids.resize(config.num_pairs);

    std::set<std::uint32_t> used_tgt;
    for (std::size_t k = 0; k < n_in; ++k) {
      scene.pairs.push_back({src_ids[k], src_ids[k], true});
      used_tgt.insert(src_ids[k]);
    }
    std::uniform_int_distribution<std::uint32_t> pick_tgt(0, static_cast<std::uint32_t>(scene.tgt.size() - 1));
    const double min_offset = 0.1 * e;
    for (std::size_t k = n_in; k < config.num_pairs; ++k) {
      const Point3 image = config.pose_gt.apply(scene.src.points[src_ids[k]]);
      std::uint32_t j = 0;
      for (int attempt = 0;; ++attempt) {
        j = pick_tgt(rng);
        if (used_tgt.count(j) || j == src_ids[k]) continue;
        if ((scene.tgt.points[j] - image).norm() > min_offset || attempt > 1000) break;
      }
      used_tgt.insert(j);
      scene.pairs.push_back({src_ids[k], j, false});
    }
    std::shuffle(scene.pairs.begin(), scene.pairs.end(), rng);
  }
  return scene;
}

CorrespondenceSet to_correspondences(const std::vector<LabeledPair>& pairs) {
  CorrespondenceSet out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    Correspondence c;
    c.src = p.src;
    c.tgt = p.tgt;
    c.d2 = 0.0;
    out.push_back(c);
  }
  return out;
}

Pose random_pose(std::mt19937_64& rng, double max_angle_deg, double max_translation) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Point3 axis;
  do {
    axis = gaussian_vector(rng, gauss);
  } while (axis.norm() < 1e-9);
  const double angle = unit(rng) * max_angle_deg * std::numbers::pi / 180.0;
  Point3 dir;
  do {
    dir = gaussian_vector(rng, gauss);
  } while (dir.norm() < 1e-9);
  const Point3 translation = dir.normalized() * (unit(rng) * max_translation);
  return Pose::from_axis_angle(axis, angle, translation);
}

double rte(const Point3& t_est, const Point3& t_gt) { return (t_gt - t_est).norm(); }

double rre(const Matrix3& r_est, const Matrix3& r_gt) {
  const double c = std::clamp(((r_est.transpose() * r_gt).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::abs(std::acos(c)) * 180.0 / std::numbers::pi;
}

std::uint64_t scene_seed(std::uint64_t base, std::size_t regime, std::size_t index) {
  // splitmix64 over the combined key
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (1 + regime * 1000003ULL + index);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  BenchmarkReport report;
  report.config = config;
  const double voxel = config.effective_voxel();
  const std::size_t total = config.num_scenes * config.clutter_regimes.size();
  report.scenes.resize(total);

  parallel_for(total, config.workers, [&](std::size_t job) {
    const std::size_t regime = job / config.num_scenes;
    const std::size_t index = job % config.num_scenes;
    SceneOutcome& out = report.scenes[job];
    out.regime = regime;
    out.index = index;
    out.seed = scene_seed(config.seed, regime, index);

    std::mt19937_64 rng(out.seed);
    SceneConfig sc;
    sc.seed = rng();
    sc.n_points = config.n_points;
    sc.extent = config.extent;
    sc.pose_gt = random_pose(rng, config.max_rotation_deg, config.max_translation_extents * config.extent);
    sc.noise_sigma = config.noise_sigma_voxels * voxel;
    sc.clutter_fraction = config.clutter_regimes[regime];
    const Scene scene = generate_scene(sc);

    Params params = Params::from_voxel(voxel, config.beta_mult);
    params.n_tau = config.n_tau;
    params.tau_valid = config.tau_valid;
    params.suppression.enable = config.suppress_ground;
    params.workers = 1;
    const PipelineResult result = register_clouds(scene.src, scene.tgt, params);

    out.valid = result.valid();
    out.num_inliers = result.num_inliers();
    out.failure_stage = result.failure_stage;
    out.rte = rte(result.pose().translation(), scene.pose_gt.translation());
    out.rre = rre(result.pose().rotation(), scene.pose_gt.rotation());
    out.success = out.valid && out.rte < config.rte_threshold && out.rre < config.rre_threshold_deg;
    for (const auto& s : result.stage_trace) out.stage_ms[s.stage] = s.ms;
  });

  std::vector<const SceneOutcome*> all;
  for (std::size_t r = 0; r < config.clutter_regimes.size(); ++r) {
    std::vector<const SceneOutcome*> members;
    for (const auto& o : report.scenes) {
      if (o.regime == r) members.push_back(&o);
    }
    report.regimes.push_back(summarize(members, config.clutter_regimes[r]));
  }
  for (const auto& o : report.scenes) all.push_back(&o);
  report.overall = summarize(all, -1.0);
  return report;
}

nlohmann::json BenchmarkReport::to_json(bool with_timings) const {
  nlohmann::json scenes_json = nlohmann::json::array();
  for (const auto& o : scenes) {
    nlohmann::json j = {{"regime", o.regime}, {"index", o.index},           {"seed", o.seed},
                        {"valid", o.valid},   {"success", o.success},       {"rte_m", o.rte},
                        {"rre_deg", o.rre},   {"num_inliers", o.num_inliers}, {"failure_stage", o.failure_stage}};
    scenes_json.push_back(j);
  }
  nlohmann::json regimes_json = nlohmann::json::array();
  for (const auto& r : regimes) regimes_json.push_back(summary_json(r));
  nlohmann::json overall_json = summary_json(overall);
  overall_json.erase("clutter");

  nlohmann::json out = {
      {"config",
       {{"seed", config.seed},
        {"num_scenes", config.num_scenes},
        {"clutter_regimes", config.clutter_regimes},
        {"n_points", config.n_points},
        {"extent_m", config.extent},
        {"voxel_m", config.effective_voxel()},
        {"noise_sigma_voxels", config.noise_sigma_voxels},
        {"max_rotation_deg", config.max_rotation_deg},
        {"max_translation_extents", config.max_translation_extents},
        {"beta_mult", config.beta_mult},
        {"n_tau", config.n_tau},
        {"tau_valid", config.tau_valid},
        {"suppress_ground", config.suppress_ground}}},
      {"criteria",
       {{"rte_below_m", config.rte_threshold},
        {"rre_below_deg", config.rre_threshold_deg},
        {"comparison", "strict; a scene counts only if valid and both errors are strictly below"},
        {"means", "over successful scenes only"}}},
      {"regimes", regimes_json},
      {"overall", overall_json},
      {"scenes", scenes_json},
  };
  if (with_timings) out["timings_ms"] = timing_json();
  return out;
}

nlohmann::json BenchmarkReport::timing_json() const {
  std::map<std::string, std::vector<double>> by_stage;
  for (const auto& o : scenes) {
    for (const auto& [stage, ms] : o.stage_ms) by_stage[stage].push_back(ms);
  }
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [stage, values] : by_stage) {
    out[stage] = {{"p50", percentile(values, 0.5)},
                  {"p90", percentile(values, 0.9)},
                  {"max", percentile(values, 1.0)}};
  }
  return out;
}

void BenchmarkReport::write_table(std::ostream& os) const {
  const auto flags = os.flags();
  os << std::left << std::setw(10) << "clutter" << std::right << std::setw(8) << "scenes" << std::setw(8) << "valid"
     << std::setw(10) << "success" << std::setw(10) << "rate" << std::setw(14) << "mean RTE m" << std::setw(14)
     << "mean RRE deg" << '\n';
  auto row = [&](const std::string& label, const RegimeSummary& s) {
    os << std::left << std::setw(10) << label << std::right << std::setw(8) << s.scenes << std::setw(8) << s.valid
       << std::setw(10) << s.successes << std::setw(9) << std::fixed << std::setprecision(1)
       << 100.0 * s.success_rate << '%' << std::setw(14) << std::setprecision(4) << s.mean_rte << std::setw(14)
       << s.mean_rre << '\n';
    os.flags(flags);
  };
  for (const auto& r : regimes) {
    std::ostringstream label;
    label << std::fixed << std::setprecision(2) << r.clutter;
    row(label.str(), r);
  }
  row("all", overall);

  const auto timings = timing_json();
  if (timings.empty()) return;
  os << '\n' << std::left << std::setw(18) << "stage" << std::right << std::setw(12) << "p50 ms" << std::setw(12)
     << "p90 ms" << std::setw(12) << "max ms" << '\n';
  for (const auto& [stage, t] : timings.items()) {
    os << std::left << std::setw(18) << stage << std::right << std::fixed << std::setprecision(2) << std::setw(12)
       << t["p50"].get<double>() << std::setw(12) << t["p90"].get<double>() << std::setw(12)
       << t["max"].get<double>() << '\n';
  }
  os.flags(flags);
}

}  // namespace globreg
