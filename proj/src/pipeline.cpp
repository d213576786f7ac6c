#include "globreg/pipeline.hpp"

#include <chrono>

#include "globreg/error.hpp"
#include "globreg/faster_pfh.hpp"
#include "globreg/io.hpp"
#include "globreg/preprocess.hpp"
#include "globreg/pruning.hpp"

namespace globreg {
namespace {

class StageTimer {
 public:
  explicit StageTimer(std::vector<StageRecord>& trace) : trace_(trace) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto out = fn();
    const auto stop = std::chrono::steady_clock::now();
    trace_.push_back({stage, cardinality(out), std::chrono::duration<double, std::milli>(stop - start).count()});
    return out;
  }

 private:
  static std::size_t cardinality(const PointCloud& c) { return c.size(); }
  static std::size_t cardinality(const DescriptorSet& d) { return d.size(); }
  static std::size_t cardinality(const CorrespondenceSet& c) { return c.size(); }
  static std::size_t cardinality(const PruneResult& p) { return p.kept.size(); }
  static std::size_t cardinality(const RegistrationResult& r) { return r.inliers.size(); }

  std::vector<StageRecord>& trace_;
};

}  // namespace

std::optional<std::size_t> PipelineResult::stage_count(const std::string& stage) const {
  for (const auto& s : stage_trace) {
    if (s.stage == stage) return s.count;
  }
  return std::nullopt;
}

PipelineResult register_clouds(const PointCloud& src, const PointCloud& tgt, const Params& params) {
  PipelineResult result;
  StageTimer timer(result.stage_trace);
  std::string stage = "input";
  try {
    params.validate();
    src.validate();
    tgt.validate();
    const auto min_points = static_cast<std::size_t>(params.tau_num);
    if (src.size() < min_points || tgt.size() < min_points) {
      throw Error(ErrorKind::kInvalidArgument, "each cloud needs at least tau_num points");
    }

    const auto run_preprocess = [&](const std::string& name, const PointCloud& input,
                                    std::vector<std::uint32_t>& index_map) {
      PointCloud cloud = timer.run(name, [&] {
        index_map = voxel_downsample_indices(input, params.voxel_size);
        return select(input, index_map);
      });
      if (!params.suppression.enable) return cloud;
      const auto& s = params.suppression;
      const std::string suppress = name == "voxel_source" ? "suppress_source" : "suppress_target";
      stage = suppress;
      return timer.run(suppress, [&] {
        const auto kept = geometric_suppression_indices(cloud, true, s.plane_distance_multiplier * params.voxel_size,
                                                        s.min_plane_fraction, s.iterations, s.seed);
        std::vector<std::uint32_t> composed;
        composed.reserve(kept.size());
        for (auto i : kept) composed.push_back(index_map[i]);
        index_map = std::move(composed);
        return select(cloud, kept);
      });
    };
    stage = "voxel_source";
    const PointCloud src_v = run_preprocess(stage, src, result.source_index_map);
    stage = "voxel_target";
    const PointCloud tgt_v = run_preprocess(stage, tgt, result.target_index_map);

    stage = "features_source";
    const DescriptorSet src_f = timer.run(stage, [&] { return extract(src_v, params); });
    stage = "features_target";
    const DescriptorSet tgt_f = timer.run(stage, [&] { return extract(tgt_v, params); });

    stage = "mutual_match";
    MatchOptions match_options;
    match_options.workers = params.workers;
    const CorrespondenceSet matched = timer.run(stage, [&] { return mutual_match(src_f, tgt_f, match_options); });
    stage = "ratio_filter";
    const CorrespondenceSet capped = timer.run(stage, [&] { return ratio_filter(matched, params.n_tau); });

    stage = "prune";
    PruneResult pruned = timer.run(stage, [&] { return prune(capped, src_v, tgt_v, params.beta, params.workers); });
    result.correspondences = std::move(pruned.kept);

    stage = "gnc";
    std::vector<PointPair> pairs;
    pairs.reserve(result.correspondences.size());
    for (const auto& c : result.correspondences) pairs.push_back({src_v.points[c.src], tgt_v.points[c.tgt]});
    GncSettings gnc = params.gnc;
    gnc.noise_bound = params.noise_bound();
    if (pairs.size() < 3) throw Error(ErrorKind::kInsufficientSupport, "fewer than 3 correspondences survived pruning");
    result.solution = timer.run(stage, [&] { return gnc_solve(pairs, gnc, params.tau_valid); });

    stage = "validate";
    result.solution.valid = validate(result.solution, params.tau_valid);
    result.stage_trace.push_back({stage, result.solution.inliers.size(), 0.0});
    if (!result.solution.valid) {
      result.failure_stage = stage;
      result.failure_reason = "final inlier set smaller than tau_valid";
    }
  } catch (const Error& e) {
    result.solution.valid = false;
    result.failure_stage = stage;
    result.failure_reason = e.what();
  }
  return result;
}

nlohmann::json to_json(const PipelineResult& result, bool with_timings) {
  nlohmann::json pose = nlohmann::json::array();
  const Matrix4 m = result.pose().matrix();
  for (int r = 0; r < 4; ++r) pose.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});

  nlohmann::json trace = nlohmann::json::array();
  for (const auto& s : result.stage_trace) {
    nlohmann::json entry = {{"stage", s.stage}, {"count", s.count}};
    if (with_timings) entry["ms"] = s.ms;
    trace.push_back(entry);
  }
  nlohmann::json inliers = nlohmann::json::array();
  for (auto k : result.solution.inliers) {
    const auto& c = result.correspondences[k];
    inliers.push_back({result.source_index_map[c.src], result.target_index_map[c.tgt]});
  }
  nlohmann::json out = {
      {"pose", pose},
      {"num_inliers", result.num_inliers()},
      {"valid", result.valid()},
      {"stage_trace", trace},
      {"inliers", inliers},
  };
  if (!result.failure_stage.empty()) {
    out["failure"] = {{"stage", result.failure_stage}, {"reason", result.failure_reason}};
  }
  return out;
}

}  // namespace globreg
