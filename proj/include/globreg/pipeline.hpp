#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "globreg/geometry.hpp"
#include "globreg/matching.hpp"
#include "globreg/solver.hpp"

namespace globreg {

struct StageRecord {
  std::string stage;
  std::size_t count = 0;  // output cardinality of the stage
  double ms = 0.0;
};

/// Outcome of register_clouds. `solution.inliers` index into `correspondences`,
/// whose point indices refer to the preprocessed clouds; the index maps
/// translate those back to positions in the input clouds.
struct PipelineResult {
  RegistrationResult solution;
  CorrespondenceSet correspondences;  // the set handed to the solver
  std::vector<std::uint32_t> source_index_map;
  std::vector<std::uint32_t> target_index_map;
  std::vector<StageRecord> stage_trace;
  std::string failure_stage;   // empty on success
  std::string failure_reason;

  bool valid() const { return solution.valid; }
  const Pose& pose() const { return solution.pose; }
  std::size_t num_inliers() const { return solution.inliers.size(); }
  /// Count recorded for `stage`, or nullopt if the stage never ran.
  std::optional<std::size_t> stage_count(const std::string& stage) const;
};

/// Voxelize, optionally suppress the ground plane, extract descriptors, match,
/// cap by ratio, prune by maximum k-core, solve with GNC, check the inlier count.
/// Stage failures come back as valid == false with the stage and reason set.
PipelineResult register_clouds(const PointCloud& src, const PointCloud& tgt, const Params& params);

/// {"pose": 4x4 row-major, "num_inliers", "valid", "stage_trace": [{"stage","count","ms"}],
///  "inliers": [[src, tgt], ...] (input-cloud indices), "failure": {...}}. Timings are omitted when
/// `with_timings` is false so that repeated runs serialize identically.
nlohmann::json to_json(const PipelineResult& result, bool with_timings = true);

}  // namespace globreg
