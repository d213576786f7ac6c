#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "globreg/faster_pfh.hpp"

namespace globreg {

struct Correspondence {
  std::uint32_t src = 0;  // cloud index in the source
  std::uint32_t tgt = 0;  // cloud index in the target
  double d1 = 0.0;        // descriptor distance to the matched target
  double d2 = std::numeric_limits<double>::infinity();  // distance to the second-nearest target
  double ratio = 0.0;     // d1 / d2; 0 when d1 == 0 or d2 is infinite
};

using CorrespondenceSet = std::vector<Correspondence>;

/// Above this many descriptors on either side, nearest neighbors come from a
/// k-d tree in descriptor space instead of a full scan. Both give identical results.
inline constexpr std::size_t kIndexedMatchThreshold = 2000;

struct MatchOptions {
  int workers = 0;
  // 0 = choose by kIndexedMatchThreshold, 1 = force brute force, 2 = force the tree
  int strategy = 0;
};

/// Reciprocal nearest neighbors under the L2 descriptor distance, ties to the
/// smaller index. Output ordered by source row. Throws on empty input.
CorrespondenceSet mutual_match(const DescriptorSet& src, const DescriptorSet& tgt, const MatchOptions& options = {});

/// Keeps the `n_tau` correspondences with the lowest ratio (ties by (src, tgt)),
/// preserving input order.
CorrespondenceSet ratio_filter(const CorrespondenceSet& corrs, std::size_t n_tau);

}  // namespace globreg
