#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "globreg/geometry.hpp"
#include "globreg/matching.hpp"

namespace globreg {

/// Undirected simple graph in compressed sparse row layout. Neighbor lists are
/// sorted ascending and every edge appears in both endpoint rows.
class CompatGraph {
 public:
  CompatGraph() : row_offsets_{0} {}

  /// Builds from an undirected edge list; duplicates and orientation are
  /// normalized, self-loops rejected.
  static CompatGraph from_edges(std::size_t num_vertices, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

  /// Takes ownership of prebuilt arrays after checking the CSR invariants.
  static CompatGraph from_csr(std::vector<std::uint64_t> row_offsets, std::vector<std::uint32_t> col_indices);

  std::size_t num_vertices() const { return row_offsets_.size() - 1; }
  std::size_t num_edges() const { return col_indices_.size() / 2; }
  std::size_t degree(std::size_t v) const { return row_offsets_[v + 1] - row_offsets_[v]; }

  std::span<const std::uint32_t> neighbors(std::size_t v) const {
    return {col_indices_.data() + row_offsets_[v], degree(v)};
  }
  const std::vector<std::uint64_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::uint32_t>& col_indices() const { return col_indices_; }

  /// Each undirected edge once as (u, w) with u < w, in row order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_list() const;

 private:
  std::vector<std::uint64_t> row_offsets_;
  std::vector<std::uint32_t> col_indices_;
};

/// Pairwise length-consistency check: -2 beta <= |b_j - b_j'| - |a_i - a_i'| <= 2 beta.
bool compatibility_test(const Correspondence& c, const Correspondence& c2, const PointCloud& src,
                        const PointCloud& tgt, double beta);

CompatGraph build_compat_graph(const CorrespondenceSet& corrs, const PointCloud& src, const PointCloud& tgt,
                               double beta, int workers = 0);

/// Core number of every vertex by bucket peeling, O(|V| + |E|).
std::vector<std::uint32_t> core_numbers(const CompatGraph& g);

/// Vertices whose core number equals the degeneracy k*, ascending.
/// Empty when the graph has no edges.
std::vector<std::uint32_t> max_kcore(const CompatGraph& g);

struct PruneResult {
  CorrespondenceSet kept;
  std::vector<std::uint32_t> kept_rows;  // positions in the input set
  std::uint32_t core = 0;                // k*
};

/// Compatibility graph followed by maximum k-core selection.
/// Throws Error(kEmptyPrune) when nothing survives.
PruneResult prune(const CorrespondenceSet& corrs, const PointCloud& src, const PointCloud& tgt, double beta,
                  int workers = 0);

/// Debug dump: "u w" per edge, then "core v k" per vertex.
void write_graph(std::ostream& os, const CompatGraph& g, const std::vector<std::uint32_t>& cores);

}  // namespace globreg
