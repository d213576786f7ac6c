#include "globreg/pruning.hpp"

#include <algorithm>
#include <ostream>

#include "globreg/error.hpp"
#include "globreg/parallel.hpp"

namespace globreg {

CompatGraph CompatGraph::from_edges(std::size_t num_vertices,
                                    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  for (auto& [u, w] : edges) {
    if (u == w) throw Error(ErrorKind::kInvalidArgument, "self-loop in edge list");
    if (u >= num_vertices || w >= num_vertices) throw Error(ErrorKind::kInvalidArgument, "edge endpoint out of range");
    if (u > w) std::swap(u, w);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  CompatGraph g;
  g.row_offsets_.assign(num_vertices + 1, 0);
  for (const auto& [u, w] : edges) {
    ++g.row_offsets_[u + 1];
    ++g.row_offsets_[w + 1];
  }
  for (std::size_t v = 0; v < num_vertices; ++v) g.row_offsets_[v + 1] += g.row_offsets_[v];
  g.col_indices_.resize(2 * edges.size());
  std::vector<std::uint64_t> cursor(g.row_offsets_.begin(), g.row_offsets_.end() - 1);
  for (const auto& [u, w] : edges) {
    g.col_indices_[cursor[u]++] = w;
    g.col_indices_[cursor[w]++] = u;
  }
  for (std::size_t v = 0; v < num_vertices; ++v) {
    std::sort(g.col_indices_.begin() + static_cast<std::ptrdiff_t>(g.row_offsets_[v]),
              g.col_indices_.begin() + static_cast<std::ptrdiff_t>(g.row_offsets_[v + 1]));
  }
  return g;
}

CompatGraph CompatGraph::from_csr(std::vector<std::uint64_t> row_offsets, std::vector<std::uint32_t> col_indices) {
  if (row_offsets.empty() || row_offsets.front() != 0 || row_offsets.back() != col_indices.size()) {
    throw Error(ErrorKind::kInvalidArgument, "malformed CSR offsets");
  }
  const std::size_t n = row_offsets.size() - 1;
  for (std::size_t v = 0; v < n; ++v) {
    if (row_offsets[v] > row_offsets[v + 1]) throw Error(ErrorKind::kInvalidArgument, "CSR offsets decrease");
    for (auto i = row_offsets[v]; i < row_offsets[v + 1]; ++i) {
      if (col_indices[i] >= n || col_indices[i] == v) throw Error(ErrorKind::kInvalidArgument, "bad CSR column");
      if (i > row_offsets[v] && col_indices[i - 1] >= col_indices[i]) {
        throw Error(ErrorKind::kInvalidArgument, "CSR row not strictly ascending");
      }
    }
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    for (auto i = row_offsets[v]; i < row_offsets[v + 1]; ++i) {
      const auto u = col_indices[i];
      const auto first = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u]);
      const auto last = col_indices.begin() + static_cast<std::ptrdiff_t>(row_offsets[u + 1]);
      if (!std::binary_search(first, last, v)) throw Error(ErrorKind::kInvalidArgument, "CSR graph is not symmetric");
    }
  }
  CompatGraph g;
  g.row_offsets_ = std::move(row_offsets);
  g.col_indices_ = std::move(col_indices);
  return g;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> CompatGraph::edge_list() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(num_edges());
  for (std::uint32_t u = 0; u < num_vertices(); ++u) {
    for (auto w : neighbors(u)) {
      if (u < w) out.emplace_back(u, w);
    }
  }
  return out;
}

bool compatibility_test(const Correspondence& c, const Correspondence& c2, const PointCloud& src,
                        const PointCloud& tgt, double beta) {
  const double len_src = (src.points[c.src] - src.points[c2.src]).norm();
  const double len_tgt = (tgt.points[c.tgt] - tgt.points[c2.tgt]).norm();
  const double diff = len_tgt - len_src;
  return -2.0 * beta <= diff && diff <= 2.0 * beta;
}

CompatGraph build_compat_graph(const CorrespondenceSet& corrs, const PointCloud& src, const PointCloud& tgt,
                               double beta, int workers) {
  const std::size_t n = corrs.size();
  if (n >= 0xffffffffu) throw Error(ErrorKind::kInvalidArgument, "too many correspondences");
  // upper-triangle neighbors per row, merged into symmetric CSR afterwards
  std::vector<std::vector<std::uint32_t>> upper(n);
  parallel_for(n, workers, [&](std::size_t u) {
    for (std::size_t w = u + 1; w < n; ++w) {
      if (compatibility_test(corrs[u], corrs[w], src, tgt, beta)) upper[u].push_back(static_cast<std::uint32_t>(w));
    }
  });

  std::vector<std::uint64_t> offsets(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) {
    offsets[u + 1] += upper[u].size();
    for (auto w : upper[u]) ++offsets[w + 1];
  }
  for (std::size_t v = 0; v < n; ++v) offsets[v + 1] += offsets[v];
  std::vector<std::uint32_t> cols(offsets[n]);
  std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
  // lower neighbors arrive in ascending u, then each row's upper part follows
  for (std::size_t u = 0; u < n; ++u) {
    for (auto w : upper[u]) cols[cursor[w]++] = static_cast<std::uint32_t>(u);
    std::copy(upper[u].begin(), upper[u].end(), cols.begin() + static_cast<std::ptrdiff_t>(cursor[u]));
    cursor[u] += upper[u].size();
  }
  return CompatGraph::from_csr(std::move(offsets), std::move(cols));
}

std::vector<std::uint32_t> core_numbers(const CompatGraph& g) {
  const std::size_t n = g.num_vertices();
  // degree and position side by side: one cache line per neighbor visit
  struct Slot {
    std::uint32_t deg, pos;
  };
  std::vector<Slot> slot(n);
  std::uint32_t max_deg = 0;
  for (std::size_t v = 0; v < n; ++v) {
    slot[v].deg = static_cast<std::uint32_t>(g.degree(v));
    max_deg = std::max(max_deg, slot[v].deg);
  }
  // bin[d] = first position of degree-d vertices in vert
  std::vector<std::uint32_t> bin(max_deg + 1, 0);
  for (const auto& s : slot) ++bin[s.deg];
  std::uint32_t start = 0;
  for (auto& b : bin) {
    const std::uint32_t count = b;
    b = start;
    start += count;
  }
  std::vector<std::uint32_t> vert(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    slot[v].pos = bin[slot[v].deg]++;
    vert[slot[v].pos] = v;
  }
  for (std::size_t d = max_deg; d > 0; --d) bin[d] = bin[d - 1];
  if (!bin.empty()) bin[0] = 0;

  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t v = vert[i];
    const std::uint32_t dv = slot[v].deg;
    for (auto u : g.neighbors(v)) {
      Slot& su = slot[u];
      if (su.deg <= dv) continue;
      const std::uint32_t pw = bin[su.deg];
      const std::uint32_t w = vert[pw];
      if (u != w) {
        slot[w].pos = su.pos;
        vert[su.pos] = w;
        su.pos = pw;
        vert[pw] = u;
      }
      ++bin[su.deg];
      --su.deg;
    }
  }
  std::vector<std::uint32_t> core(n);
  for (std::size_t v = 0; v < n; ++v) core[v] = slot[v].deg;
  return core;
}

std::vector<std::uint32_t> max_kcore(const CompatGraph& g) {
  const auto cores = core_numbers(g);
  std::vector<std::uint32_t> out;
  if (cores.empty()) return out;
  const std::uint32_t k = *std::max_element(cores.begin(), cores.end());
  if (k == 0) return out;
  for (std::uint32_t v = 0; v < cores.size(); ++v) {
    if (cores[v] == k) out.push_back(v);
  }
  return out;
}

PruneResult prune(const CorrespondenceSet& corrs, const PointCloud& src, const PointCloud& tgt, double beta,
                  int workers) {
  PruneResult out;
  if (corrs.empty()) throw Error(ErrorKind::kEmptyPrune, "pruning rejected all correspondences");
  const CompatGraph g = build_compat_graph(corrs, src, tgt, beta, workers);
  const auto cores = core_numbers(g);
  const std::uint32_t k = *std::max_element(cores.begin(), cores.end());
  if (k == 0) throw Error(ErrorKind::kEmptyPrune, "pruning rejected all correspondences");
  out.core = k;
  for (std::uint32_t v = 0; v < cores.size(); ++v) {
    if (cores[v] != k) continue;
    out.kept_rows.push_back(v);
    out.kept.push_back(corrs[v]);
  }
  return out;
}

void write_graph(std::ostream& os, const CompatGraph& g, const std::vector<std::uint32_t>& cores) {
  for (const auto& [u, w] : g.edge_list()) os << u << ' ' << w << '\n';
  for (std::size_t v = 0; v < cores.size(); ++v) os << "core " << v << ' ' << cores[v] << '\n';
}

}  // namespace globreg
