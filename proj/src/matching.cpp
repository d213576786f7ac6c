#include "globreg/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "globreg/error.hpp"
#include "globreg/parallel.hpp"

namespace globreg {
namespace {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Fixed summation order so the scan and the tree agree bit for bit.
double squared_distance(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

struct Candidate {
  double sq = std::numeric_limits<double>::infinity();
  std::uint32_t row = std::numeric_limits<std::uint32_t>::max();

  bool better_than(const Candidate& o) const { return sq < o.sq || (sq == o.sq && row < o.row); }
};

struct TwoBest {
  Candidate first, second;

  void offer(const Candidate& c) {
    if (c.better_than(first)) {
      second = first;
      first = c;
    } else if (c.better_than(second)) {
      second = c;
    }
  }
};

TwoBest scan_two_nearest(const double* query, const FeatureMatrix& data) {
  TwoBest best;
  const int dim = static_cast<int>(data.cols());
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    best.offer({squared_distance(query, data.row(r).data(), dim), static_cast<std::uint32_t>(r)});
  }
  return best;
}

// k-d tree over descriptor rows, exact two-nearest-neighbor queries.
class DescriptorTree {
 public:
  explicit DescriptorTree(const FeatureMatrix& data) : data_(data), dim_(static_cast<int>(data.cols())) {
    order_.resize(static_cast<std::size_t>(data.rows()));
    std::iota(order_.begin(), order_.end(), 0u);
    if (!order_.empty()) build(0, static_cast<std::uint32_t>(order_.size()));
  }

  TwoBest query(const double* q) const {
    TwoBest best;
    if (!nodes_.empty()) search(0, q, best);
    return best;
  }

 private:
  static constexpr std::uint32_t kLeaf = 12;
  static constexpr std::uint32_t kNone = 0xffffffffu;

  struct Node {
    std::uint32_t begin, end;
    std::uint32_t left = kNone, right = kNone;
    int axis = 0;
    double split = 0.0;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeaf) return id;
    int axis = 0;
    double widest = 0.0;
    for (int a = 0; a < dim_; ++a) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (std::uint32_t i = begin; i < end; ++i) {
        const double x = data_(order_[i], a);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      if (hi - lo > widest) {
        widest = hi - lo;
        axis = a;
      }
    }
    if (widest <= 0.0) return id;
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t x, std::uint32_t y) {
                       const double a = data_(x, axis), b = data_(y, axis);
                       return a < b || (a == b && x < y);
                     });
    nodes_[id].axis = axis;
    nodes_[id].split = data_(order_[mid], axis);
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  void search(std::uint32_t id, const double* q, TwoBest& best) const {
    const Node& node = nodes_[id];
    if (node.left == kNone) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t r = order_[i];
        best.offer({squared_distance(q, data_.row(r).data(), dim_), r});
      }
      return;
    }
    // left holds values <= split, right holds values >= split
    const double diff = q[node.axis] - node.split;
    const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
    const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
    search(near, q, best);
    // exact lower bound on any squared distance across the split; equality
    // must still be visited so index tie-breaks match the scan
    if (diff * diff <= best.second.sq) search(far, q, best);
  }

  const FeatureMatrix& data_;
  int dim_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

std::vector<TwoBest> nearest_rows(const FeatureMatrix& queries, const FeatureMatrix& data, bool use_tree,
                                  int workers) {
  std::vector<TwoBest> out(static_cast<std::size_t>(queries.rows()));
  if (use_tree) {
    const DescriptorTree tree(data);
    parallel_for(out.size(), workers, [&](std::size_t r) { out[r] = tree.query(queries.row(r).data()); });
  } else {
    parallel_for(out.size(), workers, [&](std::size_t r) { out[r] = scan_two_nearest(queries.row(r).data(), data); });
  }
  return out;
}

}  // namespace

CorrespondenceSet mutual_match(const DescriptorSet& src, const DescriptorSet& tgt, const MatchOptions& options) {
  if (src.empty() || tgt.empty()) throw Error(ErrorKind::kInvalidArgument, "mutual matching needs two non-empty descriptor sets");
  if (src.dim() != tgt.dim()) throw Error(ErrorKind::kInvalidArgument, "descriptor dimensions differ");

  bool use_tree = std::max(src.size(), tgt.size()) > kIndexedMatchThreshold;
  if (options.strategy == 1) use_tree = false;
  if (options.strategy == 2) use_tree = true;

  const auto forward = nearest_rows(src.features, tgt.features, use_tree, options.workers);
  const auto backward = nearest_rows(tgt.features, src.features, use_tree, options.workers);

  CorrespondenceSet out;
  for (std::uint32_t i = 0; i < forward.size(); ++i) {
    const auto j = forward[i].first.row;
    if (backward[j].first.row != i) continue;
    Correspondence c;
    c.src = src.indices[i];
    c.tgt = tgt.indices[j];
    c.d1 = std::sqrt(forward[i].first.sq);
    c.d2 = std::isfinite(forward[i].second.sq) ? std::sqrt(forward[i].second.sq)
                                               : std::numeric_limits<double>::infinity();
    c.ratio = (c.d1 == 0.0 || !std::isfinite(c.d2)) ? 0.0 : c.d1 / c.d2;
    out.push_back(c);
  }
  return out;
}

CorrespondenceSet ratio_filter(const CorrespondenceSet& corrs, std::size_t n_tau) {
  if (corrs.size() <= n_tau) return corrs;
  std::vector<std::size_t> order(corrs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto key_less = [&](std::size_t a, std::size_t b) {
    const auto& x = corrs[a];
    const auto& y = corrs[b];
    if (x.ratio != y.ratio) return x.ratio < y.ratio;
    if (x.src != y.src) return x.src < y.src;
    return x.tgt < y.tgt;
  };
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_tau), order.end(), key_less);
  std::vector<std::uint8_t> keep(corrs.size(), 0);
  for (std::size_t i = 0; i < n_tau; ++i) keep[order[i]] = 1;
  CorrespondenceSet out;
  out.reserve(n_tau);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    if (keep[i]) out.push_back(corrs[i]);
  }
  return out;
}

}  // namespace globreg
