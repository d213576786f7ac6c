#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

namespace oracle {

std::vector<std::uint32_t> brute_radius(const std::vector<Point3>& pts, const Point3& q, double r) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < pts.size(); ++i) {
    const double dx = pts[i].x() - q.x(), dy = pts[i].y() - q.y(), dz = pts[i].z() - q.z();
    if (std::sqrt(dx * dx + dy * dy + dz * dz) < r) out.push_back(i);
  }
  return out;
}

Eigen3 jacobi_eigen(const Eigen::Matrix3d& input) {
  Eigen::Matrix3d a = input;
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  for (int sweep = 0; sweep < 100; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-300) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
        v = v * j;
      }
    }
  }
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) > a(y, y); });
  Eigen3 out;
  for (int i = 0; i < 3; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

NaiveNormal naive_normal(const std::vector<Point3>& pts) {
  Point3 c = Point3::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) cov += (p - c) * (p - c).transpose();
  cov /= static_cast<double>(pts.size());
  const Eigen3 e = jacobi_eigen(cov);
  Point3 n = e.vectors.col(2).normalized();
  for (int axis : {2, 0, 1}) {
    if (n(axis) > 1e-12) break;
    if (n(axis) < -1e-12) {
      n = -n;
      break;
    }
  }
  const double l1 = std::max(e.values(0), 0.0), l2 = std::max(e.values(1), 0.0);
  return {n, (l1 - l2) / l1};
}

std::array<double, 3> naive_features(const Point3& pq, const Point3& nq, const Point3& pk, const Point3& nk) {
  const double len = (pk - pq).norm();
  const Point3 d_qk = (pk - pq) / len;
  const Point3 d_kq = (pq - pk) / len;
  // angle between n and the segment leaving its own endpoint
  const double ang_q = std::acos(std::clamp(nq.dot(d_qk), -1.0, 1.0));
  const double ang_k = std::acos(std::clamp(nk.dot(d_kq), -1.0, 1.0));
  Point3 pa = pq, na = nq, pb = pk, nb = nk;
  if (ang_k < ang_q) {
    pa = pk;
    na = nk;
    pb = pq;
    nb = nq;
  }
  const Point3 d = (pb - pa) / (pb - pa).norm();
  const Point3 u = na;
  const Point3 v = d.cross(u);
  const Point3 w = u.cross(v);
  const double y = w.dot(nb), x = u.dot(nb);
  double f1 = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);
  if (f1 <= -std::numbers::pi) f1 = std::numbers::pi;
  return {f1, v.dot(nb), u.dot(d)};
}

int naive_bin(double f, double lo, double hi, int bins) {
  const double eps = 1e-9 * (hi - lo);
  f = std::min(std::max(f, lo), hi);
  int b = static_cast<int>(std::floor(bins * (f - lo) / (hi + eps - lo))) + 1;
  return std::min(std::max(b, 1), bins);
}

NaiveDescriptors naive_extract(const globreg::PointCloud& cloud, const globreg::Params& params) {
  const auto& pts = cloud.points;
  const std::size_t n = pts.size();
  const auto tau = static_cast<std::size_t>(params.tau_num);
  NaiveDescriptors out;

  Point3 centroid = Point3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(n);

  std::vector<bool> ok(n, false);
  std::vector<Point3> normals(n, Point3::Zero());
  for (std::uint32_t q = 0; q < n; ++q) {
    if (brute_radius(pts, pts[q], params.r_fpfh).size() < tau) continue;
    const auto near = brute_radius(pts, pts[q], params.r_normal);
    if (near.size() < tau) continue;
    std::vector<Point3> support;
    for (auto i : near) support.push_back(pts[i]);
    NaiveNormal nn = naive_normal(support);
    if (!(nn.linearity < params.tau_lin)) continue;
    if (params.orientation == globreg::NormalOrientation::kTowardCentroid) {
      const Point3 to_c = centroid - pts[q];
      const double c = nn.n.dot(to_c);
      if (std::abs(c) > 1e-9 * to_c.norm() && c < 0.0) nn.n = -nn.n;
    }
    ok[q] = true;
    normals[q] = nn.n;
    out.step1_valid.push_back(q);
  }

  // neighbor lists restricted to currently valid points, until nothing changes
  std::map<std::uint32_t, std::vector<std::uint32_t>> lists;
  for (bool changed = true; changed;) {
    changed = false;
    lists.clear();
    for (std::uint32_t q = 0; q < n; ++q) {
      if (!ok[q]) continue;
      for (auto i : brute_radius(pts, pts[q], params.r_fpfh)) {
        if (ok[i]) lists[q].push_back(i);
      }
    }
    for (std::uint32_t q = 0; q < n; ++q) {
      if (ok[q] && lists[q].size() < tau) {
        ok[q] = false;
        changed = true;
      }
    }
  }
  for (std::uint32_t q = 0; q < n; ++q) {
    if (ok[q]) out.valid.push_back(q);
  }

  const int h = params.bins;
  const double pi = std::numbers::pi;
  for (auto q : out.valid) {
    std::vector<double> hist(3 * h, 0.0);
    double m = 0;
    for (auto k : lists[q]) {
      if (k == q) continue;
      m += 1;
    }
    for (auto k : lists[q]) {
      if (k == q) continue;
      const auto f = naive_features(pts[q], normals[q], pts[k], normals[k]);
      hist[naive_bin(f[0], -pi, pi, h) - 1] += 100.0 / m;
      hist[h + naive_bin(f[1], -1, 1, h) - 1] += 100.0 / m;
      hist[2 * h + naive_bin(f[2], -1, 1, h) - 1] += 100.0 / m;
    }
    out.spfh[q] = hist;
  }
  for (auto q : out.valid) {
    std::vector<double> f = out.spfh[q];
    double m = 0;
    std::vector<double> acc(3 * h, 0.0);
    for (auto k : lists[q]) {
      if (k == q) continue;
      m += 1;
      const double omega = (pts[q] - pts[k]).norm();
      for (int b = 0; b < 3 * h; ++b) acc[b] += out.spfh[k][b] / omega;
    }
    for (int b = 0; b < 3 * h; ++b) f[b] += acc[b] / m;
    out.fpfh[q] = f;
  }
  return out;
}

namespace {

std::vector<Point3> sample_shape(int shape, std::mt19937_64& rng, std::size_t count) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point3> pts;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = u(rng), t = u(rng), r = u(rng);
    switch (shape) {
      case 0: {  // open box 1.0 x 0.8 x 0.6
        const int face = static_cast<int>(r * 5);
        if (face == 0) pts.emplace_back(s, 0.8 * t, 0.0);
        else if (face == 1) pts.emplace_back(s, 0.0, 0.6 * t);
        else if (face == 2) pts.emplace_back(s, 0.8, 0.6 * t);
        else if (face == 3) pts.emplace_back(0.0, 0.8 * s, 0.6 * t);
        else pts.emplace_back(1.0, 0.8 * s, 0.6 * t);
        break;
      }
      case 1: {  // three-plane corner
        const int face = static_cast<int>(r * 3);
        if (face == 0) pts.emplace_back(s, t, 0.0);
        else if (face == 1) pts.emplace_back(s, 0.0, 0.7 * t);
        else pts.emplace_back(0.0, s, 0.7 * t);
        break;
      }
      case 2: {  // sphere, radius 0.6
        const double z = 2 * s - 1, phi = 2 * std::numbers::pi * t;
        const double rho = std::sqrt(1 - z * z);
        pts.push_back(0.6 * Point3(rho * std::cos(phi), rho * std::sin(phi), z));
        break;
      }
      case 3: {  // three steps
        const int step = static_cast<int>(r * 3);
        if (u(rng) < 0.6) pts.emplace_back(0.35 * (step + s), t, 0.25 * step);
        else pts.emplace_back(0.35 * step, t, 0.25 * (step - 1 + s));
        break;
      }
      default: {  // half cylinder on a floor
        if (r < 0.5) {
          const double phi = std::numbers::pi * s;
          pts.emplace_back(0.5 * std::cos(phi), t * 1.2, 0.5 * std::sin(phi));
        } else {
          pts.emplace_back(-0.8 + 1.6 * s, 1.2 * t, 0.0);
        }
      }
    }
  }
  return pts;
}

}  // namespace

globreg::PointCloud structured_cloud(std::uint64_t seed, std::size_t max_points, double voxel) {
  std::mt19937_64 rng(seed);
  const int shape = static_cast<int>(seed % 5);
  auto raw = sample_shape(shape, rng, 6000);
  std::normal_distribution<double> jitter(0.0, 0.05 * voxel);
  std::set<std::tuple<long, long, long>> seen;
  globreg::PointCloud out;
  for (auto p : raw) {
    p += Point3(jitter(rng), jitter(rng), jitter(rng));
    const auto key = std::make_tuple(static_cast<long>(std::floor(p.x() / voxel)),
                                     static_cast<long>(std::floor(p.y() / voxel)),
                                     static_cast<long>(std::floor(p.z() / voxel)));
    if (!seen.insert(key).second) continue;
    out.points.push_back(p);
    if (out.size() == max_points) break;
  }
  return out;
}

std::vector<NaiveMatch> brute_mutual(const Eigen::MatrixXd& src, const Eigen::MatrixXd& tgt) {
  const auto ns = static_cast<std::uint32_t>(src.rows());
  const auto nt = static_cast<std::uint32_t>(tgt.rows());
  auto dist = [&](std::uint32_t i, std::uint32_t j) { return (src.row(i) - tgt.row(j)).norm(); };
  std::vector<std::uint32_t> best_t(ns), best_s(nt);
  for (std::uint32_t i = 0; i < ns; ++i) {
    std::uint32_t b = 0;
    for (std::uint32_t j = 1; j < nt; ++j) {
      if (dist(i, j) < dist(i, b)) b = j;
    }
    best_t[i] = b;
  }
  for (std::uint32_t j = 0; j < nt; ++j) {
    std::uint32_t b = 0;
    for (std::uint32_t i = 1; i < ns; ++i) {
      if (dist(i, j) < dist(b, j)) b = i;
    }
    best_s[j] = b;
  }
  std::vector<NaiveMatch> out;
  for (std::uint32_t i = 0; i < ns; ++i) {
    const std::uint32_t j = best_t[i];
    if (best_s[j] != i) continue;
    double d2 = std::numeric_limits<double>::infinity();
    for (std::uint32_t k = 0; k < nt; ++k) {
      if (k != j) d2 = std::min(d2, dist(i, k));
    }
    out.push_back({i, j, dist(i, j), d2});
  }
  return out;
}

AdjMatrix random_adjacency(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  AdjMatrix adj(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (coin(rng)) adj[i][j] = adj[j][i] = true;
    }
  }
  return adj;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_of(const AdjMatrix& adj) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> e;
  for (std::uint32_t i = 0; i < adj.size(); ++i) {
    for (std::uint32_t j = i + 1; j < adj.size(); ++j) {
      if (adj[i][j]) e.emplace_back(i, j);
    }
  }
  return e;
}

std::vector<std::uint32_t> brute_core_numbers(const AdjMatrix& adj) {
  // Remove a minimum-degree vertex at a time; a vertex's core number is the
  // largest minimum degree seen up to its removal.
  const std::size_t n = adj.size();
  std::vector<std::uint32_t> deg(n, 0), core(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w = 0; w < n; ++w) deg[v] += adj[v][w];
  }
  std::vector<bool> alive(n, true);
  std::uint32_t level = 0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (alive[v] && (pick == n || deg[v] < deg[pick])) pick = v;
    }
    level = std::max(level, deg[pick]);
    core[pick] = level;
    alive[pick] = false;
    for (std::size_t w = 0; w < n; ++w) {
      if (alive[w] && adj[pick][w]) --deg[w];
    }
  }
  return core;
}

std::vector<std::vector<std::uint32_t>> exhaustive_max_cliques(const AdjMatrix& adj) {
  const std::size_t n = adj.size();
  std::vector<std::uint32_t> best;
  int best_size = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size < best_size) continue;
    bool clique = true;
    for (std::size_t i = 0; i < n && clique; ++i) {
      if (!(mask >> i & 1u)) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if ((mask >> j & 1u) && !adj[i][j]) {
          clique = false;
          break;
        }
      }
    }
    if (!clique) continue;
    if (size > best_size) best.clear();
    best.push_back(mask);
    best_size = size;
  }
  std::vector<std::vector<std::uint32_t>> out;
  for (auto mask : best) {
    std::vector<std::uint32_t> members;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (mask >> i & 1u) members.push_back(i);
    }
    out.push_back(std::move(members));
  }
  return out;
}

}  // namespace oracle
