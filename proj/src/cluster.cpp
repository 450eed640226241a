#include "sawec/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "sawec/error.hpp"

namespace sawec {
namespace {

bool point_less(const AoaRangePoint& a, const AoaRangePoint& b) {
  return std::tie(a.aoa_deg, a.range_m, a.power) < std::tie(b.aoa_deg, b.range_m, b.power);
}

// Union-find over core points.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

ClusterResult summarize(std::vector<AoaRangePoint> members) {
  ClusterResult c;
  double sum_aoa = 0.0;
  double sum_range = 0.0;
  double lo = members.front().aoa_deg;
  double hi = lo;
  for (const auto& m : members) {
    sum_aoa += m.aoa_deg;
    sum_range += m.range_m;
    lo = std::min(lo, m.aoa_deg);
    hi = std::max(hi, m.aoa_deg);
  }
  const auto n = static_cast<double>(members.size());
  c.centroid_aoa_deg = sum_aoa / n;
  c.centroid_range_m = sum_range / n;
  c.extent_aoa_deg = hi - lo;
  c.members = std::move(members);
  return c;
}

}  // namespace

void ClusterConfig::validate() const {
  if (!(eps > 0.0)) throw ConfigError("cluster eps must be positive");
  if (min_pts < 1) throw ConfigError("cluster min_pts must be >= 1");
  if (!(aoa_scale_deg > 0.0) || !(range_scale_m > 0.0)) {
    throw ConfigError("cluster feature scales must be positive");
  }
  if (!(motion_threshold >= 0.0)) throw ConfigError("motion_threshold must be >= 0");
}

double scaled_distance(double aoa_a, double range_a, double aoa_b, double range_b,
                       const ClusterConfig& cfg) {
  return std::hypot((aoa_a - aoa_b) / cfg.aoa_scale_deg, (range_a - range_b) / cfg.range_scale_m);
}

ClusteringOutput dbscan(std::span<const AoaRangePoint> input, const ClusterConfig& cfg) {
  cfg.validate();
  std::vector<AoaRangePoint> pts(input.begin(), input.end());
  std::sort(pts.begin(), pts.end(), point_less);
  const std::size_t n = pts.size();

  std::vector<std::vector<std::size_t>> neighbours(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (scaled_distance(pts[i].aoa_deg, pts[i].range_m, pts[j].aoa_deg, pts[j].range_m, cfg) <=
          cfg.eps) {
        neighbours[i].push_back(j);
      }
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbours[i].size() >= cfg.min_pts;

  DisjointSet sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (auto j : neighbours[i]) {
      if (core[j]) sets.unite(i, j);
    }
  }

  // Label roots in order of their smallest member so cluster ids are canonical.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> root_label(n, kNone);
  std::vector<std::size_t> label(n, kNone);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const auto r = sets.find(i);
    if (root_label[r] == kNone) root_label[r] = next++;
    label[i] = root_label[r];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    // neighbours[i] is ascending, so the first core entry is the lowest-ordered one.
    for (auto j : neighbours[i]) {
      if (core[j]) {
        label[i] = label[j];
        break;
      }
    }
  }

  std::vector<std::vector<AoaRangePoint>> groups(next);
  ClusteringOutput out;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] == kNone) {
      out.noise.push_back(pts[i]);
    } else {
      groups[label[i]].push_back(pts[i]);
    }
  }
  out.clusters.reserve(next);
  for (auto& g : groups) out.clusters.push_back(summarize(std::move(g)));
  return out;
}

std::vector<MotionEvent> detect_motion(std::span<const ClusterResult> prev,
                                       std::span<const ClusterResult> curr, const ClusterConfig& cfg,
                                       std::size_t frame_index) {
  struct Pair {
    double distance;
    std::size_t curr;
    std::size_t prev;
  };
  std::vector<Pair> pairs;
  pairs.reserve(prev.size() * curr.size());
  for (std::size_t i = 0; i < curr.size(); ++i) {
    for (std::size_t j = 0; j < prev.size(); ++j) {
      pairs.push_back({scaled_distance(curr[i].centroid_aoa_deg, curr[i].centroid_range_m,
                                       prev[j].centroid_aoa_deg, prev[j].centroid_range_m, cfg),
                       i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(a.distance, a.curr, a.prev) < std::tie(b.distance, b.curr, b.prev);
  });

  std::vector<std::optional<double>> match(curr.size());
  std::vector<bool> prev_used(prev.size(), false);
  std::vector<bool> curr_used(curr.size(), false);
  for (const auto& p : pairs) {
    if (curr_used[p.curr] || prev_used[p.prev]) continue;
    curr_used[p.curr] = true;
    prev_used[p.prev] = true;
    match[p.curr] = p.distance;
  }

  std::vector<MotionEvent> events;
  for (std::size_t i = 0; i < curr.size(); ++i) {
    if (!match[i] || *match[i] > cfg.motion_threshold) {
      events.push_back({frame_index, curr[i], match[i]});
    }
  }
  return events;
}

BackgroundModel BackgroundModel::from_estimates(std::span<const std::vector<PathEstimate>> calibration,
                                                const ClusterConfig& cfg) {
  cfg.validate();
  std::vector<AoaRangePoint> ref;
  for (const auto& sample : calibration) {
    for (const auto& p : sample) {
      AoaRangePoint pt{p.aoa_deg, p.range_m, p.power};
      const bool seen = std::any_of(ref.begin(), ref.end(), [&](const AoaRangePoint& q) {
        return q.aoa_deg == pt.aoa_deg && q.range_m == pt.range_m;
      });
      if (!seen) ref.push_back(pt);
    }
  }
  std::sort(ref.begin(), ref.end(), point_less);
  return BackgroundModel(std::move(ref), cfg);
}

bool BackgroundModel::matches(const PathEstimate& p) const {
  return std::any_of(reference_.begin(), reference_.end(), [&](const AoaRangePoint& q) {
    return scaled_distance(p.aoa_deg, p.range_m, q.aoa_deg, q.range_m, cfg_) <= cfg_.eps;
  });
}

std::vector<AoaRangePoint> frame_estimates(std::span<const std::vector<PathEstimate>> samples,
                                           const BackgroundModel* background) {
  std::vector<AoaRangePoint> out;
  for (const auto& sample : samples) {
    for (const auto& p : sample) {
      if (background != nullptr && background->matches(p)) continue;
      out.push_back({p.aoa_deg, p.range_m, p.power});
    }
  }
  return out;
}

}  // namespace sawec
