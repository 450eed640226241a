#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "sawec/cluster.hpp"
#include "sawec/error.hpp"

using namespace sawec;

namespace {

ClusterResult cluster_at(double aoa, double range) {
  ClusterResult c;
  c.members = {{aoa, range, 1.0}};
  c.centroid_aoa_deg = aoa;
  c.centroid_range_m = range;
  return c;
}

}  // namespace

TEST_CASE("dbscan examples") {
  const ClusterConfig cfg;
  std::vector<AoaRangePoint> same(6, {10.0, 4.0, 0.5});
  auto out = dbscan(same, cfg);
  REQUIRE(out.clusters.size() == 1);
  CHECK(out.clusters[0].members.size() == 6);
  CHECK(out.clusters[0].extent_aoa_deg == 0.0);
  CHECK(out.noise.empty());

  std::vector<AoaRangePoint> two;
  for (int i = 0; i < 5; ++i) two.push_back({20.0 + 0.5 * i, 5.0, 1.0});
  for (int i = 0; i < 5; ++i) two.push_back({60.0 + 0.5 * i, 5.0, 1.0});
  two.push_back({-80.0, 20.0, 1.0});
  out = dbscan(two, cfg);
  CHECK(out.clusters.size() == 2);
  CHECK(out.noise.size() == 1);
  CHECK(oracle::canonical(out) == oracle::reference_dbscan(two, cfg));
  CHECK(out.clusters[0].centroid_aoa_deg == doctest::Approx(21.0));
  CHECK(out.clusters[0].extent_aoa_deg == doctest::Approx(2.0));

  const std::vector<AoaRangePoint> scattered{{-50.0, 2.0, 1.0}, {0.0, 10.0, 1.0}, {50.0, 18.0, 1.0}};
  out = dbscan(scattered, cfg);
  CHECK(out.clusters.empty());
  CHECK(out.noise.size() == 3);

  CHECK(dbscan(std::vector<AoaRangePoint>{}, cfg).clusters.empty());
}

TEST_CASE("dbscan matches the reference on random instances") {
  std::mt19937_64 rng(99);
  ClusterConfig cfg;
  for (int trial = 0; trial < 300; ++trial) {
    cfg.min_pts = 2 + trial % 5;
    const auto pts = oracle::random_instance(rng);
    const auto out = dbscan(pts, cfg);
    CHECK(oracle::canonical(out) == oracle::reference_dbscan(pts, cfg));

    // Partition covers the input exactly once.
    std::size_t total = out.noise.size();
    for (const auto& c : out.clusters) {
      total += c.members.size();
      CHECK(c.members.size() >= std::min<std::size_t>(cfg.min_pts, c.members.size()));
      CHECK(c.extent_aoa_deg >= 0.0);
      const auto [lo, hi] = std::minmax_element(c.members.begin(), c.members.end(),
                                                [](const auto& a, const auto& b) { return a.aoa_deg < b.aoa_deg; });
      CHECK(c.centroid_aoa_deg >= lo->aoa_deg - 1e-9);
      CHECK(c.centroid_aoa_deg <= hi->aoa_deg + 1e-9);
    }
    CHECK(total == pts.size());
  }
}

TEST_CASE("dbscan ignores input order") {
  std::mt19937_64 rng(7);
  const ClusterConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    auto pts = oracle::random_instance(rng);
    const auto base = dbscan(pts, cfg);
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto shuffled = dbscan(pts, cfg);
    CHECK(oracle::canonical(base) == oracle::canonical(shuffled));
    const auto ev_a = detect_motion({}, base.clusters, cfg);
    const auto ev_b = detect_motion({}, shuffled.clusters, cfg);
    REQUIRE(ev_a.size() == ev_b.size());
    for (std::size_t i = 0; i < ev_a.size(); ++i) {
      CHECK(ev_a[i].cluster.centroid_aoa_deg == ev_b[i].cluster.centroid_aoa_deg);
      CHECK(ev_a[i].cluster.centroid_range_m == ev_b[i].cluster.centroid_range_m);
    }
  }
}

TEST_CASE("detect_motion examples") {
  ClusterConfig cfg;
  const std::vector<ClusterResult> a{cluster_at(20.0, 5.0), cluster_at(-10.0, 9.0)};
  CHECK(detect_motion(a, a, cfg).empty());

  const auto fresh = detect_motion({}, std::vector<ClusterResult>{cluster_at(20.0, 5.0)}, cfg, 3);
  REQUIRE(fresh.size() == 1);
  CHECK(fresh[0].is_new());
  CHECK(fresh[0].frame_index == 3);

  CHECK(scaled_distance(20.0, 5.0, 26.0, 5.0, cfg) == doctest::Approx(1.2));
  const auto moved = detect_motion(std::vector<ClusterResult>{cluster_at(20.0, 5.0)},
                                   std::vector<ClusterResult>{cluster_at(26.0, 5.0)}, cfg);
  REQUIRE(moved.size() == 1);
  CHECK_FALSE(moved[0].is_new());
  CHECK(*moved[0].displacement == doctest::Approx(1.2));

  // Below the threshold nothing is reported.
  CHECK(detect_motion(std::vector<ClusterResult>{cluster_at(20.0, 5.0)},
                      std::vector<ClusterResult>{cluster_at(23.0, 5.0)}, cfg)
            .empty());
}

TEST_CASE("detect_motion matches closest pairs first") {
  ClusterConfig cfg;
  cfg.motion_threshold = 0.5;
  const std::vector<ClusterResult> prev{cluster_at(0.0, 5.0), cluster_at(10.0, 5.0)};
  // 9 matches 10 (distance 0.2); 3 then takes 0 (0.6 > 0.5), and 40 is new.
  const std::vector<ClusterResult> curr{cluster_at(3.0, 5.0), cluster_at(9.0, 5.0), cluster_at(40.0, 5.0)};
  const auto ev = detect_motion(prev, curr, cfg);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].cluster.centroid_aoa_deg == 3.0);
  CHECK(*ev[0].displacement == doctest::Approx(0.6));
  CHECK(ev[1].is_new());
}

TEST_CASE("detect_motion of a list against itself is empty") {
  std::mt19937_64 rng(4);
  const ClusterConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const auto out = dbscan(oracle::random_instance(rng), cfg);
    CHECK(detect_motion(out.clusters, out.clusters, cfg).empty());
  }
}

TEST_CASE("frame estimates flatten and drop the background") {
  std::vector<std::vector<PathEstimate>> samples(8);
  for (int i = 0; i < 8; ++i) {
    samples[i] = {{0.0, 3.0, {1.0, 0.0}, 1.0}, {-20.0 + i, 8.0, {0.1, 0.0}, 0.01}};
  }
  CHECK(frame_estimates(samples).size() == 16);
  CHECK(frame_estimates(std::vector<std::vector<PathEstimate>>{}).empty());

  const std::vector<std::vector<PathEstimate>> calibration(3, {{0.0, 3.0, {1.0, 0.0}, 1.0}});
  const auto bg = BackgroundModel::from_estimates(calibration, ClusterConfig{});
  CHECK(bg.reference().size() == 1);
  const auto kept = frame_estimates(samples, &bg);
  CHECK(kept.size() == 8);
  for (const auto& p : kept) CHECK(p.range_m == 8.0);
}

TEST_CASE("cluster config validation") {
  ClusterConfig cfg;
  cfg.eps = 0.0;
  CHECK_THROWS_AS(dbscan(std::vector<AoaRangePoint>{}, cfg), ConfigError);
  cfg = {};
  cfg.aoa_scale_deg = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
