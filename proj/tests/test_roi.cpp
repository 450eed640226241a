#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "sawec/error.hpp"
#include "sawec/roi.hpp"

using namespace sawec;

namespace {

Frame random_frame(std::mt19937_64& rng, int w, int h) {
  Frame f = Frame::filled(w, h, {0, 0, 0});
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& p : f.pixels) p = static_cast<std::uint8_t>(byte(rng));
  return f;
}

// Column roll: out(r, c) = in(r, c - k mod W).
Frame roll(const Frame& f, int k) {
  Frame out = f;
  for (int r = 0; r < f.height_px; ++r) {
    for (int c = 0; c < f.width_px; ++c) {
      out.set_pixel(r, ((c + k) % f.width_px + f.width_px) % f.width_px, f.pixel(r, c));
    }
  }
  return out;
}

RoiConfig small_cfg(int w, int h) {
  RoiConfig cfg;
  cfg.frame_width_px = w;
  cfg.frame_height_px = h;
  cfg.min_side_px = 1;
  return cfg;
}

}  // namespace

TEST_CASE("side formula examples") {
  CHECK(roi_side_px(18.675, 2.0, 9600, 8) == 996);
  CHECK(roi_side_px(0.0, 2.0, 9600, 8) == 8);
  CHECK(roi_side_px(200.0, 2.0, 9600, 8) == 9600);
}

TEST_CASE("side formula over random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ext(0.0, 90.0), alpha(0.25, 4.0);
  std::uniform_int_distribution<int> width(360, 20000);
  int in_bounds = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = ext(rng), al = alpha(rng);
    const int w = width(rng);
    const double raw = std::round(a * al * w / 360.0);
    const int side = roi_side_px(a, al, w, 8);
    if (raw > 8 && raw < w) {
      CHECK(side == static_cast<int>(raw));
      ++in_bounds;
    } else {
      CHECK(side == (raw <= 8 ? 8 : w));
    }
    // Monotone in alpha and extent.
    CHECK(roi_side_px(a, al * 1.5, w, 8) >= side);
    CHECK(roi_side_px(a + 1.0, al, w, 8) >= side);
  }
  CHECK(in_bounds > 900);
}

TEST_CASE("roi placement") {
  RoiConfig cfg;
  const RoiSpec mid = roi_at_theta(180.0, 100, cfg);
  CHECK(mid.center_col_px == 4800);
  CHECK(mid.center_row_px == 2400);
  CHECK(mid.left_px == 4750);
  CHECK(mid.top_px == 2350);
  CHECK(mid.clipped_height_px == 100);

  const RoiSpec seam = roi_at_theta(0.5, 400, cfg);
  CHECK(seam.center_col_px == 13);
  CHECK(seam.left_px == -187);

  CHECK(roi_at_theta(-90.0, 10, cfg).center_theta_deg == 270.0);
  CHECK(roi_at_theta(720.0, 10, cfg).center_col_px == 0);

  RoiConfig top = cfg;
  top.center_row_px = 50;
  const RoiSpec clipped = roi_at_theta(90.0, 400, top);
  CHECK(clipped.top_px == -150);
  CHECK(clipped.clipped_top_px == 0);
  CHECK(clipped.clipped_height_px == 250);
  CHECK(clipped.side_px == 400);
  CHECK(clipped.pixel_count() == 400u * 250u);
}

TEST_CASE("crop examples") {
  RoiConfig cfg;
  Frame f = Frame::filled(9600, 4800, {0, 0, 0});
  // Encode the column in the first two channels so the source of every byte is visible.
  for (int r = 2300; r < 2500; ++r) {
    for (int c = 0; c < 9600; ++c) {
      f.set_pixel(r, c, {static_cast<std::uint8_t>(c & 0xff), static_cast<std::uint8_t>(c >> 8), 7});
    }
  }
  const RoiSpec mid = roi_at_theta(180.0, 100, cfg);
  const Frame a = crop(f, mid);
  CHECK(a.width_px == 100);
  CHECK(a.height_px == 100);
  for (int c = 0; c < 100; ++c) {
    const auto px = a.pixel(50, c);
    CHECK(px[0] + 256 * px[1] == 4750 + c);
  }

  const RoiSpec seam = roi_at_theta(0.5, 400, cfg);
  const Frame b = crop(f, seam);
  CHECK(b.width_px == 400);
  CHECK(b.height_px == 400);
  for (int c = 0; c < 400; ++c) {
    const auto px = b.pixel(150, c);
    const int src = px[0] + 256 * px[1];
    CHECK(src == (c < 187 ? 9600 - 187 + c : c - 187));
  }
  const Frame oracle_b = oracle::modular_crop(f, seam.left_px, seam.clipped_top_px, 400, seam.clipped_height_px);
  CHECK(b.pixels == oracle_b.pixels);
}

TEST_CASE("crop clips rows and keeps width") {
  Frame f = Frame::filled(64, 32, {1, 2, 3});
  RoiConfig cfg = small_cfg(64, 32);
  cfg.center_row_px = 3;
  const RoiSpec roi = roi_at_theta(90.0, 20, cfg);
  const Frame out = crop(f, roi);
  CHECK(out.width_px == 20);
  CHECK(out.height_px == 13);
  CHECK(out.pixels.size() == 3u * roi.pixel_count());
}

TEST_CASE("crop matches modular copy and is roll invariant") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> wd(16, 120), hd(8, 60);
  std::uniform_real_distribution<double> th(0.0, 360.0);
  for (int i = 0; i < 200; ++i) {
    const int w = wd(rng), h = hd(rng);
    const Frame f = random_frame(rng, w, h);
    RoiConfig cfg = small_cfg(w, h);
    cfg.center_row_px = std::uniform_int_distribution<int>(0, h - 1)(rng);
    const int side = std::uniform_int_distribution<int>(1, w)(rng);
    const double theta = th(rng);
    const RoiSpec roi = roi_at_theta(theta, side, cfg);
    const Frame out = crop(f, roi);
    REQUIRE(out.valid());
    const Frame ref = oracle::modular_crop(f, roi.left_px, roi.clipped_top_px, roi.side_px, roi.clipped_height_px);
    CHECK(out.pixels == ref.pixels);

    const int k = std::uniform_int_distribution<int>(-2 * w, 2 * w)(rng);
    const RoiSpec shifted = roi_at_theta(theta + 360.0 * k / w, side, cfg);
    const Frame rolled = crop(roll(f, k), shifted);
    CHECK(rolled.pixels == out.pixels);
  }
}

TEST_CASE("crop rejects mismatched frames") {
  const RoiSpec roi = roi_at_theta(10.0, 50, RoiConfig{});
  CHECK_THROWS_AS(crop(Frame::filled(100, 100, {0, 0, 0}), roi), ConsistencyError);
  Frame broken = Frame::filled(9600, 4800, {0, 0, 0});
  broken.pixels.pop_back();
  CHECK_THROWS_AS(crop(broken, roi), ConsistencyError);
}

TEST_CASE("merge") {
  RoiConfig cfg;
  const RoiSpec a = roi_at_theta(90.0, 200, cfg);
  const RoiSpec far = roi_at_theta(200.0, 200, cfg);
  CHECK(merge_rois({a, far}).size() == 2);

  // 150 px of column overlap on a 200 px side: merged into a 250 px bounding square.
  const RoiSpec b = roi_at_theta(90.0 + 50 * 360.0 / 9600, 200, cfg);
  const auto m = merge_rois({a, b});
  REQUIRE(m.size() == 1);
  CHECK(m[0].side_px == 250);
  CHECK(m[0].left_px == a.left_px);
  CHECK(rect_inside_roi(a.clipped_rect(), m[0]));
  CHECK(rect_inside_roi(b.clipped_rect(), m[0]));

  // Overlap under half the smaller side stays separate.
  const RoiSpec c = roi_at_theta(90.0 + 120 * 360.0 / 9600, 200, cfg);
  CHECK(merge_rois({a, c}).size() == 2);

  // Across the seam.
  const RoiSpec s1 = roi_at_theta(359.0, 400, cfg);
  const RoiSpec s2 = roi_at_theta(1.0, 400, cfg);
  const auto ms = merge_rois({s2, s1});
  REQUIRE(ms.size() == 1);
  CHECK(rect_inside_roi(s1.clipped_rect(), ms[0]));
  CHECK(rect_inside_roi(s2.clipped_rect(), ms[0]));
  CHECK(ms[0].side_px < 1000);

  // Identical ROIs collapse; order does not matter.
  CHECK(merge_rois({a, a, a}).size() == 1);
  const auto ab = merge_rois({a, far, b});
  const auto ba = merge_rois({b, far, a});
  REQUIRE(ab.size() == ba.size());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    CHECK(ab[i].left_px == ba[i].left_px);
    CHECK(ab[i].side_px == ba[i].side_px);
  }
}

TEST_CASE("merged area never exceeds the frame") {
  std::mt19937_64 rng(3);
  RoiConfig cfg = small_cfg(360, 180);
  std::uniform_real_distribution<double> th(0.0, 360.0);
  std::uniform_int_distribution<int> sd(1, 360), nd(1, 12);
  for (int i = 0; i < 300; ++i) {
    std::vector<RoiSpec> rois;
    const int n = nd(rng);
    for (int j = 0; j < n; ++j) rois.push_back(roi_at_theta(th(rng), sd(rng), cfg));
    const auto merged = merge_rois(rois);
    CHECK(merged.size() <= rois.size());
    for (const auto& r : merged) {
      CHECK(r.side_px <= 360);
      CHECK(r.clipped_height_px <= 180);
    }
    // Every input is still covered by some merged ROI.
    for (const auto& r : rois) {
      bool covered = false;
      for (const auto& m : merged) covered = covered || rect_inside_roi(r.clipped_rect(), m);
      CHECK(covered);
    }
  }
}

TEST_CASE("rect containment") {
  RoiConfig cfg;
  const RoiSpec roi = roi_at_theta(0.0, 400, cfg);  // columns [-200, 200)
  CHECK(rect_inside_roi({-200, 2300, 400, 100}, roi));
  CHECK(rect_inside_roi({9400, 2300, 400, 100}, roi));
  CHECK_FALSE(rect_inside_roi({-201, 2300, 400, 100}, roi));
  CHECK_FALSE(rect_inside_roi({0, 2100, 10, 200}, roi));
  CHECK_FALSE(rect_inside_roi({0, 2300, 0, 10}, roi));
  const RoiSpec full = roi_at_theta(0.0, 9600, cfg);
  CHECK(rect_inside_roi({5000, 0, 9600, 10}, full));
}

TEST_CASE("roi from target") {
  const auto geom = GeometryConfig::from_positions(0.0, 0.0, 180.0);
  RoiConfig cfg;
  const RoiSpec r = roi_from_target(0.0, 4.0, 18.675, geom, cfg, 12);
  CHECK(r.frame_index == 12);
  CHECK(r.center_theta_deg == 180.0);
  CHECK(r.side_px == 996);
  CHECK_THROWS_AS(roi_from_target(0.0, 4.0, -1.0, geom, cfg), ConfigError);
  CHECK_THROWS_AS(roi_from_target(95.0, 4.0, 1.0, geom, cfg), DegenerateGeometryError);
  RoiConfig bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(roi_at_theta(0.0, 10, bad), ConfigError);
}

TEST_CASE("json and ppm round trip") {
  RoiConfig cfg;
  const RoiSpec r = roi_at_theta(33.3, 321, cfg, 4);
  const RoiSpec back = roi_from_json(nlohmann::json::parse(roi_to_json(r).dump()));
  CHECK(back.center_theta_deg == r.center_theta_deg);
  CHECK(back.left_px == r.left_px);
  CHECK(back.side_px == r.side_px);
  CHECK(back.clipped_height_px == r.clipped_height_px);
  CHECK(back.frame_index == 4);

  std::mt19937_64 rng(9);
  const Frame f = random_frame(rng, 37, 19);
  std::stringstream ss;
  write_ppm(ss, f);
  const Frame g = read_ppm(ss);
  CHECK(g.width_px == 37);
  CHECK(g.height_px == 19);
  CHECK(g.pixels == f.pixels);

  std::stringstream junk("P3\n1 1\n255\n0 0 0");
  CHECK_THROWS(read_ppm(junk));
}
