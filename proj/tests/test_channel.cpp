#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "sawec/capture_io.hpp"
#include "sawec/channel.hpp"
#include "sawec/error.hpp"

using namespace sawec;

TEST_CASE("path delay examples") {
  const ChannelConfig cfg;
  CHECK(path_delay({3.0, 0.0, {1, 0}}, 5, cfg) == doctest::Approx(3.0 / kSpeedOfLight).epsilon(1e-15));
  CHECK(path_delay({3.0, 0.0, {1, 0}}, 5, cfg) == doctest::Approx(1.0007e-8).epsilon(1e-4));
  CHECK(path_delay({5.0, 30.0, {1, 0}}, 0, cfg) == 5.0 / kSpeedOfLight);
  // Independent arithmetic: lambda = c / fc, d = lambda / 2, offset = d sin(30 deg).
  const double lambda = 299792458.0 / 5.25e9;
  CHECK(lambda == doctest::Approx(0.05710).epsilon(1e-3));
  const double expected = (5.0 + 0.5 * lambda * 0.5) / 299792458.0;
  CHECK(path_delay({5.0, 30.0, {1, 0}}, 1, cfg) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(1.6726e-8).epsilon(1e-4));
}

TEST_CASE("synthesize examples") {
  const ChannelConfig cfg;
  const auto empty = synthesize_cfr({}, cfg, 0.0);
  CHECK(empty.rows() == 256);
  CHECK(empty.cols() == 2);
  for (const auto& v : empty.data()) CHECK(v == cplx(0.0, 0.0));

  const std::vector<MultipathComponent> one{{5.0, 30.0, {1.0, 0.0}}};
  const auto single = synthesize_cfr(one, cfg, 0.0);
  for (const auto& v : single.data()) CHECK(std::abs(v) == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<MultipathComponent> two{{5.0, 30.0, {1.0, 0.0}}, {5.0, 30.0, {1.0, 0.0}}};
  const auto doubled = synthesize_cfr(two, cfg, 0.0);
  for (std::size_t i = 0; i < doubled.data().size(); ++i) {
    CHECK(std::abs(doubled.data()[i] - 2.0 * single.data()[i]) < 1e-12);
  }
}

TEST_CASE("synthesis matches a direct evaluation of the model") {
  const ChannelConfig cfg;
  const std::vector<MultipathComponent> paths{{4.2, -17.0, {0.3, -0.2}}, {9.7, 41.0, {0.1, 0.05}}};
  const auto h = synthesize_cfr(paths, cfg, 0.0);
  const double c = 299792458.0;
  const double d = 0.5 * c / 5.25e9;
  for (std::size_t row = 0; row < 256; row += 17) {
    const double f = 5.25e9 + (static_cast<double>(row) - 128.0) * 78.125e3;
    for (std::size_t n = 0; n < 2; ++n) {
      std::complex<double> ref = 0.0;
      for (const auto& p : paths) {
        const double tau = (p.path_length_m + n * d * std::sin(p.aoa_deg * M_PI / 180.0)) / c;
        ref += p.amplitude * std::exp(std::complex<double>(0.0, -2.0 * M_PI * f * tau));
      }
      CHECK(std::abs(h.at(row, n) - ref) < 1e-9);
    }
  }
}

TEST_CASE("linearity over random path sets") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> len(0.5, 30.0), ang(-89.0, 89.0), amp(-1.0, 1.0);
  const ChannelConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<MultipathComponent> a, b, ab;
    for (int i = 0; i < 3; ++i) a.push_back({len(rng), ang(rng), {amp(rng), amp(rng)}});
    for (int i = 0; i < 2; ++i) b.push_back({len(rng), ang(rng), {amp(rng), amp(rng)}});
    ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    auto sum = synthesize_cfr(a, cfg, 0.0);
    sum += synthesize_cfr(b, cfg, 0.0);
    const auto joint = synthesize_cfr(ab, cfg, 0.0);
    for (std::size_t i = 0; i < sum.data().size(); ++i) CHECK(std::abs(sum.data()[i] - joint.data()[i]) < 1e-12);
  }
}

TEST_CASE("single path has constant modulus") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> len(0.5, 30.0), ang(-89.0, 89.0), mag(0.01, 5.0);
  ChannelConfig cfg;
  cfg.num_rx_antennas = 4;
  for (int trial = 0; trial < 20; ++trial) {
    const double a0 = mag(rng);
    const std::vector<MultipathComponent> p{{len(rng), ang(rng), std::polar(a0, 0.7)}};
    const auto h = synthesize_cfr(p, cfg, 0.0);
    for (const auto& v : h.data()) CHECK(std::abs(std::abs(v) - a0) <= 1e-12 * a0);
  }
}

TEST_CASE("phase slope across subcarriers equals -2 pi df tau") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> len(0.5, 30.0), ang(-80.0, 80.0);
  const ChannelConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const MultipathComponent p{len(rng), ang(rng), {1.0, 0.0}};
    const std::vector<MultipathComponent> one{p};
    const auto h = synthesize_cfr(one, cfg, 0.0);
    for (std::size_t n = 0; n < cfg.num_rx_antennas; ++n) {
      const double expected = -2.0 * M_PI * cfg.subcarrier_spacing_hz * path_delay(p, n, cfg);
      // Unwrap, then least-squares fit of phase against subcarrier index.
      std::vector<double> phase(cfg.num_subcarriers);
      phase[0] = std::arg(h.at(0, n));
      for (std::size_t k = 1; k < phase.size(); ++k) {
        double step = std::arg(h.at(k, n)) - std::arg(h.at(k - 1, n));
        const double want = expected;
        step += 2.0 * M_PI * std::round((want - step) / (2.0 * M_PI));
        phase[k] = phase[k - 1] + step;
      }
      const double kk = static_cast<double>(phase.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t k = 0; k < phase.size(); ++k) {
        sx += k;
        sy += phase[k];
        sxx += double(k) * k;
        sxy += k * phase[k];
      }
      const double slope = (kk * sxy - sx * sy) / (kk * sxx - sx * sx);
      const double icpt = (sy - slope * sx) / kk;
      double worst = 0.0;
      for (std::size_t k = 0; k < phase.size(); ++k) worst = std::max(worst, std::abs(phase[k] - icpt - slope * k));
      CHECK(worst < 1e-9);
      CHECK(std::abs(std::remainder(slope - expected, 2.0 * M_PI)) < 1e-9);
    }
  }
}

TEST_CASE("noise is deterministic per seed and has the requested power") {
  const ChannelConfig cfg;
  const std::vector<MultipathComponent> p{{5.0, 10.0, {1.0, 0.0}}};
  const auto a = synthesize_cfr(p, cfg, 0.0, 0.1, 42);
  const auto b = synthesize_cfr(p, cfg, 0.0, 0.1, 42);
  const auto c = synthesize_cfr(p, cfg, 0.0, 0.1, 43);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));

  const std::vector<MultipathComponent> none;
  ChannelConfig big = cfg;
  big.num_rx_antennas = 64;
  const auto w = synthesize_cfr(none, big, 0.0, 0.5, 9);
  double e = 0.0;
  for (const auto& v : w.data()) e += std::norm(v);
  CHECK(e / w.data().size() == doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("config validation") {
  ChannelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.num_subcarriers = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.carrier_freq_hz = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  CHECK(cfg.spacing_m() == doctest::Approx(0.5 * cfg.wavelength_m()));
  cfg.antenna_spacing_m = 0.03;
  CHECK(cfg.spacing_m() == 0.03);
}

TEST_CASE("capture round trip through the binary format") {
  ChannelConfig cfg;
  cfg.num_subcarriers = 16;
  CfrCapture cap{cfg, {}};
  const std::vector<MultipathComponent> p{{5.0, 10.0, {0.3, 0.4}}};
  for (int i = 0; i < 3; ++i) cap.samples.push_back(synthesize_cfr(p, cfg, i * 0.005, 0.01, i));
  std::stringstream ss;
  write_capture(ss, cap);
  const auto back = read_capture(ss);
  CHECK(back.config.num_subcarriers == 16);
  CHECK(back.config.spacing_m() == cfg.spacing_m());
  REQUIRE(back.samples.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back.samples[i].timestamp_s() == cap.samples[i].timestamp_s());
    CHECK(std::equal(back.samples[i].data().begin(), back.samples[i].data().end(), cap.samples[i].data().begin()));
  }
  std::stringstream bad("NOTACAPTURE");
  CHECK_THROWS_AS(read_capture(bad), IoError);

  const auto j = capture_to_json(cap);
  const auto jb = capture_from_json(j);
  CHECK(std::equal(jb.samples[2].data().begin(), jb.samples[2].data().end(), cap.samples[2].data().begin()));
}
