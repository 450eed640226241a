#include "sawec/channel.hpp"

#include <cmath>
#include <random>

#include "sawec/error.hpp"

namespace sawec {

void ChannelConfig::validate() const {
  if (num_subcarriers < 2 || num_subcarriers % 2 != 0) {
    throw ConfigError("num_subcarriers must be even and >= 2");
  }
  if (num_rx_antennas < 1) throw ConfigError("num_rx_antennas must be >= 1");
  if (!(carrier_freq_hz > 0.0)) throw ConfigError("carrier_freq_hz must be positive");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier_spacing_hz must be positive");
  if (!(speed_of_light_mps > 0.0)) throw ConfigError("speed_of_light_mps must be positive");
  if (!(spacing_m() > 0.0)) throw ConfigError("antenna spacing must be positive");
}

double CfrSample::power() const {
  double p = 0.0;
  for (const auto& v : h_) p += std::norm(v);
  return p;
}

bool CfrSample::all_finite() const {
  for (const auto& v : h_) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

CfrSample& CfrSample::operator+=(const CfrSample& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw ConfigError("CFR dimension mismatch");
  for (std::size_t i = 0; i < h_.size(); ++i) h_[i] += other.h_[i];
  return *this;
}

CfrSample& CfrSample::operator-=(const CfrSample& other) {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw ConfigError("CFR dimension mismatch");
  for (std::size_t i = 0; i < h_.size(); ++i) h_[i] -= other.h_[i];
  return *this;
}

double path_delay(const MultipathComponent& comp, std::size_t antenna, const ChannelConfig& cfg) {
  const double offset =
      static_cast<double>(antenna) * std::sin(deg_to_rad(comp.aoa_deg)) * cfg.spacing_m();
  return (comp.path_length_m + offset) / cfg.speed_of_light_mps;
}

void accumulate_path(CfrSample& target, const MultipathComponent& path, const ChannelConfig& cfg,
                     double scale) {
  if (!target.matches(cfg)) throw ConfigError("CFR sample does not match channel config");
  const cplx gain = path.amplitude * scale;
  for (std::size_t n = 0; n < cfg.num_rx_antennas; ++n) {
    const double tau = path_delay(path, n, cfg);
    for (std::size_t row = 0; row < cfg.num_subcarriers; ++row) {
      // Phase in cycles, reduced before scaling by 2*pi to keep precision.
      double cycles = cfg.subcarrier_freq_hz(row) * tau;
      cycles -= std::round(cycles);
      target.at(row, n) += gain * std::polar(1.0, -2.0 * kPi * cycles);
    }
  }
}

CfrSample synthesize_cfr(std::span<const MultipathComponent> paths, const ChannelConfig& cfg,
                         double timestamp_s, double noise_std, std::uint64_t seed) {
  cfg.validate();
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  CfrSample out(timestamp_s, cfg.num_subcarriers, cfg.num_rx_antennas);
  for (const auto& p : paths) accumulate_path(out, p, cfg);
  if (noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_std / std::sqrt(2.0));
    for (auto& v : out.data()) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      v += cplx(re, im);
    }
  }
  return out;
}

}  // namespace sawec
