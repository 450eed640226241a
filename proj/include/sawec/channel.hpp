#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sawec {

using cplx = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// OFDM receiver layout. Subcarrier k in {-K/2, ..., K/2-1} sits at
/// carrier_freq_hz + k * subcarrier_spacing_hz.
struct ChannelConfig {
  double carrier_freq_hz = 5.25e9;
  double subcarrier_spacing_hz = 78.125e3;
  std::size_t num_subcarriers = 256;
  std::size_t num_rx_antennas = 2;
  // Non-positive means "half a carrier wavelength".
  double antenna_spacing_m = 0.0;
  double speed_of_light_mps = kSpeedOfLight;

  double wavelength_m() const { return speed_of_light_mps / carrier_freq_hz; }
  double bandwidth_hz() const {
    return subcarrier_spacing_hz * static_cast<double>(num_subcarriers);
  }
  double spacing_m() const {
    return antenna_spacing_m > 0.0 ? antenna_spacing_m : 0.5 * wavelength_m();
  }
  int first_subcarrier() const { return -static_cast<int>(num_subcarriers / 2); }
  double subcarrier_freq_hz(std::size_t row) const {
    return carrier_freq_hz +
           static_cast<double>(first_subcarrier() + static_cast<int>(row)) * subcarrier_spacing_hz;
  }

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  bool operator==(const ChannelConfig&) const = default;
};

/// One propagation path: total length, arrival angle (degrees, positive to
/// the right of boresight) and complex gain.
struct MultipathComponent {
  double path_length_m = 0.0;
  double aoa_deg = 0.0;
  cplx amplitude{1.0, 0.0};
};

/// K x N channel frequency response snapshot, stored row-major over
/// (subcarrier row, antenna).
class CfrSample {
 public:
  CfrSample() = default;
  CfrSample(double timestamp_s, std::size_t rows, std::size_t cols)
      : timestamp_s_(timestamp_s), rows_(rows), cols_(cols), h_(rows * cols) {}

  double timestamp_s() const { return timestamp_s_; }
  void set_timestamp(double t) { timestamp_s_ = t; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& at(std::size_t row, std::size_t n) { return h_[row * cols_ + n]; }
  const cplx& at(std::size_t row, std::size_t n) const { return h_[row * cols_ + n]; }

  std::span<cplx> data() { return h_; }
  std::span<const cplx> data() const { return h_; }

  double power() const;
  bool all_finite() const;
  bool matches(const ChannelConfig& cfg) const {
    return rows_ == cfg.num_subcarriers && cols_ == cfg.num_rx_antennas;
  }

  CfrSample& operator+=(const CfrSample& other);
  CfrSample& operator-=(const CfrSample& other);

 private:
  double timestamp_s_ = 0.0;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> h_;
};

double path_delay(const MultipathComponent& comp, std::size_t antenna, const ChannelConfig& cfg);

/// Sum of path contributions plus circular complex Gaussian noise with
/// per-entry standard deviation noise_std (E|w|^2 = noise_std^2).
CfrSample synthesize_cfr(std::span<const MultipathComponent> paths, const ChannelConfig& cfg,
                         double timestamp_s, double noise_std = 0.0, std::uint64_t seed = 0);

// Adds (scale * path) into an existing sample without allocating.
void accumulate_path(CfrSample& target, const MultipathComponent& path, const ChannelConfig& cfg,
                     double scale = 1.0);

}  // namespace sawec
