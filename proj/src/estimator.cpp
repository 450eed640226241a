#include "sawec/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "sawec/error.hpp"

namespace sawec {
namespace {

cplx unit_phasor_cycles(double cycles) {
  cycles -= std::round(cycles);
  return std::polar(1.0, 2.0 * kPi * cycles);
}

// sum_{k=k0}^{k0+K-1} exp(j 2 pi k x)
cplx dirichlet(double x, int k0, std::size_t K) {
  x -= std::round(x);
  const double Kd = static_cast<double>(K);
  const double den = std::sin(kPi * x);
  const double mag = std::abs(den) < 1e-12 ? Kd : std::sin(kPi * Kd * x) / den;
  return mag * unit_phasor_cycles(0.5 * x * (2.0 * k0 + Kd - 1.0));
}

}  // namespace

std::size_t GridAxis::size() const {
  if (!(step > 0.0) || max < min) return 0;
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

void EstimatorConfig::validate() const {
  if (!(aoa_grid_deg.step > 0.0) || !(range_grid_m.step > 0.0)) {
    throw ConfigError("estimator grid steps must be positive");
  }
  if (aoa_grid_deg.max < aoa_grid_deg.min || range_grid_m.max < range_grid_m.min) {
    throw ConfigError("estimator grid bounds are inverted");
  }
  if (aoa_grid_deg.min < -90.0 || aoa_grid_deg.max > 90.0) {
    throw ConfigError("AoA grid must lie within [-90, 90] degrees");
  }
  if (range_grid_m.min < 0.0) throw ConfigError("range grid must be non-negative");
  if (max_paths < 1) throw ConfigError("max_paths must be >= 1");
  if (!(residual_power_stop_ratio > 0.0 && residual_power_stop_ratio < 1.0)) {
    throw ConfigError("residual_power_stop_ratio must lie in (0, 1)");
  }
  if (!(refinement_convergence_eps >= 0.0)) {
    throw ConfigError("refinement_convergence_eps must be >= 0");
  }
}

cplx matched_filter(const CfrSample& cfr, double aoa_deg, double range_m, const ChannelConfig& cfg) {
  if (!cfr.matches(cfg)) throw ConfigError("CFR sample does not match channel config");
  const MultipathComponent probe{range_m, aoa_deg, cplx(1.0, 0.0)};
  cplx acc(0.0, 0.0);
  for (std::size_t n = 0; n < cfg.num_rx_antennas; ++n) {
    const double tau = path_delay(probe, n, cfg);
    for (std::size_t row = 0; row < cfg.num_subcarriers; ++row) {
      acc += cfr.at(row, n) * unit_phasor_cycles(cfg.subcarrier_freq_hz(row) * tau);
    }
  }
  return acc / static_cast<double>(cfg.num_subcarriers * cfg.num_rx_antennas);
}

PathEstimator::PathEstimator(const ChannelConfig& channel, const EstimatorConfig& config)
    : channel_(channel), config_(config) {
  channel_.validate();
  config_.validate();
  n_aoa_ = config_.aoa_grid_deg.size();
  n_range_ = config_.range_grid_m.size();
  const std::size_t K = channel_.num_subcarriers;
  const std::size_t N = channel_.num_rx_antennas;
  const double c = channel_.speed_of_light_mps;
  const double df = channel_.subcarrier_spacing_hz;
  const int k0 = channel_.first_subcarrier();

  range_kernel_.resize(static_cast<Eigen::Index>(n_range_), static_cast<Eigen::Index>(K));
  range_carrier_.resize(static_cast<Eigen::Index>(n_range_));
  for (std::size_t r = 0; r < n_range_; ++r) {
    const double l = config_.range_grid_m.at(r);
    range_carrier_(r) = unit_phasor_cycles(channel_.carrier_freq_hz * l / c);
    for (std::size_t row = 0; row < K; ++row) {
      const double k = static_cast<double>(k0 + static_cast<int>(row));
      range_kernel_(r, row) = unit_phasor_cycles(k * df * l / c);
    }
  }

  steering_.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n_aoa_ * N));
  for (std::size_t a = 0; a < n_aoa_; ++a) {
    const double s = std::sin(deg_to_rad(config_.aoa_grid_deg.at(a)));
    for (std::size_t n = 0; n < N; ++n) {
      const double offset = static_cast<double>(n) * s * channel_.spacing_m() / c;
      for (std::size_t row = 0; row < K; ++row) {
        steering_(row, a * N + n) = unit_phasor_cycles(channel_.subcarrier_freq_hz(row) * offset);
      }
    }
  }
}

Eigen::MatrixXcd PathEstimator::grid_response(const CfrSample& cfr) const {
  if (!cfr.matches(channel_)) throw ConfigError("CFR sample does not match channel config");
  const std::size_t K = channel_.num_subcarriers;
  const std::size_t N = channel_.num_rx_antennas;

  Eigen::MatrixXcd weighted(steering_.rows(), steering_.cols());
  for (std::size_t col = 0; col < n_aoa_ * N; ++col) {
    const std::size_t n = col % N;
    for (std::size_t row = 0; row < K; ++row) {
      weighted(row, col) = steering_(row, col) * cfr.at(row, n);
    }
  }
  const Eigen::MatrixXcd per_antenna = range_kernel_ * weighted;

  const double norm = 1.0 / static_cast<double>(K * N);
  Eigen::MatrixXcd z(static_cast<Eigen::Index>(n_range_), static_cast<Eigen::Index>(n_aoa_));
  for (std::size_t a = 0; a < n_aoa_; ++a) {
    for (std::size_t r = 0; r < n_range_; ++r) {
      cplx acc(0.0, 0.0);
      for (std::size_t n = 0; n < N; ++n) acc += per_antenna(r, a * N + n);
      z(r, a) = acc * range_carrier_(r) * norm;
    }
  }
  return z;
}

cplx PathEstimator::response_at(const CfrSample& cfr, Cell cell) const {
  const std::size_t K = channel_.num_subcarriers;
  const std::size_t N = channel_.num_rx_antennas;
  cplx acc(0.0, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    const auto col = static_cast<Eigen::Index>(cell.aoa * N + n);
    for (std::size_t row = 0; row < K; ++row) {
      acc += range_kernel_(cell.range, row) * steering_(row, col) * cfr.at(row, n);
    }
  }
  return acc * range_carrier_(cell.range) / static_cast<double>(K * N);
}

// Scan order (aoa ascending, then range ascending) with strict comparison
// resolves exact ties toward the smallest (theta, l).
PathEstimator::Cell PathEstimator::global_argmax(const Eigen::MatrixXcd& z) const {
  Cell best;
  double best_mag = -1.0;
  for (std::size_t a = 0; a < n_aoa_; ++a) {
    for (std::size_t r = 0; r < n_range_; ++r) {
      const double m = std::norm(z(r, a));
      if (m > best_mag) {
        best_mag = m;
        best = {a, r};
      }
    }
  }
  return best;
}

void PathEstimator::subtract_response(Eigen::MatrixXcd& z, Cell cell, cplx amplitude) const {
  const std::size_t K = channel_.num_subcarriers;
  const std::size_t N = channel_.num_rx_antennas;
  const double c = channel_.speed_of_light_mps;
  const double d = channel_.spacing_m();
  const int k0 = channel_.first_subcarrier();
  const double lp = config_.range_grid_m.at(cell.range);
  const double sp = std::sin(deg_to_rad(config_.aoa_grid_deg.at(cell.aoa)));
  const cplx scale = amplitude / static_cast<double>(K * N);
  for (std::size_t a = 0; a < n_aoa_; ++a) {
    const double ds = d * (std::sin(deg_to_rad(config_.aoa_grid_deg.at(a))) - sp);
    for (std::size_t r = 0; r < n_range_; ++r) {
      const double dl = config_.range_grid_m.at(r) - lp;
      cplx acc(0.0, 0.0);
      for (std::size_t n = 0; n < N; ++n) {
        const double delta = dl + static_cast<double>(n) * ds;
        acc += unit_phasor_cycles(channel_.carrier_freq_hz * delta / c) *
               dirichlet(channel_.subcarrier_spacing_hz * delta / c, k0, K);
      }
      z(r, a) -= scale * acc;
    }
  }
}

// Hill climb: re-search the window around the current cell and move to the
// best strictly larger response until the centre is the window maximum.
PathEstimator::Cell PathEstimator::local_argmax(const CfrSample& cfr, Cell around) const {
  const std::size_t w = config_.refinement_window;
  Cell best = around;
  double best_mag = std::norm(response_at(cfr, best));
  for (std::size_t step = 0; step < n_aoa_ + n_range_; ++step) {
    const Cell centre = best;
    const std::size_t a_lo = centre.aoa > w ? centre.aoa - w : 0;
    const std::size_t a_hi = std::min(n_aoa_ - 1, centre.aoa + w);
    const std::size_t r_lo = centre.range > w ? centre.range - w : 0;
    const std::size_t r_hi = std::min(n_range_ - 1, centre.range + w);
    for (std::size_t a = a_lo; a <= a_hi; ++a) {
      for (std::size_t r = r_lo; r <= r_hi; ++r) {
        const double m = std::norm(response_at(cfr, {a, r}));
        if (m > best_mag) {
          best_mag = m;
          best = {a, r};
        }
      }
    }
    if (best.aoa == centre.aoa && best.range == centre.range) break;
  }
  return best;
}

MultipathComponent PathEstimator::component(Cell cell, cplx amplitude) const {
  return {config_.range_grid_m.at(cell.range), config_.aoa_grid_deg.at(cell.aoa), amplitude};
}

EstimationTrace PathEstimator::estimate_traced(const CfrSample& cfr) const {
  if (!cfr.matches(channel_)) throw ConfigError("CFR sample does not match channel config");
  EstimationTrace trace;
  trace.initial_power = cfr.power();
  if (!(trace.initial_power > 0.0)) return trace;

  struct Extracted {
    Cell cell;
    cplx amplitude;
  };
  std::vector<Extracted> found;
  CfrSample residual = cfr;
  const double stop_power = config_.residual_power_stop_ratio * trace.initial_power;

  // The grid response is linear in the CFR, so each extracted path is
  // removed from it analytically instead of recomputing the full grid.
  Eigen::MatrixXcd z = grid_response(residual);
  while (found.size() < config_.max_paths) {
    const Cell peak = global_argmax(z);
    const cplx amp = z(peak.range, peak.aoa);
    if (std::norm(amp) <= 0.0) break;
    accumulate_path(residual, component(peak, amp), channel_, -1.0);
    found.push_back({peak, amp});
    ++trace.sic_iterations;
    const double p = residual.power();
    trace.residual_power.push_back(p);
    if (p <= stop_power) break;
    if (found.size() < config_.max_paths) subtract_response(z, peak, amp);
  }

  auto extracted_power = [&found] {
    double total = 0.0;
    for (const auto& e : found) total += std::norm(e.amplitude);
    return total;
  };

  for (std::size_t round = 0; round < config_.refinement_rounds && !found.empty(); ++round) {
    const double before = extracted_power();
    for (auto& e : found) {
      accumulate_path(residual, component(e.cell, e.amplitude), channel_, 1.0);
      e.cell = local_argmax(residual, e.cell);
      e.amplitude = response_at(residual, e.cell);
      accumulate_path(residual, component(e.cell, e.amplitude), channel_, -1.0);
      trace.residual_power.push_back(residual.power());
    }
    ++trace.refinement_rounds_run;
    const double after = extracted_power();
    if (before > 0.0 && std::abs(after - before) / before < config_.refinement_convergence_eps) break;
  }

  trace.paths.reserve(found.size());
  for (const auto& e : found) {
    trace.paths.push_back({config_.aoa_grid_deg.at(e.cell.aoa), config_.range_grid_m.at(e.cell.range),
                           e.amplitude, std::norm(e.amplitude)});
  }
  std::sort(trace.paths.begin(), trace.paths.end(), [](const PathEstimate& x, const PathEstimate& y) {
    if (x.power != y.power) return x.power > y.power;
    if (x.aoa_deg != y.aoa_deg) return x.aoa_deg < y.aoa_deg;
    return x.range_m < y.range_m;
  });
  return trace;
}

std::vector<PathEstimate> estimate_paths(const CfrSample& cfr, const ChannelConfig& channel,
                                         const EstimatorConfig& config) {
  return PathEstimator(channel, config).estimate(cfr);
}

}  // namespace sawec
