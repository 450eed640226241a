#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "sawec/channel.hpp"

namespace sawec {

/// Inclusive uniform grid [min, max] with the given step.
struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  double step = 1.0;

  std::size_t size() const;
  double at(std::size_t i) const { return min + step * static_cast<double>(i); }
};

struct EstimatorConfig {
  GridAxis aoa_grid_deg{-90.0, 90.0, 1.0};
  GridAxis range_grid_m{0.0, 25.0, 0.05};
  std::size_t max_paths = 8;
  double residual_power_stop_ratio = 0.01;
  std::size_t refinement_rounds = 3;
  double refinement_convergence_eps = 1e-4;
  // Half-width, in grid cells, of the re-search window used during refinement.
  std::size_t refinement_window = 3;

  void validate() const;
};

struct PathEstimate {
  double aoa_deg = 0.0;
  double range_m = 0.0;
  cplx amplitude{};
  double power = 0.0;
};

/// z(theta, l) = 1/(K N) sum_{k,n} h[k][n] exp(+j 2 pi f_k tau_n(theta, l)).
/// Direct sum; returns A exactly for a noise-free single path evaluated at its
/// own parameters.
cplx matched_filter(const CfrSample& cfr, double aoa_deg, double range_m, const ChannelConfig& cfg);

struct EstimationTrace {
  std::vector<PathEstimate> paths;  // sorted by descending power
  double initial_power = 0.0;
  // Residual power after every extraction and every refinement update, in order.
  std::vector<double> residual_power;
  std::size_t sic_iterations = 0;
  std::size_t refinement_rounds_run = 0;
};

/// Grid matched filter with successive interference cancellation and
/// coordinate-descent refinement. Steering tables are built once per
/// (channel, grid) pair so one instance can process a whole capture.
class PathEstimator {
 public:
  PathEstimator(const ChannelConfig& channel, const EstimatorConfig& config);

  EstimationTrace estimate_traced(const CfrSample& cfr) const;
  std::vector<PathEstimate> estimate(const CfrSample& cfr) const {
    return estimate_traced(cfr).paths;
  }

  /// Matched-filter response over the whole grid: element (range_index, aoa_index).
  Eigen::MatrixXcd grid_response(const CfrSample& cfr) const;

  const ChannelConfig& channel() const { return channel_; }
  const EstimatorConfig& config() const { return config_; }

 private:
  struct Cell {
    std::size_t aoa = 0;
    std::size_t range = 0;
  };

  cplx response_at(const CfrSample& cfr, Cell cell) const;
  Cell global_argmax(const Eigen::MatrixXcd& z) const;
  // z -= grid response of an on-grid path, in closed form.
  void subtract_response(Eigen::MatrixXcd& z, Cell cell, cplx amplitude) const;
  Cell local_argmax(const CfrSample& cfr, Cell around) const;
  MultipathComponent component(Cell cell, cplx amplitude) const;

  ChannelConfig channel_;
  EstimatorConfig config_;
  std::size_t n_aoa_ = 0;
  std::size_t n_range_ = 0;
  Eigen::MatrixXcd range_kernel_;   // (range, subcarrier): exp(j 2 pi k df l / c)
  Eigen::VectorXcd range_carrier_;  // (range): exp(j 2 pi fc l / c)
  Eigen::MatrixXcd steering_;       // (subcarrier, aoa * N + n): exp(j 2 pi f_k n sin(theta) d / c)
};

std::vector<PathEstimate> estimate_paths(const CfrSample& cfr, const ChannelConfig& channel,
                                         const EstimatorConfig& config);

}  // namespace sawec
