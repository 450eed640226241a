#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sawec/estimator.hpp"

namespace sawec {

struct ClusterConfig {
  double eps = 1.0;
  std::size_t min_pts = 4;
  double aoa_scale_deg = 5.0;
  double range_scale_m = 0.5;
  double motion_threshold = 1.0;

  void validate() const;
};

struct AoaRangePoint {
  double aoa_deg = 0.0;
  double range_m = 0.0;
  double power = 0.0;

  bool operator==(const AoaRangePoint&) const = default;
};

struct ClusterResult {
  std::vector<AoaRangePoint> members;
  double centroid_aoa_deg = 0.0;
  double centroid_range_m = 0.0;
  double extent_aoa_deg = 0.0;
};

struct ClusteringOutput {
  std::vector<ClusterResult> clusters;
  std::vector<AoaRangePoint> noise;
};

struct MotionEvent {
  std::size_t frame_index = 0;
  ClusterResult cluster;
  // Empty when the cluster had no counterpart in the previous frame.
  std::optional<double> displacement;

  bool is_new() const { return !displacement.has_value(); }
};

/// Euclidean distance after dividing AoA and range by their scales.
double scaled_distance(double aoa_a, double range_a, double aoa_b, double range_b,
                       const ClusterConfig& cfg);

/// DBSCAN over (aoa / aoa_scale, range / range_scale). Points are processed in
/// lexicographic (aoa, range, power) order, so the result does not depend on
/// input order. Border points join the cluster of their lowest-ordered core
/// neighbour.
ClusteringOutput dbscan(std::span<const AoaRangePoint> points, const ClusterConfig& cfg);

/// Greedy closest-pair matching of current clusters to previous ones.
std::vector<MotionEvent> detect_motion(std::span<const ClusterResult> prev,
                                       std::span<const ClusterResult> curr, const ClusterConfig& cfg,
                                       std::size_t frame_index = 0);

/// Static-scene path set learned from an empty-scene capture.
class BackgroundModel {
 public:
  BackgroundModel() = default;
  BackgroundModel(std::vector<AoaRangePoint> reference, ClusterConfig cfg)
      : reference_(std::move(reference)), cfg_(cfg) {}

  static BackgroundModel from_estimates(std::span<const std::vector<PathEstimate>> calibration,
                                        const ClusterConfig& cfg);

  bool matches(const PathEstimate& p) const;
  bool empty() const { return reference_.empty(); }
  const std::vector<AoaRangePoint>& reference() const { return reference_; }

 private:
  std::vector<AoaRangePoint> reference_;
  ClusterConfig cfg_;
};

/// Flattens the C/V estimate lists of one video frame into clustering points,
/// dropping estimates explained by the background when one is supplied.
std::vector<AoaRangePoint> frame_estimates(std::span<const std::vector<PathEstimate>> samples,
                                           const BackgroundModel* background = nullptr);

}  // namespace sawec
