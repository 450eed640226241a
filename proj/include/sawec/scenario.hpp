#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "sawec/capture_io.hpp"
#include "sawec/cluster.hpp"
#include "sawec/estimator.hpp"
#include "sawec/geometry.hpp"
#include "sawec/metrics.hpp"
#include "sawec/roi.hpp"

namespace sawec {

// Floor plan: NIC array at (nic_x_m, 0) facing +y, camera at (camera_x_m, 0).
struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Subject {
  std::vector<Point2> waypoints;
  double speed_mps = 1.0;
  double reflectivity = 1.0;
  // The dominant scattering centre is redrawn every CFR sample, uniformly
  // across this width, perpendicular to the line of sight from the NIC.
  double body_width_m = 0.0;
  // Visible width used for an automatic box; 0 reuses body_width_m.
  double visual_width_m = 0.0;
  // 0 derives the width from the visible width and the camera distance.
  int box_width_px = 160;
  int box_height_px = 160;
};

enum class RangeCorrection { kNone, kHalfDirect, kBistatic };

struct Scenario {
  GeometryConfig geometry;
  Point2 transmitter{0.0, 3.0};
  double direct_path_gain = 1.0;
  ChannelConfig channel;
  TimingConfig timing;
  ClusterConfig cluster;
  RoiConfig roi;
  EstimatorConfig estimator;
  LinkModel link;
  std::vector<MultipathComponent> static_reflectors;
  std::vector<Subject> subjects;
  double duration_s = 4.0;
  std::uint64_t seed = 1;
  double noise_std = 0.0;
  bool background_subtraction = true;
  // Empty-scene snapshots used to learn the background; 0 means ceil(C/V).
  std::size_t calibration_samples = 0;
  RangeCorrection range_correction = RangeCorrection::kHalfDirect;

  std::size_t cfr_sample_count() const;
  std::size_t frame_count() const;
  Point2 nic_position() const { return {geometry.nic_x_m, 0.0}; }
  Point2 camera_position() const { return {geometry.camera_x_m, 0.0}; }
  double direct_path_length_m() const;

  void validate() const;
};

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario_file(const std::filesystem::path& path);

Point2 subject_position(const Subject& s, double t);

struct SubjectTruth {
  Point2 position;
  double aoa_nic_deg = 0.0;
  double range_nic_m = 0.0;
  double path_length_m = 0.0;
  double theta_deg = 0.0;
  PixelRect box;
};

struct FrameTruth {
  std::size_t frame_index = 0;
  double timestamp_s = 0.0;
  std::vector<SubjectTruth> subjects;
};

nlohmann::json ground_truth_to_json(const std::vector<FrameTruth>& truth);
std::vector<FrameTruth> ground_truth_from_json(const nlohmann::json& j);

struct GeneratedScenario {
  CfrCapture capture;
  CfrCapture calibration;
  std::vector<FrameTruth> truth;
};

/// Static paths (direct + reflectors) present in every snapshot.
std::vector<MultipathComponent> static_paths(const Scenario& scn);
std::vector<MultipathComponent> paths_at_sample(const Scenario& scn, std::size_t sample_index);
FrameTruth frame_truth(const Scenario& scn, std::size_t frame_index);

GeneratedScenario generate(const Scenario& scn);

inline constexpr Frame::Rgb kBackgroundColor{48, 48, 48};
inline constexpr Frame::Rgb kSubjectColor{220, 64, 48};

/// Flat background with each subject's ground-truth box painted on it.
Frame render_frame(const Scenario& scn, const FrameTruth& truth);

}  // namespace sawec
