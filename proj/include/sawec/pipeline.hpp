#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sawec/scenario.hpp"

namespace sawec {

using SampleEstimates = std::vector<PathEstimate>;

std::vector<SampleEstimates> estimate_capture(const CfrCapture& capture, const EstimatorConfig& cfg);

/// Assigns CFR samples to video frames by timestamp: sample j (nominally at
/// j / C) feeds frame floor(j V / C). Throws SynchronizationError when a
/// timestamp is off its nominal slot by more than half a CFR period.
std::vector<std::vector<std::size_t>> group_samples_by_frame(const std::vector<double>& timestamps,
                                                             const TimingConfig& timing,
                                                             std::size_t frame_count);

struct FramePerception {
  std::size_t frame_index = 0;
  std::vector<std::size_t> sample_indices;
  std::vector<AoaRangePoint> points;
  ClusteringOutput clustering;
  std::vector<MotionEvent> events;
};

/// Fold over frames in order: flatten, cluster, compare with the previous frame.
std::vector<FramePerception> detect_frames(const std::vector<SampleEstimates>& estimates,
                                           const std::vector<std::vector<std::size_t>>& frame_samples,
                                           const ClusterConfig& cfg, const BackgroundModel* background);

/// NIC-to-target distance used for projection, from a path length estimate.
double corrected_range(const Scenario& scn, double aoa_nic_deg, double path_length_m);

struct FrameRois {
  std::size_t frame_index = 0;
  std::vector<RoiSpec> rois;  // merged
  std::size_t degenerate_skipped = 0;
};

std::vector<FrameRois> extract_rois(const Scenario& scn, const std::vector<FramePerception>& frames,
                                    double alpha);

struct Containment {
  std::size_t pairs = 0;
  std::size_t sawec_hits = 0;
  std::size_t tile_hits = 0;

  std::optional<double> sawec() const {
    return pairs == 0 ? std::nullopt : std::optional<double>(double(sawec_hits) / double(pairs));
  }
  std::optional<double> tiles() const {
    return pairs == 0 ? std::nullopt : std::optional<double>(double(tile_hits) / double(pairs));
  }
};

bool rect_inside_single_tile(const PixelRect& box, int frame_width_px, int tile_px = 640);

Containment score_containment(const std::vector<FrameTruth>& truth, const std::vector<FrameRois>& rois);

struct PipelineOptions {
  std::vector<Strategy> strategies{std::begin(kAllStrategies), std::end(kAllStrategies)};
  // Render every frame and crop the ROIs, checking byte counts against the
  // accounting model.
  bool crop_frames = true;
  std::optional<std::filesystem::path> crop_dir;
};

struct PipelineResult {
  std::vector<SampleEstimates> estimates;
  std::vector<SampleEstimates> calibration_estimates;
  std::vector<FramePerception> frames;
  std::vector<FrameRois> rois;
  std::vector<FrameMetricsRow> metrics;
  Containment containment;
  nlohmann::json summary;
};

/// Stages after estimation, reusable across ROI sizing factors.
PipelineResult finish_pipeline(const Scenario& scn, const std::vector<FrameTruth>& truth,
                               std::vector<SampleEstimates> estimates,
                               std::vector<SampleEstimates> calibration_estimates,
                               const std::vector<double>& timestamps, const PipelineOptions& opts = {});

/// Throws ConfigError when the capture was taken with a different channel layout.
void check_capture_matches(const CfrCapture& capture, const Scenario& scn);

PipelineResult run_pipeline(const Scenario& scn, const GeneratedScenario& inputs,
                            const PipelineOptions& opts = {});

nlohmann::json estimates_record(std::size_t sample_index, double timestamp_s, const SampleEstimates& paths);
void write_estimates_jsonl(std::ostream& out, const CfrCapture& capture,
                           const std::vector<SampleEstimates>& estimates);
struct EstimatesFile {
  std::vector<double> timestamps;
  std::vector<SampleEstimates> estimates;
};
EstimatesFile read_estimates_jsonl(std::istream& in);

void write_cluster_log(std::ostream& out, const std::vector<FramePerception>& frames);
nlohmann::json rois_to_json(const std::vector<FrameRois>& rois);

/// Lists every regular file in dir (sorted, with sizes) into dir/manifest.json.
void write_manifest(const std::filesystem::path& dir, const Scenario& scn, const std::string& stage);

/// Writes every pipeline artefact plus a manifest into dir.
void write_run_directory(const std::filesystem::path& dir, const Scenario& scn,
                         const GeneratedScenario& inputs, const PipelineResult& result);

}  // namespace sawec
