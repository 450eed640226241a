#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "sawec/roi.hpp"

namespace sawec {

inline constexpr double kBytesPerMb = 1e6;

enum class Strategy { kSawec, kFullFrame, kTiles640 };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);
inline constexpr Strategy kAllStrategies[] = {Strategy::kSawec, Strategy::kFullFrame, Strategy::kTiles640};

struct TimingConfig {
  double cfr_rate_hz = 200.0;
  double frame_rate_fps = 25.0;
  double per_cfr_processing_s = 0.080;

  void validate() const;
};

struct SensingTiming {
  double total_s = 0.0;
  double latency_s = 0.0;
};

/// T + (C/V - 1)/C, and that minus one frame period.
SensingTiming sensing_processing(const TimingConfig& tc);

/// Per-strategy fixed costs on the edge side.
struct StrategyCosts {
  double io_s_per_mb = 0.0;
  double inference_s = 0.0;
  double end_device_s = 0.0;
};

struct LinkModel {
  double rate_bytes_per_s = 70.3e6;
  // Defaults reproduce the measured breakdown: each I/O coefficient is the
  // reported I/O time divided by the payload implied by the reported Tx time.
  StrategyCosts sawec{15.75e-3 / (79.44e-3 * 70.3), 18.43e-3, 0.0};
  StrategyCosts full_frame{528.46e-3 / (1311e-3 * 70.3), 19.79e-3, 1779.34e-3};
  StrategyCosts tiles_640{16.73e-3 / (1221.62e-3 * 70.3), 18.56e-3, 1667.18e-3};

  const StrategyCosts& costs(Strategy s) const;
  void validate() const;
};

struct LatencyBreakdown {
  double tx_s = 0.0;
  double io_s = 0.0;
  double inference_s = 0.0;
  double sensing_proc_s = 0.0;
  double end_device_s = 0.0;
  double end_to_end_s = 0.0;

  static LatencyBreakdown from_components(double tx_s, double io_s, double inference_s,
                                          double sensing_proc_s, double end_device_s);
};

struct FrameDims {
  int width_px = 0;
  int height_px = 0;
};

/// Raw RGB bytes offloaded for one frame. For kSawec the ROIs are merged first.
std::uint64_t occupation(Strategy strategy, FrameDims dims, std::span<const RoiSpec> rois = {});

LatencyBreakdown latency(Strategy strategy, double bytes, const LinkModel& link, const TimingConfig& tc);

struct OccupationReport {
  Strategy strategy = Strategy::kSawec;
  std::size_t frames = 0;
  double total_bytes = 0.0;
  double bytes_per_frame_mean = 0.0;
  double reduction_vs_full = 0.0;

  static OccupationReport from_frames(Strategy s, std::span<const double> frame_bytes);
};

/// 1 - mean(a) / mean(b).
double compare(const OccupationReport& a, const OccupationReport& b);

/// Multiplicative payload factors for the resized and compressed frame variants.
enum class FrameVariant { kOriginal, kResized, kCompressed };
double variant_byte_factor(FrameVariant v);

struct FrameMetricsRow {
  std::size_t frame_index = 0;
  Strategy strategy = Strategy::kSawec;
  double bytes = 0.0;
  LatencyBreakdown latency;
};

void write_metrics_csv(std::ostream& out, std::span<const FrameMetricsRow> rows);
std::vector<FrameMetricsRow> read_metrics_csv(std::istream& in);

/// Means, reductions and (when supplied) containment per strategy.
nlohmann::json metrics_summary(std::span<const FrameMetricsRow> rows);

}  // namespace sawec
