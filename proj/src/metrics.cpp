#include "sawec/metrics.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "sawec/error.hpp"

namespace sawec {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kSawec:
      return "sawec";
    case Strategy::kFullFrame:
      return "full_frame";
    case Strategy::kTiles640:
      return "tiles_640";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "sawec") return Strategy::kSawec;
  if (name == "full_frame" || name == "full") return Strategy::kFullFrame;
  if (name == "tiles_640" || name == "tiles") return Strategy::kTiles640;
  throw ConfigError("unknown offloading strategy '" + name + "'");
}

void TimingConfig::validate() const {
  if (!(frame_rate_fps > 0.0)) throw ConfigError("frame_rate_fps must be positive");
  if (!(cfr_rate_hz >= frame_rate_fps)) throw ConfigError("cfr_rate_hz must be >= frame_rate_fps");
  if (!(per_cfr_processing_s > 0.0)) throw ConfigError("per_cfr_processing_s must be positive");
}

SensingTiming sensing_processing(const TimingConfig& tc) {
  tc.validate();
  const double samples_per_frame = tc.cfr_rate_hz / tc.frame_rate_fps;
  const double total = tc.per_cfr_processing_s + (samples_per_frame - 1.0) / tc.cfr_rate_hz;
  return {total, total - 1.0 / tc.frame_rate_fps};
}

const StrategyCosts& LinkModel::costs(Strategy s) const {
  switch (s) {
    case Strategy::kSawec:
      return sawec;
    case Strategy::kFullFrame:
      return full_frame;
    case Strategy::kTiles640:
      return tiles_640;
  }
  throw ConfigError("unknown strategy");
}

void LinkModel::validate() const {
  if (!(rate_bytes_per_s > 0.0)) throw ConfigError("link rate must be positive");
}

LatencyBreakdown LatencyBreakdown::from_components(double tx_s, double io_s, double inference_s,
                                                   double sensing_proc_s, double end_device_s) {
  return {tx_s, io_s, inference_s, sensing_proc_s, end_device_s,
          tx_s + io_s + inference_s + sensing_proc_s + end_device_s};
}

std::uint64_t occupation(Strategy strategy, FrameDims dims, std::span<const RoiSpec> rois) {
  if (dims.width_px <= 0 || dims.height_px <= 0) throw ConfigError("frame dimensions must be positive");
  const auto w = static_cast<std::uint64_t>(dims.width_px);
  const auto h = static_cast<std::uint64_t>(dims.height_px);
  switch (strategy) {
    case Strategy::kFullFrame:
      return 3 * w * h;
    case Strategy::kTiles640:
      return 3ull * 640 * 640 * ((w + 639) / 640) * ((h + 639) / 640);
    case Strategy::kSawec: {
      const auto merged = merge_rois(std::vector<RoiSpec>(rois.begin(), rois.end()));
      std::uint64_t total = 0;
      for (const auto& r : merged) total += 3 * static_cast<std::uint64_t>(r.pixel_count());
      return total;
    }
  }
  throw ConfigError("unknown strategy");
}

LatencyBreakdown latency(Strategy strategy, double bytes, const LinkModel& link, const TimingConfig& tc) {
  link.validate();
  if (!(bytes >= 0.0)) throw ConfigError("byte count must be >= 0");
  const auto& c = link.costs(strategy);
  const double proc = strategy == Strategy::kSawec ? sensing_processing(tc).latency_s : 0.0;
  return LatencyBreakdown::from_components(bytes / link.rate_bytes_per_s,
                                           c.io_s_per_mb * bytes / kBytesPerMb, c.inference_s, proc,
                                           c.end_device_s);
}

OccupationReport OccupationReport::from_frames(Strategy s, std::span<const double> frame_bytes) {
  OccupationReport r;
  r.strategy = s;
  r.frames = frame_bytes.size();
  for (double b : frame_bytes) r.total_bytes += b;
  r.bytes_per_frame_mean = r.frames > 0 ? r.total_bytes / static_cast<double>(r.frames) : 0.0;
  return r;
}

double compare(const OccupationReport& a, const OccupationReport& b) {
  if (!(b.total_bytes > 0.0) || !(b.bytes_per_frame_mean > 0.0)) {
    throw ConfigError("reference report carries no bytes");
  }
  return 1.0 - a.bytes_per_frame_mean / b.bytes_per_frame_mean;
}

double variant_byte_factor(FrameVariant v) {
  switch (v) {
    case FrameVariant::kOriginal:
      return 1.0;
    case FrameVariant::kResized:
      return 0.5;
    case FrameVariant::kCompressed:
      return 0.125;
  }
  return 1.0;
}

void write_metrics_csv(std::ostream& out, std::span<const FrameMetricsRow> rows) {
  out << "frame,strategy,bytes,tx_ms,io_ms,inference_ms,proc_ms,end_device_ms,e2e_ms\n";
  char buf[512];
  for (const auto& r : rows) {
    const auto& l = r.latency;
    std::snprintf(buf, sizeof buf, "%zu,%s,%.0f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.frame_index,
                  to_string(r.strategy).c_str(), r.bytes, l.tx_s * 1e3, l.io_s * 1e3,
                  l.inference_s * 1e3, l.sensing_proc_s * 1e3, l.end_device_s * 1e3,
                  l.end_to_end_s * 1e3);
    out << buf;
  }
}

std::vector<FrameMetricsRow> read_metrics_csv(std::istream& in) {
  std::vector<FrameMetricsRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty metrics CSV");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw IoError("malformed metrics CSV row: " + line);
    FrameMetricsRow r;
    r.frame_index = std::stoul(cells[0]);
    r.strategy = strategy_from_string(cells[1]);
    r.bytes = std::stod(cells[2]);
    r.latency = LatencyBreakdown::from_components(std::stod(cells[3]) * 1e-3, std::stod(cells[4]) * 1e-3,
                                                  std::stod(cells[5]) * 1e-3, std::stod(cells[6]) * 1e-3,
                                                  std::stod(cells[7]) * 1e-3);
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json metrics_summary(std::span<const FrameMetricsRow> rows) {
  struct Acc {
    std::vector<double> bytes;
    LatencyBreakdown sum;
  };
  std::map<Strategy, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[r.strategy];
    a.bytes.push_back(r.bytes);
    a.sum.tx_s += r.latency.tx_s;
    a.sum.io_s += r.latency.io_s;
    a.sum.inference_s += r.latency.inference_s;
    a.sum.sensing_proc_s += r.latency.sensing_proc_s;
    a.sum.end_device_s += r.latency.end_device_s;
    a.sum.end_to_end_s += r.latency.end_to_end_s;
  }
  std::map<Strategy, OccupationReport> reports;
  for (const auto& [s, a] : acc) reports[s] = OccupationReport::from_frames(s, a.bytes);
  const auto full = reports.find(Strategy::kFullFrame);

  nlohmann::json out = nlohmann::json::object();
  for (auto& [s, rep] : reports) {
    const auto& a = acc[s];
    const double n = static_cast<double>(rep.frames);
    nlohmann::json js = {{"frames", rep.frames},
                         {"total_bytes", rep.total_bytes},
                         {"bytes_per_frame_mean", rep.bytes_per_frame_mean},
                         {"mean_latency_ms",
                          {{"tx", a.sum.tx_s / n * 1e3},
                           {"io", a.sum.io_s / n * 1e3},
                           {"inference", a.sum.inference_s / n * 1e3},
                           {"proc", a.sum.sensing_proc_s / n * 1e3},
                           {"end_device", a.sum.end_device_s / n * 1e3},
                           {"e2e", a.sum.end_to_end_s / n * 1e3}}}};
    if (full != reports.end() && full->second.total_bytes > 0.0) {
      rep.reduction_vs_full = compare(rep, full->second);
      js["reduction_vs_full"] = rep.reduction_vs_full;
    }
    out[to_string(s)] = js;
  }
  return out;
}

}  // namespace sawec
