#include "sawec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sawec/error.hpp"

namespace sawec {
namespace {

using nlohmann::json;

json cluster_json(const ClusterResult& c) {
  return {{"centroid", {{"aoa_deg", c.centroid_aoa_deg}, {"range_m", c.centroid_range_m}}},
          {"extent_aoa_deg", c.extent_aoa_deg},
          {"size", c.members.size()}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

}  // namespace

std::vector<SampleEstimates> estimate_capture(const CfrCapture& capture, const EstimatorConfig& cfg) {
  const PathEstimator estimator(capture.config, cfg);
  std::vector<SampleEstimates> out;
  out.reserve(capture.samples.size());
  for (const auto& s : capture.samples) out.push_back(estimator.estimate(s));
  return out;
}

std::vector<std::vector<std::size_t>> group_samples_by_frame(const std::vector<double>& timestamps,
                                                             const TimingConfig& timing,
                                                             std::size_t frame_count) {
  timing.validate();
  const double period = 1.0 / timing.cfr_rate_hz;
  std::vector<std::vector<std::size_t>> frames(frame_count);
  for (std::size_t j = 0; j < timestamps.size(); ++j) {
    const double nominal = static_cast<double>(j) * period;
    if (std::abs(timestamps[j] - nominal) > 0.5 * period) {
      throw SynchronizationError("CFR sample " + std::to_string(j) + " at t=" +
                                 std::to_string(timestamps[j]) + " s is off its slot at " +
                                 std::to_string(nominal) + " s");
    }
    const auto f = static_cast<std::size_t>(
        std::floor(static_cast<double>(j) * timing.frame_rate_fps / timing.cfr_rate_hz + 1e-9));
    if (f < frame_count) frames[f].push_back(j);
  }
  return frames;
}

std::vector<FramePerception> detect_frames(const std::vector<SampleEstimates>& estimates,
                                           const std::vector<std::vector<std::size_t>>& frame_samples,
                                           const ClusterConfig& cfg, const BackgroundModel* background) {
  std::vector<FramePerception> out;
  out.reserve(frame_samples.size());
  const std::vector<ClusterResult>* prev = nullptr;
  for (std::size_t f = 0; f < frame_samples.size(); ++f) {
    FramePerception fp;
    fp.frame_index = f;
    fp.sample_indices = frame_samples[f];
    std::vector<SampleEstimates> window;
    window.reserve(fp.sample_indices.size());
    for (auto j : fp.sample_indices) window.push_back(estimates.at(j));
    fp.points = frame_estimates(window, background);
    fp.clustering = dbscan(fp.points, cfg);
    const std::vector<ClusterResult> none;
    fp.events = detect_motion(prev ? *prev : none, fp.clustering.clusters, cfg, f);
    out.push_back(std::move(fp));
    prev = &out.back().clustering.clusters;
  }
  return out;
}

double corrected_range(const Scenario& scn, double aoa_nic_deg, double path_length_m) {
  double oa = path_length_m;
  switch (scn.range_correction) {
    case RangeCorrection::kNone:
      break;
    case RangeCorrection::kHalfDirect:
      oa = path_length_m - 0.5 * scn.direct_path_length_m();
      break;
    case RangeCorrection::kBistatic: {
      // Point on the AoA ray whose tx->point->rx length equals the path length.
      const Point2 rx = scn.nic_position();
      const double tx = scn.transmitter.x - rx.x;
      const double ty = scn.transmitter.y - rx.y;
      const double th = deg_to_rad(aoa_nic_deg);
      const double along = std::sin(th) * tx + std::cos(th) * ty;
      const double denom = 2.0 * (path_length_m - along);
      oa = denom > 0.0 ? (path_length_m * path_length_m - (tx * tx + ty * ty)) / denom : 0.0;
      break;
    }
  }
  return oa > 0.0 ? oa : path_length_m;
}

std::vector<FrameRois> extract_rois(const Scenario& scn, const std::vector<FramePerception>& frames,
                                    double alpha) {
  RoiConfig cfg = scn.roi;
  cfg.alpha = alpha;
  cfg.validate();
  std::vector<FrameRois> out;
  out.reserve(frames.size());
  for (const auto& fp : frames) {
    FrameRois fr;
    fr.frame_index = fp.frame_index;
    for (const auto& ev : fp.events) {
      const auto& c = ev.cluster;
      try {
        fr.rois.push_back(roi_from_target(c.centroid_aoa_deg,
                                          corrected_range(scn, c.centroid_aoa_deg, c.centroid_range_m),
                                          c.extent_aoa_deg, scn.geometry, cfg, fp.frame_index));
      } catch (const DegenerateGeometryError&) {
        ++fr.degenerate_skipped;
      }
    }
    fr.rois = merge_rois(std::move(fr.rois));
    out.push_back(std::move(fr));
  }
  return out;
}

bool rect_inside_single_tile(const PixelRect& box, int frame_width_px, int tile_px) {
  if (box.width_px <= 0 || box.height_px <= 0) return false;
  int left = box.left_px % frame_width_px;
  if (left < 0) left += frame_width_px;
  const int right = left + box.width_px - 1;
  if (right >= frame_width_px) return false;  // straddles the seam
  const int bottom = box.top_px + box.height_px - 1;
  return left / tile_px == right / tile_px && box.top_px / tile_px == bottom / tile_px;
}

Containment score_containment(const std::vector<FrameTruth>& truth, const std::vector<FrameRois>& rois) {
  Containment c;
  for (std::size_t f = 0; f < truth.size() && f < rois.size(); ++f) {
    for (const auto& s : truth[f].subjects) {
      ++c.pairs;
      for (const auto& r : rois[f].rois) {
        if (rect_inside_roi(s.box, r)) {
          ++c.sawec_hits;
          break;
        }
      }
    }
  }
  return c;
}

PipelineResult finish_pipeline(const Scenario& scn, const std::vector<FrameTruth>& truth,
                               std::vector<SampleEstimates> estimates,
                               std::vector<SampleEstimates> calibration_estimates,
                               const std::vector<double>& timestamps, const PipelineOptions& opts) {
  scn.validate();
  PipelineResult res;
  res.estimates = std::move(estimates);
  res.calibration_estimates = std::move(calibration_estimates);

  const auto frame_samples = group_samples_by_frame(timestamps, scn.timing, truth.size());
  std::optional<BackgroundModel> background;
  if (scn.background_subtraction) {
    background = BackgroundModel::from_estimates(res.calibration_estimates, scn.cluster);
  }
  res.frames = detect_frames(res.estimates, frame_samples, scn.cluster, background ? &*background : nullptr);
  res.rois = extract_rois(scn, res.frames, scn.roi.alpha);

  const FrameDims dims{scn.roi.frame_width_px, scn.roi.frame_height_px};
  if (opts.crop_dir) std::filesystem::create_directories(*opts.crop_dir);
  std::size_t degenerate = 0;
  Frame canvas;
  for (std::size_t f = 0; f < res.rois.size(); ++f) {
    const auto& fr = res.rois[f];
    degenerate += fr.degenerate_skipped;
    for (const auto strategy : opts.strategies) {
      double bytes = static_cast<double>(occupation(strategy, dims, fr.rois));
      if (strategy == Strategy::kSawec && opts.crop_frames && !fr.rois.empty()) {
        // Same pixels as render_frame, painted onto one reused canvas.
        if (!canvas.valid()) canvas = Frame::filled(dims.width_px, dims.height_px, kBackgroundColor);
        canvas.frame_index = truth[f].frame_index;
        canvas.timestamp_s = truth[f].timestamp_s;
        for (const auto& s : truth[f].subjects) canvas.fill_rect(s.box, kSubjectColor);
        double cropped = 0.0;
        for (std::size_t i = 0; i < fr.rois.size(); ++i) {
          const Frame c = crop(canvas, fr.rois[i]);
          cropped += static_cast<double>(c.pixels.size());
          if (opts.crop_dir) {
            write_ppm_file(*opts.crop_dir /
                               ("frame" + std::to_string(f) + "_roi" + std::to_string(i) + ".ppm"),
                           c);
          }
        }
        for (const auto& s : truth[f].subjects) canvas.fill_rect(s.box, kBackgroundColor);
        if (cropped != bytes) throw ConsistencyError("cropped byte count disagrees with accounting");
      }
      res.metrics.push_back({f, strategy, bytes, latency(strategy, bytes, scn.link, scn.timing)});
    }
  }

  res.containment = score_containment(truth, res.rois);
  for (std::size_t f = 0; f < truth.size() && f < res.rois.size(); ++f) {
    for (const auto& s : truth[f].subjects) {
      if (rect_inside_single_tile(s.box, scn.roi.frame_width_px)) ++res.containment.tile_hits;
    }
  }

  res.summary = {{"strategies", metrics_summary(res.metrics)},
                 {"frames", truth.size()},
                 {"cfr_samples", res.estimates.size()},
                 {"motion_events", 0},
                 {"rois", 0},
                 {"degenerate_rois_skipped", degenerate},
                 {"alpha", scn.roi.alpha}};
  std::size_t events = 0;
  std::size_t rois = 0;
  for (const auto& fp : res.frames) events += fp.events.size();
  for (const auto& fr : res.rois) rois += fr.rois.size();
  res.summary["motion_events"] = events;
  res.summary["rois"] = rois;
  const auto sawec = res.containment.sawec();
  const auto tiles = res.containment.tiles();
  res.summary["containment"] = {{"pairs", res.containment.pairs},
                                {"sawec", sawec ? json(*sawec) : json("N/A")},
                                {"tiles_640", tiles ? json(*tiles) : json("N/A")}};
  return res;
}

void check_capture_matches(const CfrCapture& capture, const Scenario& scn) {
  const auto& a = capture.config;
  const auto& b = scn.channel;
  if (a.num_subcarriers != b.num_subcarriers || a.num_rx_antennas != b.num_rx_antennas ||
      a.carrier_freq_hz != b.carrier_freq_hz || a.subcarrier_spacing_hz != b.subcarrier_spacing_hz ||
      std::abs(a.spacing_m() - b.spacing_m()) > 1e-15) {
    throw ConfigError("capture channel config does not match the scenario");
  }
}

PipelineResult run_pipeline(const Scenario& scn, const GeneratedScenario& inputs, const PipelineOptions& opts) {
  scn.validate();
  check_capture_matches(inputs.capture, scn);
  std::vector<double> timestamps;
  timestamps.reserve(inputs.capture.samples.size());
  for (const auto& s : inputs.capture.samples) timestamps.push_back(s.timestamp_s());
  auto est = estimate_capture(inputs.capture, scn.estimator);
  std::vector<SampleEstimates> cal;
  if (scn.background_subtraction) cal = estimate_capture(inputs.calibration, scn.estimator);
  return finish_pipeline(scn, inputs.truth, std::move(est), std::move(cal), timestamps, opts);
}

json estimates_record(std::size_t sample_index, double timestamp_s, const SampleEstimates& paths) {
  json arr = json::array();
  for (const auto& p : paths) {
    arr.push_back({{"aoa_deg", p.aoa_deg}, {"range_m", p.range_m}, {"power", p.power}});
  }
  return {{"sample_index", sample_index}, {"timestamp_s", timestamp_s}, {"paths", arr}};
}

void write_estimates_jsonl(std::ostream& out, const CfrCapture& capture,
                           const std::vector<SampleEstimates>& estimates) {
  for (std::size_t j = 0; j < estimates.size(); ++j) {
    out << estimates_record(j, capture.samples.at(j).timestamp_s(), estimates[j]).dump() << '\n';
  }
}

EstimatesFile read_estimates_jsonl(std::istream& in) {
  EstimatesFile f;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw IoError(std::string("malformed estimates line: ") + ex.what());
    }
    f.timestamps.push_back(j.at("timestamp_s").get<double>());
    SampleEstimates paths;
    for (const auto& p : j.at("paths")) {
      const double power = p.at("power").get<double>();
      paths.push_back({p.at("aoa_deg").get<double>(), p.at("range_m").get<double>(),
                       cplx(std::sqrt(power), 0.0), power});
    }
    f.estimates.push_back(std::move(paths));
  }
  return f;
}

void write_cluster_log(std::ostream& out, const std::vector<FramePerception>& frames) {
  for (const auto& fp : frames) {
    json clusters = json::array();
    for (const auto& c : fp.clustering.clusters) clusters.push_back(cluster_json(c));
    json events = json::array();
    for (const auto& ev : fp.events) {
      json je = cluster_json(ev.cluster);
      je["new"] = ev.is_new();
      je["displacement"] = ev.displacement ? json(*ev.displacement) : json(nullptr);
      events.push_back(je);
    }
    out << json{{"frame_index", fp.frame_index},
                {"points", fp.points.size()},
                {"noise", fp.clustering.noise.size()},
                {"clusters", clusters},
                {"events", events}}
               .dump()
        << '\n';
  }
}

json rois_to_json(const std::vector<FrameRois>& rois) {
  json frames = json::array();
  for (const auto& fr : rois) {
    json list = json::array();
    for (const auto& r : fr.rois) list.push_back(roi_to_json(r));
    frames.push_back({{"frame_index", fr.frame_index}, {"rois", list}});
  }
  return {{"frames", frames}};
}

void write_manifest(const std::filesystem::path& dir, const Scenario& scn, const std::string& stage) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& f : files) {
    list.push_back({{"name", f.filename().string()}, {"bytes", std::filesystem::file_size(f)}});
  }
  write_text(dir / "manifest.json",
             json{{"stage", stage}, {"seed", scn.seed}, {"noise_std", scn.noise_std}, {"alpha", scn.roi.alpha},
                  {"files", list}}
                     .dump(2) +
                 "\n");
}

void write_run_directory(const std::filesystem::path& dir, const Scenario& scn,
                         const GeneratedScenario& inputs, const PipelineResult& result) {
  std::filesystem::create_directories(dir);
  write_capture_file(dir / "capture.cfr", inputs.capture);
  write_capture_file(dir / "calibration.cfr", inputs.calibration);
  write_text(dir / "scenario.json", scenario_to_json(scn).dump(2) + "\n");
  write_text(dir / "ground_truth.json", ground_truth_to_json(inputs.truth).dump(2) + "\n");
  {
    std::ostringstream est;
    write_estimates_jsonl(est, inputs.capture, result.estimates);
    write_text(dir / "estimates.jsonl", est.str());
    std::ostringstream cal;
    write_estimates_jsonl(cal, inputs.calibration, result.calibration_estimates);
    write_text(dir / "calibration_estimates.jsonl", cal.str());
  }
  {
    std::ostringstream log;
    write_cluster_log(log, result.frames);
    write_text(dir / "clusters.jsonl", log.str());
  }
  write_text(dir / "rois.json", rois_to_json(result.rois).dump(2) + "\n");
  {
    std::ostringstream csv;
    write_metrics_csv(csv, result.metrics);
    write_text(dir / "metrics.csv", csv.str());
  }
  write_text(dir / "summary.json", result.summary.dump(2) + "\n");
  write_manifest(dir, scn, "run");
}

}  // namespace sawec
