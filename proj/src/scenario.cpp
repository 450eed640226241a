#include "sawec/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "sawec/error.hpp"

namespace sawec {
namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Uniform in [0, 1) from the top 53 bits, independent of the standard library.
double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

constexpr std::uint64_t kNoiseStream = 0x6E6F697365ull;
constexpr std::uint64_t kBodyStream = 0x626F6479ull;
constexpr std::uint64_t kCalibrationStream = 0x63616C6962ull;

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double aoa_from(Point2 origin, Point2 target) {
  return rad_to_deg(std::atan2(target.x - origin.x, target.y - origin.y));
}

json point_to_json(Point2 p) { return json::array({p.x, p.y}); }
Point2 point_from_json(const json& j) {
  if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>()};
  return {j.at("x").get<double>(), j.at("y").get<double>()};
}

json grid_to_json(const GridAxis& g) { return {{"min", g.min}, {"max", g.max}, {"step", g.step}}; }
GridAxis grid_from_json(const json& j, GridAxis d) {
  return {j.value("min", d.min), j.value("max", d.max), j.value("step", d.step)};
}

json costs_to_json(const StrategyCosts& c) {
  return {{"io_s_per_mb", c.io_s_per_mb}, {"inference_s", c.inference_s}, {"end_device_s", c.end_device_s}};
}
StrategyCosts costs_from_json(const json& j, StrategyCosts d) {
  return {j.value("io_s_per_mb", d.io_s_per_mb), j.value("inference_s", d.inference_s),
          j.value("end_device_s", d.end_device_s)};
}

std::string correction_name(RangeCorrection c) {
  switch (c) {
    case RangeCorrection::kNone:
      return "none";
    case RangeCorrection::kHalfDirect:
      return "half_direct";
    case RangeCorrection::kBistatic:
      return "bistatic";
  }
  return "half_direct";
}

RangeCorrection correction_from_name(const std::string& s) {
  if (s == "none") return RangeCorrection::kNone;
  if (s == "half_direct") return RangeCorrection::kHalfDirect;
  if (s == "bistatic") return RangeCorrection::kBistatic;
  throw ConfigError("unknown range_correction '" + s + "'");
}

const json& section(const json& j, const char* key) {
  static const json empty = json::object();
  const auto it = j.find(key);
  return it == j.end() ? empty : *it;
}

}  // namespace

std::size_t Scenario::cfr_sample_count() const {
  return static_cast<std::size_t>(std::floor(duration_s * timing.cfr_rate_hz + 1e-9));
}

std::size_t Scenario::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration_s * timing.frame_rate_fps + 1e-9));
}

double Scenario::direct_path_length_m() const { return distance(transmitter, nic_position()); }

void Scenario::validate() const {
  geometry.validate();
  channel.validate();
  timing.validate();
  cluster.validate();
  roi.validate();
  estimator.validate();
  link.validate();
  if (!(duration_s > 0.0)) throw ConfigError("duration_s must be positive");
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(transmitter.y > 0.0)) throw ConfigError("transmitter must lie in front of the NIC (y > 0)");
  for (const auto& s : subjects) {
    if (s.waypoints.size() < 2) throw ConfigError("every subject needs at least two waypoints");
    if (!(s.speed_mps >= 0.0)) throw ConfigError("subject speed must be >= 0");
    if (!(s.body_width_m >= 0.0)) throw ConfigError("subject body width must be >= 0");
    if (s.box_width_px < 0 || s.box_height_px < 1) throw ConfigError("subject box must be non-empty");
    if (!(s.visual_width_m >= 0.0)) throw ConfigError("subject visual width must be >= 0");
    if (s.box_width_px == 0 && !(s.body_width_m > 0.0) && !(s.visual_width_m > 0.0)) {
      throw ConfigError("an automatic box width needs a positive body or visual width");
    }
    for (const auto& w : s.waypoints) {
      if (!(w.y > 0.0)) throw ConfigError("subject waypoints must lie in front of the NIC (y > 0)");
    }
  }
  if (roi.frame_width_px < 1) throw ConfigError("frame width must be positive");
}

json scenario_to_json(const Scenario& s) {
  json subjects = json::array();
  for (const auto& sub : s.subjects) {
    json wps = json::array();
    for (const auto& w : sub.waypoints) wps.push_back(point_to_json(w));
    subjects.push_back({{"waypoints", wps},
                        {"speed_mps", sub.speed_mps},
                        {"reflectivity", sub.reflectivity},
                        {"body_width_m", sub.body_width_m},
                        {"visual_width_m", sub.visual_width_m},
                        {"box_px", json::array({sub.box_width_px, sub.box_height_px})}});
  }
  json reflectors = json::array();
  for (const auto& r : s.static_reflectors) {
    reflectors.push_back({{"path_length_m", r.path_length_m},
                          {"aoa_deg", r.aoa_deg},
                          {"amplitude", json::array({r.amplitude.real(), r.amplitude.imag()})}});
  }
  return {
      {"geometry",
       {{"nic_x_m", s.geometry.nic_x_m},
        {"camera_x_m", s.geometry.camera_x_m},
        {"tx_panorama_deg", s.geometry.tx_panorama_deg}}},
      {"transmitter", point_to_json(s.transmitter)},
      {"direct_path_gain", s.direct_path_gain},
      {"channel", channel_config_to_json(s.channel)},
      {"timing",
       {{"cfr_rate_hz", s.timing.cfr_rate_hz},
        {"frame_rate_fps", s.timing.frame_rate_fps},
        {"per_cfr_processing_s", s.timing.per_cfr_processing_s}}},
      {"cluster",
       {{"eps", s.cluster.eps},
        {"min_pts", s.cluster.min_pts},
        {"aoa_scale_deg", s.cluster.aoa_scale_deg},
        {"range_scale_m", s.cluster.range_scale_m},
        {"motion_threshold", s.cluster.motion_threshold}}},
      {"roi",
       {{"alpha", s.roi.alpha},
        {"frame_width_px", s.roi.frame_width_px},
        {"frame_height_px", s.roi.frame_height_px},
        {"min_side_px", s.roi.min_side_px},
        {"center_row_px", s.roi.center_row_px}}},
      {"estimator",
       {{"aoa_grid_deg", grid_to_json(s.estimator.aoa_grid_deg)},
        {"range_grid_m", grid_to_json(s.estimator.range_grid_m)},
        {"max_paths", s.estimator.max_paths},
        {"residual_power_stop_ratio", s.estimator.residual_power_stop_ratio},
        {"refinement_rounds", s.estimator.refinement_rounds},
        {"refinement_convergence_eps", s.estimator.refinement_convergence_eps},
        {"refinement_window", s.estimator.refinement_window}}},
      {"link",
       {{"rate_bytes_per_s", s.link.rate_bytes_per_s},
        {"sawec", costs_to_json(s.link.sawec)},
        {"full_frame", costs_to_json(s.link.full_frame)},
        {"tiles_640", costs_to_json(s.link.tiles_640)}}},
      {"static_reflectors", reflectors},
      {"subjects", subjects},
      {"duration_s", s.duration_s},
      {"seed", s.seed},
      {"noise_std", s.noise_std},
      {"background_subtraction", s.background_subtraction},
      {"calibration_samples", s.calibration_samples},
      {"range_correction", correction_name(s.range_correction)}};
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    const auto& g = section(j, "geometry");
    s.geometry = GeometryConfig::from_positions(g.value("nic_x_m", 0.0), g.value("camera_x_m", 0.0),
                                                g.value("tx_panorama_deg", 0.0));
    if (g.contains("nic_camera_distance_m")) {
      s.geometry.nic_camera_distance_m = g.at("nic_camera_distance_m").get<double>();
    }
    if (j.contains("transmitter")) s.transmitter = point_from_json(j.at("transmitter"));
    s.direct_path_gain = j.value("direct_path_gain", s.direct_path_gain);
    if (j.contains("channel")) s.channel = channel_config_from_json(j.at("channel"));

    const auto& t = section(j, "timing");
    s.timing.cfr_rate_hz = t.value("cfr_rate_hz", s.timing.cfr_rate_hz);
    s.timing.frame_rate_fps = t.value("frame_rate_fps", s.timing.frame_rate_fps);
    s.timing.per_cfr_processing_s = t.value("per_cfr_processing_s", s.timing.per_cfr_processing_s);

    const auto& c = section(j, "cluster");
    s.cluster.eps = c.value("eps", s.cluster.eps);
    s.cluster.min_pts = c.value("min_pts", s.cluster.min_pts);
    s.cluster.aoa_scale_deg = c.value("aoa_scale_deg", s.cluster.aoa_scale_deg);
    s.cluster.range_scale_m = c.value("range_scale_m", s.cluster.range_scale_m);
    s.cluster.motion_threshold = c.value("motion_threshold", s.cluster.motion_threshold);

    const auto& r = section(j, "roi");
    s.roi.alpha = r.value("alpha", s.roi.alpha);
    s.roi.frame_width_px = r.value("frame_width_px", s.roi.frame_width_px);
    s.roi.frame_height_px = r.value("frame_height_px", s.roi.frame_height_px);
    s.roi.min_side_px = r.value("min_side_px", s.roi.min_side_px);
    s.roi.center_row_px = r.value("center_row_px", s.roi.center_row_px);

    const auto& e = section(j, "estimator");
    s.estimator.aoa_grid_deg = grid_from_json(section(e, "aoa_grid_deg"), s.estimator.aoa_grid_deg);
    s.estimator.range_grid_m = grid_from_json(section(e, "range_grid_m"), s.estimator.range_grid_m);
    s.estimator.max_paths = e.value("max_paths", s.estimator.max_paths);
    s.estimator.residual_power_stop_ratio =
        e.value("residual_power_stop_ratio", s.estimator.residual_power_stop_ratio);
    s.estimator.refinement_rounds = e.value("refinement_rounds", s.estimator.refinement_rounds);
    s.estimator.refinement_convergence_eps =
        e.value("refinement_convergence_eps", s.estimator.refinement_convergence_eps);
    s.estimator.refinement_window = e.value("refinement_window", s.estimator.refinement_window);

    const auto& l = section(j, "link");
    s.link.rate_bytes_per_s = l.value("rate_bytes_per_s", s.link.rate_bytes_per_s);
    s.link.sawec = costs_from_json(section(l, "sawec"), s.link.sawec);
    s.link.full_frame = costs_from_json(section(l, "full_frame"), s.link.full_frame);
    s.link.tiles_640 = costs_from_json(section(l, "tiles_640"), s.link.tiles_640);

    for (const auto& jr : section(j, "static_reflectors")) {
      MultipathComponent m;
      m.path_length_m = jr.at("path_length_m").get<double>();
      m.aoa_deg = jr.at("aoa_deg").get<double>();
      const auto& a = jr.at("amplitude");
      m.amplitude = a.is_array() ? cplx(a.at(0).get<double>(), a.at(1).get<double>())
                                 : cplx(a.get<double>(), 0.0);
      s.static_reflectors.push_back(m);
    }
    for (const auto& js : section(j, "subjects")) {
      Subject sub;
      for (const auto& w : js.at("waypoints")) sub.waypoints.push_back(point_from_json(w));
      sub.speed_mps = js.value("speed_mps", sub.speed_mps);
      sub.reflectivity = js.value("reflectivity", sub.reflectivity);
      sub.body_width_m = js.value("body_width_m", sub.body_width_m);
      sub.visual_width_m = js.value("visual_width_m", sub.visual_width_m);
      if (js.contains("box_px")) {
        sub.box_width_px = js.at("box_px").at(0).get<int>();
        sub.box_height_px = js.at("box_px").at(1).get<int>();
      }
      s.subjects.push_back(std::move(sub));
    }
    s.duration_s = j.value("duration_s", s.duration_s);
    s.seed = j.value("seed", s.seed);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.background_subtraction = j.value("background_subtraction", s.background_subtraction);
    s.calibration_samples = j.value("calibration_samples", s.calibration_samples);
    if (j.contains("range_correction")) {
      s.range_correction = correction_from_name(j.at("range_correction").get<std::string>());
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed scenario: ") + ex.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw ConfigError("scenario is not valid JSON: " + std::string(ex.what()));
  }
  return scenario_from_json(j);
}

Point2 subject_position(const Subject& s, double t) {
  std::vector<double> seg;
  double total = 0.0;
  for (std::size_t i = 1; i < s.waypoints.size(); ++i) {
    seg.push_back(distance(s.waypoints[i - 1], s.waypoints[i]));
    total += seg.back();
  }
  if (!(total > 0.0)) return s.waypoints.front();
  // Ping-pong along the polyline.
  double d = std::fmod(s.speed_mps * t, 2.0 * total);
  if (d > total) d = 2.0 * total - d;
  for (std::size_t i = 0; i < seg.size(); ++i) {
    if (d <= seg[i] || i + 1 == seg.size()) {
      const double f = seg[i] > 0.0 ? std::min(1.0, d / seg[i]) : 0.0;
      const auto& a = s.waypoints[i];
      const auto& b = s.waypoints[i + 1];
      return {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y)};
    }
    d -= seg[i];
  }
  return s.waypoints.back();
}

std::vector<MultipathComponent> static_paths(const Scenario& scn) {
  std::vector<MultipathComponent> out;
  const double direct = scn.direct_path_length_m();
  if (scn.direct_path_gain != 0.0) {
    out.push_back({direct, aoa_from(scn.nic_position(), scn.transmitter),
                   cplx(scn.direct_path_gain / direct, 0.0)});
  }
  out.insert(out.end(), scn.static_reflectors.begin(), scn.static_reflectors.end());
  return out;
}

std::vector<MultipathComponent> paths_at_sample(const Scenario& scn, std::size_t sample_index) {
  auto paths = static_paths(scn);
  const double t = static_cast<double>(sample_index) / scn.timing.cfr_rate_hz;
  const Point2 rx = scn.nic_position();
  for (std::size_t i = 0; i < scn.subjects.size(); ++i) {
    const auto& sub = scn.subjects[i];
    Point2 p = subject_position(sub, t);
    if (sub.body_width_m > 0.0) {
      const double u = unit_uniform(stream_seed(scn.seed, kBodyStream + i, sample_index)) - 0.5;
      const double los = distance(p, rx);
      // Unit vector perpendicular to the line of sight, pointing to the NIC's right.
      const double px = (p.y - rx.y) / los;
      const double py = -(p.x - rx.x) / los;
      p = {p.x + u * sub.body_width_m * px, p.y + u * sub.body_width_m * py};
    }
    const double d_tx = distance(scn.transmitter, p);
    const double d_rx = distance(p, rx);
    paths.push_back({d_tx + d_rx, aoa_from(rx, p), cplx(sub.reflectivity / (d_tx * d_rx), 0.0)});
  }
  return paths;
}

FrameTruth frame_truth(const Scenario& scn, std::size_t frame_index) {
  FrameTruth ft;
  ft.frame_index = frame_index;
  ft.timestamp_s = static_cast<double>(frame_index) / scn.timing.frame_rate_fps;
  const Point2 rx = scn.nic_position();
  const Point2 cam = scn.camera_position();
  const int w = scn.roi.frame_width_px;
  const int h = scn.roi.frame_height_px;
  for (const auto& sub : scn.subjects) {
    SubjectTruth st;
    st.position = subject_position(sub, ft.timestamp_s);
    st.aoa_nic_deg = aoa_from(rx, st.position);
    st.range_nic_m = distance(rx, st.position);
    st.path_length_m = distance(scn.transmitter, st.position) + st.range_nic_m;
    st.theta_deg = wrap_degrees_360(aoa_from(cam, st.position) + scn.geometry.tx_panorama_deg);
    const long long col = std::llround(st.theta_deg / 360.0 * w) % w;
    int box_w = sub.box_width_px;
    if (box_w == 0) {
      // Angular width of the body as seen from the camera.
      const double width = sub.visual_width_m > 0.0 ? sub.visual_width_m : sub.body_width_m;
      const double half = std::atan2(0.5 * width, distance(cam, st.position));
      box_w = std::max(1, static_cast<int>(std::lround(2.0 * rad_to_deg(half) / 360.0 * w)));
    }
    const int top = scn.roi.resolved_center_row() - sub.box_height_px / 2;
    const int clipped_top = std::max(0, top);
    const int clipped_bottom = std::min(h, top + sub.box_height_px);
    st.box = {static_cast<int>(col) - box_w / 2, clipped_top, box_w,
              std::max(0, clipped_bottom - clipped_top)};
    ft.subjects.push_back(st);
  }
  return ft;
}

GeneratedScenario generate(const Scenario& scn) {
  scn.validate();
  GeneratedScenario out;
  out.capture.config = scn.channel;
  out.calibration.config = scn.channel;
  const std::size_t n = scn.cfr_sample_count();
  out.capture.samples.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) / scn.timing.cfr_rate_hz;
    const auto paths = paths_at_sample(scn, j);
    out.capture.samples.push_back(
        synthesize_cfr(paths, scn.channel, t, scn.noise_std, stream_seed(scn.seed, kNoiseStream, j)));
  }
  const std::size_t n_cal = scn.calibration_samples > 0
                                ? scn.calibration_samples
                                : static_cast<std::size_t>(
                                      std::ceil(scn.timing.cfr_rate_hz / scn.timing.frame_rate_fps - 1e-9));
  const auto empty_scene = static_paths(scn);
  for (std::size_t j = 0; j < n_cal; ++j) {
    const double t = static_cast<double>(j) / scn.timing.cfr_rate_hz;
    out.calibration.samples.push_back(synthesize_cfr(empty_scene, scn.channel, t, scn.noise_std,
                                                     stream_seed(scn.seed, kCalibrationStream, j)));
  }
  const std::size_t frames = scn.frame_count();
  out.truth.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) out.truth.push_back(frame_truth(scn, i));
  return out;
}

Frame render_frame(const Scenario& scn, const FrameTruth& truth) {
  Frame f = Frame::filled(scn.roi.frame_width_px, scn.roi.frame_height_px, kBackgroundColor,
                          truth.frame_index, truth.timestamp_s);
  for (const auto& s : truth.subjects) f.fill_rect(s.box, kSubjectColor);
  return f;
}

json ground_truth_to_json(const std::vector<FrameTruth>& truth) {
  json frames = json::array();
  for (const auto& ft : truth) {
    json subs = json::array();
    for (const auto& s : ft.subjects) {
      subs.push_back({{"x_m", s.position.x},
                      {"y_m", s.position.y},
                      {"aoa_nic_deg", s.aoa_nic_deg},
                      {"range_nic_m", s.range_nic_m},
                      {"path_length_m", s.path_length_m},
                      {"theta_deg", s.theta_deg},
                      {"box", {{"left_px", s.box.left_px},
                               {"top_px", s.box.top_px},
                               {"width_px", s.box.width_px},
                               {"height_px", s.box.height_px}}}});
    }
    frames.push_back({{"frame_index", ft.frame_index}, {"timestamp_s", ft.timestamp_s}, {"subjects", subs}});
  }
  return {{"frames", frames}};
}

std::vector<FrameTruth> ground_truth_from_json(const json& j) {
  std::vector<FrameTruth> out;
  for (const auto& jf : j.at("frames")) {
    FrameTruth ft;
    ft.frame_index = jf.at("frame_index").get<std::size_t>();
    ft.timestamp_s = jf.at("timestamp_s").get<double>();
    for (const auto& js : jf.at("subjects")) {
      SubjectTruth s;
      s.position = {js.at("x_m").get<double>(), js.at("y_m").get<double>()};
      s.aoa_nic_deg = js.at("aoa_nic_deg").get<double>();
      s.range_nic_m = js.at("range_nic_m").get<double>();
      s.path_length_m = js.at("path_length_m").get<double>();
      s.theta_deg = js.at("theta_deg").get<double>();
      const auto& b = js.at("box");
      s.box = {b.at("left_px").get<int>(), b.at("top_px").get<int>(), b.at("width_px").get<int>(),
               b.at("height_px").get<int>()};
      ft.subjects.push_back(s);
    }
    out.push_back(std::move(ft));
  }
  return out;
}

}  // namespace sawec
