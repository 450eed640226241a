#include "sawec/roi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "sawec/error.hpp"

namespace sawec {
namespace {

int mod_floor(long long v, int m) {
  long long r = v % m;
  if (r < 0) r += m;
  return static_cast<int>(r);
}

int interval_overlap(long long a0, long long a1, long long b0, long long b1) {
  return static_cast<int>(std::max(0LL, std::min(a1, b1) - std::max(a0, b0)));
}

void clip_vertical(RoiSpec& roi) {
  const int top = std::max(0, roi.top_px);
  const int bottom = std::min(roi.frame_height_px, roi.top_px + roi.side_px);
  roi.clipped_top_px = top;
  roi.clipped_height_px = std::max(0, bottom - top);
}

// Column offset of b relative to a (in (-W, W)) that maximises horizontal overlap.
struct Alignment {
  long long shift = 0;
  int overlap = 0;
};

Alignment align_columns(const RoiSpec& a, const RoiSpec& b) {
  const int w = a.frame_width_px;
  const long long d = mod_floor(static_cast<long long>(b.left_px) - a.left_px, w);
  Alignment best{d, interval_overlap(0, a.side_px, d, d + b.side_px)};
  const Alignment wrapped{d - w, interval_overlap(0, a.side_px, d - w, d - w + b.side_px)};
  if (wrapped.overlap > best.overlap) best = wrapped;
  return best;
}

}  // namespace

void RoiConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("ROI alpha must be positive");
  if (frame_width_px < 2 || frame_height_px < 2) throw ConfigError("frame must be at least 2x2");
  if (min_side_px < 1 || min_side_px > frame_width_px) {
    throw ConfigError("min_side_px must lie in [1, frame_width_px]");
  }
  if (center_row_px >= frame_height_px) throw ConfigError("center_row_px outside the frame");
}

Frame Frame::filled(int width, int height, Rgb color, std::size_t index, double t) {
  if (width <= 0 || height <= 0) throw ConfigError("frame dimensions must be positive");
  Frame f;
  f.frame_index = index;
  f.timestamp_s = t;
  f.width_px = width;
  f.height_px = height;
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  f.pixels.resize(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    f.pixels[3 * i] = color[0];
    f.pixels[3 * i + 1] = color[1];
    f.pixels[3 * i + 2] = color[2];
  }
  return f;
}

Frame::Rgb Frame::pixel(int row, int col) const {
  const std::size_t i = 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_px) +
                             static_cast<std::size_t>(col));
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Frame::set_pixel(int row, int col, Rgb c) {
  const std::size_t i = 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_px) +
                             static_cast<std::size_t>(col));
  pixels[i] = c[0];
  pixels[i + 1] = c[1];
  pixels[i + 2] = c[2];
}

void Frame::fill_rect(const PixelRect& rect, Rgb c) {
  const int top = std::max(0, rect.top_px);
  const int bottom = std::min(height_px, rect.top_px + rect.height_px);
  const int width = std::min(rect.width_px, width_px);
  for (int r = top; r < bottom; ++r) {
    for (int dc = 0; dc < width; ++dc) set_pixel(r, mod_floor(rect.left_px + dc, width_px), c);
  }
}

int roi_side_px(double extent_deg, double alpha, int frame_width_px, int min_side_px) {
  const double raw = std::round(extent_deg * alpha * static_cast<double>(frame_width_px) / 360.0);
  if (raw <= static_cast<double>(min_side_px)) return min_side_px;
  if (raw >= static_cast<double>(frame_width_px)) return frame_width_px;
  return static_cast<int>(raw);
}

RoiSpec roi_at_theta(double theta_deg, int side_px, const RoiConfig& cfg, std::size_t frame_index) {
  cfg.validate();
  RoiSpec roi;
  roi.frame_index = frame_index;
  roi.frame_width_px = cfg.frame_width_px;
  roi.frame_height_px = cfg.frame_height_px;
  roi.center_theta_deg = wrap_degrees_360(theta_deg);
  roi.center_col_px = mod_floor(
      std::llround(roi.center_theta_deg / 360.0 * static_cast<double>(cfg.frame_width_px)),
      cfg.frame_width_px);
  roi.center_row_px = cfg.resolved_center_row();
  roi.side_px = std::clamp(side_px, 1, cfg.frame_width_px);
  roi.left_px = roi.center_col_px - roi.side_px / 2;
  roi.top_px = roi.center_row_px - roi.side_px / 2;
  clip_vertical(roi);
  return roi;
}

RoiSpec roi_from_target(double aoa_nic_deg, double range_nic_m, double extent_deg,
                        const GeometryConfig& geom, const RoiConfig& cfg, std::size_t frame_index) {
  if (!(extent_deg >= 0.0)) throw ConfigError("cluster extent must be >= 0");
  const auto cam = project_to_camera(aoa_nic_deg, range_nic_m, geom);
  const double theta = to_panorama_angle(cam.aoa_deg, geom);
  const int side = roi_side_px(extent_deg, cfg.alpha, cfg.frame_width_px, cfg.min_side_px);
  return roi_at_theta(theta, side, cfg, frame_index);
}

RoiSpec roi_from_cluster(const ClusterResult& cluster, const GeometryConfig& geom, const RoiConfig& cfg,
                         std::size_t frame_index) {
  return roi_from_target(cluster.centroid_aoa_deg, cluster.centroid_range_m, cluster.extent_aoa_deg,
                         geom, cfg, frame_index);
}

std::vector<RoiSpec> merge_rois(std::vector<RoiSpec> rois) {
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < rois.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < rois.size() && !merged; ++j) {
        const RoiSpec& a = rois[i];
        const RoiSpec& b = rois[j];
        if (a.frame_width_px != b.frame_width_px || a.frame_height_px != b.frame_height_px) {
          throw ConsistencyError("cannot merge ROIs from frames of different size");
        }
        const int half_min = (std::min(a.side_px, b.side_px) + 1) / 2;
        const auto cols = align_columns(a, b);
        const int row_overlap =
            interval_overlap(a.top_px, a.top_px + a.side_px, b.top_px, b.top_px + b.side_px);
        if (cols.overlap < half_min || row_overlap < half_min) continue;

        const long long x0 = std::min<long long>(0, cols.shift);
        const long long x1 = std::max<long long>(a.side_px, cols.shift + b.side_px);
        const int top = std::min(a.top_px, b.top_px);
        const int bottom = std::max(a.top_px + a.side_px, b.top_px + b.side_px);
        RoiSpec m = a;
        m.side_px = static_cast<int>(std::min<long long>(std::max<long long>(x1 - x0, bottom - top),
                                                          a.frame_width_px));
        m.left_px = mod_floor(a.left_px + x0, a.frame_width_px);
        if (m.left_px + m.side_px > a.frame_width_px) m.left_px -= a.frame_width_px;
        m.top_px = top;
        m.center_col_px = mod_floor(static_cast<long long>(m.left_px) + m.side_px / 2, a.frame_width_px);
        m.center_row_px = m.top_px + m.side_px / 2;
        m.center_theta_deg = 360.0 * m.center_col_px / a.frame_width_px;
        clip_vertical(m);
        rois[i] = m;
        rois.erase(rois.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  std::sort(rois.begin(), rois.end(), [](const RoiSpec& x, const RoiSpec& y) {
    if (x.left_px != y.left_px) return x.left_px < y.left_px;
    return x.side_px < y.side_px;
  });
  return rois;
}

Frame crop(const Frame& frame, const RoiSpec& roi) {
  if (!frame.valid()) throw ConsistencyError("frame pixel buffer does not match its dimensions");
  if (frame.width_px != roi.frame_width_px || frame.height_px != roi.frame_height_px) {
    throw ConsistencyError("ROI was computed for a " + std::to_string(roi.frame_width_px) + "x" +
                           std::to_string(roi.frame_height_px) + " frame, got " +
                           std::to_string(frame.width_px) + "x" + std::to_string(frame.height_px));
  }
  if (roi.side_px > frame.width_px) throw ConsistencyError("ROI wider than the frame");
  Frame out;
  out.frame_index = frame.frame_index;
  out.timestamp_s = frame.timestamp_s;
  out.width_px = roi.side_px;
  out.height_px = roi.clipped_height_px;
  out.pixels.resize(3 * roi.pixel_count());
  const auto stride = static_cast<std::size_t>(frame.width_px);
  for (int r = 0; r < out.height_px; ++r) {
    const auto src_row = static_cast<std::size_t>(roi.clipped_top_px + r);
    for (int c = 0; c < out.width_px; ++c) {
      const auto src_col = static_cast<std::size_t>(mod_floor(roi.left_px + c, frame.width_px));
      const std::size_t si = 3 * (src_row * stride + src_col);
      const std::size_t di = 3 * (static_cast<std::size_t>(r) * static_cast<std::size_t>(out.width_px) +
                                  static_cast<std::size_t>(c));
      std::copy_n(frame.pixels.begin() + static_cast<std::ptrdiff_t>(si), 3,
                  out.pixels.begin() + static_cast<std::ptrdiff_t>(di));
    }
  }
  return out;
}

bool rect_inside_roi(const PixelRect& box, const RoiSpec& roi) {
  if (box.width_px <= 0 || box.height_px <= 0) return false;
  if (box.top_px < roi.clipped_top_px ||
      box.top_px + box.height_px > roi.clipped_top_px + roi.clipped_height_px) {
    return false;
  }
  if (roi.side_px >= roi.frame_width_px) return box.width_px <= roi.frame_width_px;
  const int offset = mod_floor(static_cast<long long>(box.left_px) - roi.left_px, roi.frame_width_px);
  return offset + box.width_px <= roi.side_px;
}

nlohmann::json roi_to_json(const RoiSpec& roi) {
  return {{"frame_index", roi.frame_index},
          {"center_theta_deg", roi.center_theta_deg},
          {"center_col_px", roi.center_col_px},
          {"center_row_px", roi.center_row_px},
          {"side_px", roi.side_px},
          {"left_px", roi.left_px},
          {"top_px", roi.top_px},
          {"clipped_top_px", roi.clipped_top_px},
          {"clipped_height_px", roi.clipped_height_px},
          {"frame_width_px", roi.frame_width_px},
          {"frame_height_px", roi.frame_height_px}};
}

RoiSpec roi_from_json(const nlohmann::json& j) {
  RoiSpec r;
  r.frame_index = j.at("frame_index").get<std::size_t>();
  r.center_theta_deg = j.at("center_theta_deg").get<double>();
  r.center_col_px = j.at("center_col_px").get<int>();
  r.center_row_px = j.at("center_row_px").get<int>();
  r.side_px = j.at("side_px").get<int>();
  r.left_px = j.at("left_px").get<int>();
  r.top_px = j.at("top_px").get<int>();
  r.clipped_top_px = j.at("clipped_top_px").get<int>();
  r.clipped_height_px = j.at("clipped_height_px").get<int>();
  r.frame_width_px = j.at("frame_width_px").get<int>();
  r.frame_height_px = j.at("frame_height_px").get<int>();
  return r;
}

void write_ppm(std::ostream& out, const Frame& frame) {
  if (!frame.valid()) throw ConsistencyError("frame pixel buffer does not match its dimensions");
  out << "P6\n" << frame.width_px << ' ' << frame.height_px << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
  if (!out) throw IoError("failed writing PPM");
}

Frame read_ppm(std::istream& in) {
  auto next_token = [&in]() {
    std::string tok;
    char ch = 0;
    while (in.get(ch)) {
      if (ch == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(ch))) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(ch);
    }
    return tok;
  };
  if (next_token() != "P6") throw IoError("not a binary PPM (P6)");
  Frame f;
  try {
    f.width_px = std::stoi(next_token());
    f.height_px = std::stoi(next_token());
    if (std::stoi(next_token()) != 255) throw IoError("only maxval 255 PPM is supported");
  } catch (const std::logic_error&) {
    throw IoError("malformed PPM header");
  }
  if (f.width_px <= 0 || f.height_px <= 0) throw IoError("malformed PPM dimensions");
  f.pixels.resize(3u * static_cast<std::size_t>(f.width_px) * static_cast<std::size_t>(f.height_px));
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (!in) throw IoError("truncated PPM pixel data");
  return f;
}

void write_ppm_file(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_ppm(out, frame);
}

Frame read_ppm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_ppm(in);
}

}  // namespace sawec
