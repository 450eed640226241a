#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "sawec/cluster.hpp"
#include "sawec/geometry.hpp"

namespace sawec {

struct RoiConfig {
  double alpha = 2.0;
  int frame_width_px = 9600;
  int frame_height_px = 4800;
  int min_side_px = 8;
  // Negative selects mid-height.
  int center_row_px = -1;

  int resolved_center_row() const { return center_row_px < 0 ? frame_height_px / 2 : center_row_px; }
  void validate() const;
};

/// Axis-aligned pixel rectangle on an equirectangular frame. left_px may lie
/// outside [0, W) and is interpreted modulo W; rows are not wrapped.
struct PixelRect {
  int left_px = 0;
  int top_px = 0;
  int width_px = 0;
  int height_px = 0;

  bool operator==(const PixelRect&) const = default;
};

struct RoiSpec {
  std::size_t frame_index = 0;
  double center_theta_deg = 0.0;
  int center_col_px = 0;
  int center_row_px = 0;
  int side_px = 0;
  // Square of side side_px before vertical clipping; left_px is pre-wrap.
  int left_px = 0;
  int top_px = 0;
  // Rows actually covered after clipping to [0, frame_height_px).
  int clipped_top_px = 0;
  int clipped_height_px = 0;
  int frame_width_px = 0;
  int frame_height_px = 0;

  PixelRect clipped_rect() const { return {left_px, clipped_top_px, side_px, clipped_height_px}; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(side_px) * static_cast<std::size_t>(clipped_height_px);
  }
};

struct Frame {
  std::size_t frame_index = 0;
  double timestamp_s = 0.0;
  int width_px = 0;
  int height_px = 0;
  std::vector<std::uint8_t> pixels;  // RGB, row-major

  using Rgb = std::array<std::uint8_t, 3>;

  static Frame filled(int width, int height, Rgb color, std::size_t index = 0, double t = 0.0);

  Rgb pixel(int row, int col) const;
  void set_pixel(int row, int col, Rgb c);
  // Paints rect, wrapping columns and clipping rows.
  void fill_rect(const PixelRect& rect, Rgb c);
  bool valid() const {
    return width_px > 0 && height_px > 0 &&
           pixels.size() == 3u * static_cast<std::size_t>(width_px) * static_cast<std::size_t>(height_px);
  }
};

/// clamp(round(a * alpha * W / 360), min_side, W).
int roi_side_px(double extent_deg, double alpha, int frame_width_px, int min_side_px);

/// ROI for a target at (aoa, range) in the NIC frame, sized from the AoA
/// extent of its cluster.
RoiSpec roi_from_target(double aoa_nic_deg, double range_nic_m, double extent_deg,
                        const GeometryConfig& geom, const RoiConfig& cfg, std::size_t frame_index = 0);

RoiSpec roi_from_cluster(const ClusterResult& cluster, const GeometryConfig& geom, const RoiConfig& cfg,
                         std::size_t frame_index = 0);

/// Places a square ROI of the given side centred on a panorama angle.
RoiSpec roi_at_theta(double theta_deg, int side_px, const RoiConfig& cfg, std::size_t frame_index = 0);

/// Repeatedly merges pairs whose overlap is at least half the smaller side
/// (on both axes) into their bounding square. Output is ordered by left edge.
std::vector<RoiSpec> merge_rois(std::vector<RoiSpec> rois);

/// Extracts the ROI pixels. Columns wrap modulo the frame width.
Frame crop(const Frame& frame, const RoiSpec& roi);

/// True when every pixel of box (already clipped to the frame) lies inside the ROI.
bool rect_inside_roi(const PixelRect& box, const RoiSpec& roi);

nlohmann::json roi_to_json(const RoiSpec& roi);
RoiSpec roi_from_json(const nlohmann::json& j);

// Binary PPM (P6, maxval 255).
void write_ppm(std::ostream& out, const Frame& frame);
Frame read_ppm(std::istream& in);
void write_ppm_file(const std::filesystem::path& path, const Frame& frame);
Frame read_ppm_file(const std::filesystem::path& path);

}  // namespace sawec
