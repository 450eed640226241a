#include "sawec/geometry.hpp"

#include <cmath>

#include "sawec/channel.hpp"
#include "sawec/error.hpp"

namespace sawec {
namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

GeometryConfig GeometryConfig::from_positions(double nic_x_m, double camera_x_m,
                                              double tx_panorama_deg) {
  return {nic_x_m, camera_x_m, std::abs(nic_x_m - camera_x_m), tx_panorama_deg};
}

void GeometryConfig::validate() const {
  if (!(nic_camera_distance_m >= 0.0)) throw ConfigError("nic_camera_distance_m must be >= 0");
  if (std::abs(nic_camera_distance_m - std::abs(nic_x_m - camera_x_m)) > 1e-12) {
    throw ConfigError("nic_camera_distance_m disagrees with |nic_x_m - camera_x_m|");
  }
  if (!(tx_panorama_deg >= 0.0 && tx_panorama_deg < 360.0)) {
    throw ConfigError("tx_panorama_deg must lie in [0, 360)");
  }
}

CameraFrameTarget project_to_camera(double aoa_nic_deg, double range_nic_m, const GeometryConfig& cfg) {
  if (!(range_nic_m > 0.0)) throw DegenerateGeometryError("target range must be positive");
  if (!(std::abs(aoa_nic_deg) < 90.0)) {
    throw DegenerateGeometryError("target AoA must lie strictly inside (-90, 90) degrees");
  }
  if (cfg.nic_camera_distance_m == 0.0) return {aoa_nic_deg, range_nic_m};
  const double theta = deg_to_rad(aoa_nic_deg);
  const double zeta_aoa = sgn(aoa_nic_deg);
  const double zeta_pos = sgn(cfg.nic_x_m - cfg.camera_x_m);

  const double oc = range_nic_m * std::abs(std::sin(theta));
  const double cd = cfg.nic_camera_distance_m;
  const double bd = range_nic_m * std::cos(theta);
  // od < 0 means the target sits on the other side of the camera boresight.
  const double od = oc + zeta_pos * zeta_aoa * cd;

  const double side = zeta_aoa == 0.0 ? 1.0 : zeta_aoa;
  return {side * rad_to_deg(std::atan(od / bd)), std::hypot(od, bd)};
}

double wrap_degrees_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

double to_panorama_angle(double aoa_cam_deg, const GeometryConfig& cfg) {
  return wrap_degrees_360(aoa_cam_deg + cfg.tx_panorama_deg);
}

}  // namespace sawec
