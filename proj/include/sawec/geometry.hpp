#pragma once

namespace sawec {

/// NIC antenna array at x = nic_x_m and camera at x = camera_x_m, sharing the
/// same Y and Z. tx_panorama_deg is where the NIC boresight lands on the
/// 360-degree frame.
struct GeometryConfig {
  double nic_x_m = 0.0;
  double camera_x_m = 0.0;
  double nic_camera_distance_m = 0.0;
  double tx_panorama_deg = 0.0;

  static GeometryConfig from_positions(double nic_x_m, double camera_x_m, double tx_panorama_deg);

  void validate() const;
};

struct CameraFrameTarget {
  double aoa_deg = 0.0;
  double range_m = 0.0;
};

/// Re-expresses a target seen by the NIC at (aoa, range) as seen from the
/// camera. The segment lengths OC and OD are combined with the sign factors
/// sgn(A_x - B_x) and sgn(aoa), and the AoA sign is carried back onto the
/// result, so a target on the left stays on the left. sgn(0) is 0, so a
/// target on the NIC boresight maps to the camera boresight.
CameraFrameTarget project_to_camera(double aoa_nic_deg, double range_nic_m, const GeometryConfig& cfg);

/// (aoa_cam + tx_panorama) mod 360, in [0, 360).
double to_panorama_angle(double aoa_cam_deg, const GeometryConfig& cfg);

double wrap_degrees_360(double deg);

}  // namespace sawec
