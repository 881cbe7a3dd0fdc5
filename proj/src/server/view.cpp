#include "skygrid/server/view.hpp"

#include <algorithm>
#include <cmath>

#include "skygrid/error.hpp"

namespace skygrid::server {

void ViewGeometry::validate() const {
  if (!(display_fov_h > 0.0 && display_fov_h <= captured_fov_h)) {
    throw ConfigError("view.display_fov_h", "must be in (0, captured_fov_h]");
  }
  if (!(display_fov_v > 0.0 && display_fov_v <= captured_fov_v)) {
    throw ConfigError("view.display_fov_v", "must be in (0, captured_fov_v]");
  }
  if (!(captured_fov_h < 360.0)) throw ConfigError("view.captured_fov_h", "must be below 360");
  if (!(captured_fov_v <= 180.0)) throw ConfigError("view.captured_fov_v", "must be at most 180");
}

DisplayWindow compute_display_window(const HeadSample& head, double camera_yaw, double gimbal_pitch,
                                     const ViewGeometry& geometry) {
  const double m_h = geometry.margin_h();
  const double m_v = geometry.margin_v();
  const double want_yaw = shortest_angle(head.yaw, camera_yaw);
  const double want_pitch = head.pitch - gimbal_pitch;

  DisplayWindow w;
  w.offset_yaw = std::clamp(want_yaw, -m_h, m_h);
  w.offset_pitch = std::clamp(want_pitch, -m_v, m_v);
  w.saturated_h = w.offset_yaw != want_yaw;
  w.saturated_v = w.offset_pitch != want_pitch;
  return w;
}

Setpoint derive_setpoint(const HeadSample& head, Vec3 origin, double gain,
                         const drone::FlightLimits& limits, SimTime now) {
  const double yaw = deg_to_rad(head.yaw);
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);

  Setpoint sp;
  sp.target_yaw = normalize_degrees(head.yaw);
  sp.target_gimbal_pitch = std::clamp(head.pitch, limits.gimbal_min, limits.gimbal_max);
  sp.target_position = origin;
  sp.target_position.x += gain * (head.pos.x * c - head.pos.y * s);
  sp.target_position.y += gain * (head.pos.x * s + head.pos.y * c);
  sp.issued_at = now;
  return sp;
}

}  // namespace skygrid::server
