#pragma once

#include "skygrid/drone/flight.hpp"
#include "skygrid/messages.hpp"

namespace skygrid::server {

// Half-extent of the square head-tracking area, metres.
inline constexpr double kTrackingHalfExtent = 2.3;

struct HeadSample {
  SimTime t{};
  double yaw = 0.0;
  double pitch = 0.0;
  Vec2 pos;  // metres from the centre of the tracking area; x forward, y left
};

struct ViewGeometry {
  double captured_fov_h = 110.0;
  double captured_fov_v = 90.0;
  double display_fov_h = 90.0;
  double display_fov_v = 70.0;

  double margin_h() const { return (captured_fov_h - display_fov_h) / 2.0; }
  double margin_v() const { return (captured_fov_v - display_fov_v) / 2.0; }
  void validate() const;
};

// Angular offset of the displayed sub-window inside the captured frame.
struct DisplayWindow {
  double offset_yaw = 0.0;
  double offset_pitch = 0.0;
  bool saturated_h = false;
  bool saturated_v = false;
};

// Points the display window at the head direction relative to the
// orientation the frame was captured with, clamped to the spare field of
// view. This is what hides radio latency from head rotation.
DisplayWindow compute_display_window(const HeadSample& head, double camera_yaw, double gimbal_pitch,
                                     const ViewGeometry& geometry);

// Head direction drives drone yaw and gimbal pitch; head position, scaled by
// `gain` and rotated into the frame of the head yaw, offsets the drone from
// `origin` on the ground plane. Altitude stays at origin.z.
Setpoint derive_setpoint(const HeadSample& head, Vec3 origin, double gain,
                         const drone::FlightLimits& limits, SimTime now);

}  // namespace skygrid::server
