#pragma once

#include "skygrid/messages.hpp"

namespace skygrid::drone {

struct FlightLimits {
  double max_speed = 10.0;         // m/s
  double max_yaw_rate = 90.0;      // deg/s
  double max_gimbal_rate = 120.0;  // deg/s
  double gimbal_min = -90.0;
  double gimbal_max = 30.0;

  void validate() const;
};

struct DronePose {
  Vec3 position;
  double yaw = 0.0;  // [-180, 180)
  double gimbal_pitch = 0.0;
};

// Moves the pose toward the setpoint for dt seconds without exceeding any
// rate limit. Yaw turns the short way round; gimbal stays in its range.
DronePose apply_setpoint(const DronePose& pose, const Setpoint& sp, double dt_s,
                         const FlightLimits& limits);

}  // namespace skygrid::drone
