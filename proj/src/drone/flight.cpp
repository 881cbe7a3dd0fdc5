#include "skygrid/drone/flight.hpp"

#include <algorithm>
#include <cmath>

#include "skygrid/error.hpp"

namespace skygrid::drone {
namespace {

double step_toward(double current, double target, double max_step) {
  const double delta = target - current;
  if (std::abs(delta) <= max_step) return target;
  return current + std::copysign(max_step, delta);
}

}  // namespace

void FlightLimits::validate() const {
  if (!(max_speed > 0.0)) throw ConfigError("flight.max_speed", "must be > 0");
  if (!(max_yaw_rate > 0.0)) throw ConfigError("flight.max_yaw_rate", "must be > 0");
  if (!(max_gimbal_rate > 0.0)) throw ConfigError("flight.max_gimbal_rate", "must be > 0");
  if (!(gimbal_min < gimbal_max)) throw ConfigError("flight.gimbal", "gimbal_min must be below gimbal_max");
}

DronePose apply_setpoint(const DronePose& pose, const Setpoint& sp, double dt_s,
                         const FlightLimits& limits) {
  DronePose next = pose;

  const double max_move = limits.max_speed * dt_s;
  const double dist = distance(pose.position, sp.target_position);
  if (dist <= max_move) {
    next.position = sp.target_position;
  } else {
    const double f = max_move / dist;
    next.position.x += (sp.target_position.x - pose.position.x) * f;
    next.position.y += (sp.target_position.y - pose.position.y) * f;
    next.position.z += (sp.target_position.z - pose.position.z) * f;
  }

  const double yaw_error = shortest_angle(sp.target_yaw, pose.yaw);
  const double max_turn = limits.max_yaw_rate * dt_s;
  next.yaw = std::abs(yaw_error) <= max_turn ? normalize_degrees(sp.target_yaw)
                                             : normalize_degrees(pose.yaw + std::copysign(max_turn, yaw_error));

  const double gimbal_target = std::clamp(sp.target_gimbal_pitch, limits.gimbal_min, limits.gimbal_max);
  next.gimbal_pitch = std::clamp(step_toward(pose.gimbal_pitch, gimbal_target, limits.max_gimbal_rate * dt_s),
                                 limits.gimbal_min, limits.gimbal_max);
  return next;
}

}  // namespace skygrid::drone
