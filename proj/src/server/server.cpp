#include "skygrid/server/server.hpp"

#include <stdexcept>

namespace skygrid::server {

StreamingServer::StreamingServer(ServerConfig config)
    : config_(std::move(config)), buffer_(config_.playout_budget) {
  if (config_.sites.empty()) throw std::invalid_argument("server needs at least one receiver site");
  config_.view.validate();
  route_target_ = rank1_for(config_.home);
}

std::uint32_t StreamingServer::rank1_for(Vec3 position) const {
  return grid::compute_gate(position.ground(), config_.sites).front().receiver_id;
}

IngestOutcome StreamingServer::ingest(const Packet& pkt, std::uint32_t /*from*/, SimTime now) {
  IngestOutcome out;
  out.result = buffer_.ingest(pkt, now);

  if (!position_seq_ || pkt.tx_seq > *position_seq_) {
    position_seq_ = pkt.tx_seq;
    drone_position_ = pkt.drone_pos;
    const std::uint32_t target = rank1_for(pkt.drone_pos);
    out.route_changed = target != route_target_;
    route_target_ = target;
  }
  return out;
}

RenderOutcome StreamingServer::render(SimTime now, const HeadSample& head) {
  RenderOutcome out;
  out.playout = buffer_.playout(now);
  out.shown = buffer_.showing();
  if (out.shown) {
    out.window = compute_display_window(head, out.shown->camera_yaw, out.shown->gimbal_pitch, config_.view);
    out.view_yaw = normalize_degrees(out.shown->camera_yaw + out.window.offset_yaw);
    out.view_pitch = out.shown->gimbal_pitch + out.window.offset_pitch;
    window_ = out.window;
  }
  return out;
}

std::optional<Setpoint> StreamingServer::update_control(const HeadSample& head, Vec3 origin, SimTime now) {
  Setpoint sp = derive_setpoint(head, origin, config_.position_gain, config_.limits, now);
  if (setpoint_ && setpoint_->target_yaw == sp.target_yaw &&
      setpoint_->target_gimbal_pitch == sp.target_gimbal_pitch &&
      setpoint_->target_position == sp.target_position) {
    return std::nullopt;
  }
  setpoint_ = sp;
  return sp;
}

}  // namespace skygrid::server
