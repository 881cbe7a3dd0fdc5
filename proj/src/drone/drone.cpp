#include "skygrid/drone/drone.hpp"

#include <stdexcept>

#include "skygrid/error.hpp"

namespace skygrid::drone {

void DroneConfig::validate() const {
  if (!(fps > 0.0)) throw ConfigError("video.fps", "must be > 0");
  if (mtu == 0 || mtu > 65'000) throw ConfigError("video.mtu", "must be in [1, 65000]");
  if (fec_k == 0) throw ConfigError("fec.k", "must be at least 1");
  if (static_cast<unsigned>(fec_k) + fec_r > 256) {
    throw ConfigError("fec", "k + r must not exceed 256 (GF(256) field size)");
  }
  if (channels.empty()) throw ConfigError("radio.channels", "at least one channel is required");
  rate.validate();
  limits.validate();
}

Drone::Drone(DroneConfig config, SimTime start)
    : config_(std::move(config)), rate_(config_.rate, start), pose_(config_.initial_pose) {
  config_.validate();
  pose_.yaw = normalize_degrees(pose_.yaw);
}

Frame Drone::capture_frame(SimTime now) {
  Frame frame;
  frame.frame_seq = next_frame_seq_++;
  frame.capture_ts = now;
  frame.camera_yaw = pose_.yaw;
  frame.gimbal_pitch = pose_.gimbal_pitch;
  frame.payload = synthesize_payload(config_.payload_seed, frame.frame_seq,
                                     frame_bytes_for(rate_.bitrate(), config_.fps));
  frame.checksum = checksum32(frame.payload);
  return frame;
}

std::vector<Packet> Drone::encode_frame(const Frame& frame) {
  std::vector<Packet> packets = packetize(frame, config_.mtu);
  next_block_id_ = fec_encode_frame(packets, config_.fec_k, config_.fec_r, config_.mtu, next_block_id_);
  for (Packet& p : packets) {
    p.tx_seq = next_tx_seq_++;
    p.drone_pos = pose_.position;
    p.channel = config_.channels[next_channel_];
    next_channel_ = (next_channel_ + 1) % config_.channels.size();
  }
  return packets;
}

Drone::FrameOutput Drone::produce_frame(SimTime now) {
  rate_.update_bitrate(now);
  FrameOutput out;
  out.frame = capture_frame(now);
  out.packets = encode_frame(out.frame);
  return out;
}

bool Drone::on_setpoint(const Setpoint& sp) {
  if (setpoint_ && sp.issued_at <= setpoint_->issued_at) return false;
  setpoint_ = sp;
  return true;
}

void Drone::step_flight(double dt_s) {
  if (!setpoint_) return;
  pose_ = apply_setpoint(pose_, *setpoint_, dt_s, config_.limits);
}

}  // namespace skygrid::drone
