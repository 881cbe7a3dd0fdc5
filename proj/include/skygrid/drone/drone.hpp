#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skygrid/drone/flight.hpp"
#include "skygrid/drone/frame.hpp"
#include "skygrid/drone/rate_controller.hpp"

namespace skygrid::drone {

struct DroneConfig {
  std::size_t mtu = 1400;
  double fps = 30.0;
  std::uint16_t fec_k = 8;
  std::uint16_t fec_r = 2;
  std::vector<ChannelId> channels{1, 6};
  RateConfig rate;
  FlightLimits limits;
  DronePose initial_pose;
  std::uint64_t payload_seed = 0;

  void validate() const;
};

// The on-board device plus airframe: frame source, packetizer, FEC encoder,
// round-robin channel scheduler, rate controller and flight controller.
// Transmission itself is left to the caller.
class Drone {
 public:
  Drone(DroneConfig config, SimTime start);

  // Captures a frame at the current bitrate and pose.
  Frame capture_frame(SimTime now);

  // Packetizes, FEC-encodes and assigns channels (data then parity per
  // block), stamping the current position into every header.
  std::vector<Packet> encode_frame(const Frame& frame);

  // One frame interval: bitrate update, capture, encode.
  struct FrameOutput {
    Frame frame;
    std::vector<Packet> packets;
  };
  FrameOutput produce_frame(SimTime now);

  bool on_ack(const Ack& ack, SimTime now) { return rate_.on_ack(ack, now); }

  // Keeps the setpoint with the latest issued_at. Returns true if it replaced
  // the current one.
  bool on_setpoint(const Setpoint& sp);

  void step_flight(double dt_s);

  const DronePose& pose() const noexcept { return pose_; }
  const std::optional<Setpoint>& setpoint() const noexcept { return setpoint_; }
  const RateController& rate() const noexcept { return rate_; }
  const DroneConfig& config() const noexcept { return config_; }
  std::uint32_t frames_captured() const noexcept { return next_frame_seq_; }

 private:
  DroneConfig config_;
  RateController rate_;
  DronePose pose_;
  std::optional<Setpoint> setpoint_;
  std::uint32_t next_frame_seq_ = 0;
  std::uint32_t next_block_id_ = 0;
  std::uint64_t next_tx_seq_ = 0;
  std::size_t next_channel_ = 0;
};

}  // namespace skygrid::drone
