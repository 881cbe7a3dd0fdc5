#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "skygrid/geometry.hpp"
#include "skygrid/sim/radio.hpp"
#include "skygrid/sim/time.hpp"

namespace skygrid {

using Bytes = std::vector<std::uint8_t>;
using sim::ChannelId;
using sim::Duration;
using sim::SimTime;

enum class PacketKind : std::uint8_t { data, parity };

// One radio unit. Besides its own identity, every packet repeats the block
// geometry (so any k of a block decode it) and the frame header (so the
// server can reassemble from whichever fragments arrive first).
struct Packet {
  std::uint64_t tx_seq = 0;  // stream-wide transmit order; orders position stamps
  std::uint32_t frame_seq = 0;
  std::uint32_t fragment_idx = 0;  // data: fragment index; parity: first fragment of its block
  std::uint32_t block_id = 0;
  std::uint16_t index_in_block = 0;
  PacketKind kind = PacketKind::data;
  std::uint16_t k = 1;
  std::uint16_t r = 0;
  std::uint16_t block_data_count = 1;  // data packets actually sent in this block (<= k)

  std::uint32_t frame_bytes = 0;
  std::uint32_t frame_fragments = 0;
  std::uint32_t frame_checksum = 0;
  double camera_yaw = 0.0;
  double gimbal_pitch = 0.0;
  SimTime capture_ts{};

  Vec3 drone_pos;
  ChannelId channel = 0;
  Bytes payload;
};

using PacketPtr = std::shared_ptr<const Packet>;

// The packet's header fields with an empty payload.
inline Packet header_copy(const Packet& p) {
  Packet out;
  out.tx_seq = p.tx_seq;
  out.frame_seq = p.frame_seq;
  out.fragment_idx = p.fragment_idx;
  out.block_id = p.block_id;
  out.index_in_block = p.index_in_block;
  out.kind = p.kind;
  out.k = p.k;
  out.r = p.r;
  out.block_data_count = p.block_data_count;
  out.frame_bytes = p.frame_bytes;
  out.frame_fragments = p.frame_fragments;
  out.frame_checksum = p.frame_checksum;
  out.camera_yaw = p.camera_yaw;
  out.gimbal_pitch = p.gimbal_pitch;
  out.capture_ts = p.capture_ts;
  out.drone_pos = p.drone_pos;
  out.channel = p.channel;
  return out;
}

// Receiver feedback for bandwidth estimation.
struct Ack {
  std::uint32_t receiver_id = 0;
  SimTime issued_at{};
  std::uint64_t bytes_received = 0;
  Duration span{};
};

// Latest-value flight/gimbal command.
struct Setpoint {
  double target_yaw = 0.0;
  double target_gimbal_pitch = 0.0;
  Vec3 target_position;
  SimTime issued_at{};
};

inline constexpr std::size_t kAckWireBytes = 32;
inline constexpr std::size_t kSetpointWireBytes = 48;

}  // namespace skygrid
