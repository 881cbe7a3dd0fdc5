#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "skygrid/messages.hpp"

namespace skygrid::drone {

struct Frame {
  std::uint32_t frame_seq = 0;
  SimTime capture_ts{};
  double camera_yaw = 0.0;
  double gimbal_pitch = 0.0;
  Bytes payload;
  std::uint32_t checksum = 0;
};

std::uint32_t checksum32(std::span<const std::uint8_t> bytes);

// round(bitrate / fps / 8)
std::size_t frame_bytes_for(double bitrate_bps, double fps);

// Deterministic synthetic payload for a frame, seeded by (payload_seed, frame_seq).
Bytes synthesize_payload(std::uint64_t payload_seed, std::uint32_t frame_seq, std::size_t length);

// Splits a frame into ceil(len / mtu) data packets carrying the frame header.
// Block fields are left for the encoder to fill.
std::vector<Packet> packetize(const Frame& frame, std::size_t mtu);

// Real payload length of fragment `fragment_idx` of a frame.
std::size_t fragment_length(std::uint32_t frame_bytes, std::uint32_t fragment_idx, std::size_t mtu);

// Groups a frame's data packets into blocks of k (the last may be short) and
// appends r parity packets after each block's data. Assigns block ids starting
// at `first_block_id` and returns the next free id.
std::uint32_t fec_encode_frame(std::vector<Packet>& packets, std::uint16_t k, std::uint16_t r,
                               std::size_t mtu, std::uint32_t first_block_id);

// Parity packets for one block of 1..k data packets (padded with virtual zero
// packets to k). Parity payloads are mtu bytes.
std::vector<Packet> fec_encode(std::span<const Packet> block, std::uint16_t k, std::uint16_t r,
                               std::size_t mtu);

}  // namespace skygrid::drone
