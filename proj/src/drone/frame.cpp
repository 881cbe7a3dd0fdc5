#include "skygrid/drone/frame.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skygrid/drone/fec.hpp"
#include "skygrid/sim/rng.hpp"

namespace skygrid::drone {

std::uint32_t checksum32(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; frames are far below 4 GiB.
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::size_t frame_bytes_for(double bitrate_bps, double fps) {
  return static_cast<std::size_t>(std::llround(bitrate_bps / fps / 8.0));
}

Bytes synthesize_payload(std::uint64_t payload_seed, std::uint32_t frame_seq, std::size_t length) {
  sim::RngStream rng(
      sim::derive_seed(payload_seed, sim::stream_key(sim::StreamPurpose::frame_payload, frame_seq)));
  Bytes out(length);
  std::size_t i = 0;
  while (i < length) {
    std::uint64_t word = rng();
    for (int b = 0; b < 8 && i < length; ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(word);
      word >>= 8;
    }
  }
  return out;
}

std::size_t fragment_length(std::uint32_t frame_bytes, std::uint32_t fragment_idx, std::size_t mtu) {
  const std::size_t offset = static_cast<std::size_t>(fragment_idx) * mtu;
  if (offset >= frame_bytes) return 0;
  return std::min(mtu, frame_bytes - offset);
}

std::vector<Packet> packetize(const Frame& frame, std::size_t mtu) {
  if (mtu == 0) throw std::invalid_argument("mtu must be positive");
  const std::size_t len = frame.payload.size();
  const std::size_t count = (len + mtu - 1) / mtu;

  std::vector<Packet> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Packet p;
    p.frame_seq = frame.frame_seq;
    p.fragment_idx = static_cast<std::uint32_t>(i);
    p.kind = PacketKind::data;
    p.frame_bytes = static_cast<std::uint32_t>(len);
    p.frame_fragments = static_cast<std::uint32_t>(count);
    p.frame_checksum = frame.checksum;
    p.camera_yaw = frame.camera_yaw;
    p.gimbal_pitch = frame.gimbal_pitch;
    p.capture_ts = frame.capture_ts;
    const auto begin = frame.payload.begin() + static_cast<std::ptrdiff_t>(i * mtu);
    const auto end = frame.payload.begin() + static_cast<std::ptrdiff_t>(std::min(len, (i + 1) * mtu));
    p.payload.assign(begin, end);
    packets.push_back(std::move(p));
  }
  return packets;
}

std::vector<Packet> fec_encode(std::span<const Packet> block, std::uint16_t k, std::uint16_t r,
                               std::size_t mtu) {
  if (block.empty() || block.size() > k) {
    throw std::invalid_argument("an FEC block holds between 1 and k data packets");
  }
  if (r == 0) return {};
  const fec::ErasureCode code(k, r);
  std::vector<std::span<const std::uint8_t>> shards;
  shards.reserve(block.size());
  for (const Packet& p : block) shards.emplace_back(p.payload);
  std::vector<Bytes> parity = code.encode(shards, mtu);

  std::vector<Packet> out;
  out.reserve(r);
  for (std::uint16_t j = 0; j < r; ++j) {
    Packet p = header_copy(block.front());
    p.kind = PacketKind::parity;
    p.index_in_block = static_cast<std::uint16_t>(k + j);
    p.payload = std::move(parity[j]);
    out.push_back(std::move(p));
  }
  return out;
}

std::uint32_t fec_encode_frame(std::vector<Packet>& packets, std::uint16_t k, std::uint16_t r,
                               std::size_t mtu, std::uint32_t first_block_id) {
  std::vector<Packet> out;
  out.reserve(packets.size() + (packets.size() / k + 1) * r);
  std::uint32_t block_id = first_block_id;
  for (std::size_t start = 0; start < packets.size(); start += k, ++block_id) {
    const std::size_t n = std::min<std::size_t>(k, packets.size() - start);
    for (std::size_t i = 0; i < n; ++i) {
      Packet& p = packets[start + i];
      p.block_id = block_id;
      p.index_in_block = static_cast<std::uint16_t>(i);
      p.k = k;
      p.r = r;
      p.block_data_count = static_cast<std::uint16_t>(n);
    }
    const std::span<const Packet> block(packets.data() + start, n);
    std::vector<Packet> parity = fec_encode(block, k, r, mtu);
    // Parity inherits the block's first fragment index, which receivers use
    // to number recovered fragments.
    for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(packets[start + i]));
    for (Packet& p : parity) out.push_back(std::move(p));
  }
  packets = std::move(out);
  return block_id;
}

}  // namespace skygrid::drone
