#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "skygrid/drone/flight.hpp"
#include "skygrid/server/reassembly.hpp"
#include "skygrid/server/view.hpp"

namespace skygrid::server {

inline constexpr int kSnapshotSchemaVersion = 1;

struct ReceiverSnapshot {
  std::uint32_t id = 0;
  Vec2 position;
  std::uint32_t rank = 0;
  bool in_upload_set = false;
  std::uint64_t rx_packets = 0;
  std::uint64_t uploaded_packets = 0;
  std::uint64_t uploaded_bytes = 0;
  std::uint64_t overdue_drops = 0;
  std::uint64_t fec_repairs = 0;
  std::uint64_t acks_sent = 0;
};

struct RateSnapshot {
  double bitrate_bps = 0.0;
  double ewma_goodput_bps = 0.0;
  bool has_estimate = false;
  bool in_timeout = false;
  std::uint64_t acks_applied = 0;
};

// Immutable export of world state at one instant, shared by the batch
// metrics stream and the live console.
struct StateSnapshot {
  SimTime t{};
  drone::DronePose drone;
  std::optional<Setpoint> setpoint;
  HeadSample head;
  std::vector<std::uint32_t> gate;  // upload set, rank order
  std::optional<std::uint32_t> rank1;
  std::vector<ReceiverSnapshot> receivers;
  RateSnapshot rate;
  PlayoutStats playout;
  std::optional<std::uint32_t> showing_seq;
  std::optional<DisplayWindow> window;
  double view_yaw = 0.0;
  double view_pitch = 0.0;
  ViewGeometry geometry;
};

}  // namespace skygrid::server
